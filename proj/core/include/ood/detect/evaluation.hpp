// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace ood::detect {

/// Fraction of OOD scores accepted as ID (score < threshold).
double false_acceptance_rate(std::span<const double> ood_scores, double threshold);
/// Fraction of ID scores rejected as OOD (score >= threshold).
double false_rejection_rate(std::span<const double> id_scores, double threshold);

inline double far(std::span<const double> ood_scores, double threshold) {
  return false_acceptance_rate(ood_scores, threshold);
}
inline double frr(std::span<const double> id_scores, double threshold) {
  return false_rejection_rate(id_scores, threshold);
}

struct ErrorRatePoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

struct ErrorRateCurve {
  std::vector<ErrorRatePoint> points;  // increasing threshold
  double eer = 0.0;
  double eer_threshold = 0.0;
};

/// Candidate thresholds for n distinct pooled scores s_1 < ... < s_n:
/// s_1 - 1, every s_i, every midpoint, s_n + 1 (2n + 1 values).
std::vector<double> candidate_thresholds(std::span<const double> id_scores,
                                         std::span<const double> ood_scores);

/// Sweeps every candidate threshold. The EER is FAR (= FRR) at the first
/// sweep point where FAR - FRR reaches zero exactly, otherwise the linear
/// interpolation between the two sweep points bracketing the sign change.
/// Throws std::invalid_argument when either list is empty.
ErrorRateCurve find_eer(std::span<const double> id_scores, std::span<const double> ood_scores);

/// `threshold,far,frr` rows followed by `# eer=<v> at threshold=<v>`.
/// Values use shortest round-trip formatting, so output is byte-stable.
void write_curve_csv(std::ostream& out, const ErrorRateCurve& curve);

/// Linear-interpolated percentile, q in [0, 1].
double percentile(std::span<const double> values, double q);

/// Deployment threshold from ID validation scores only (95th percentile).
inline double deployment_threshold(std::span<const double> id_validation_scores,
                                   double quantile = 0.95) {
  return percentile(id_validation_scores, quantile);
}

/// Max threshold sentinel: every finite score is accepted as ID.
inline constexpr double kAcceptAll = std::numeric_limits<double>::infinity();

}  // namespace ood::detect
