// SPDX-License-Identifier: Apache-2.0
#include "ood/detect/evaluation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ood::detect {

namespace {

void require_nonempty(std::span<const double> scores, const char* what) {
  if (scores.empty()) throw std::invalid_argument(std::string(what) + ": empty score list");
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

}  // namespace

double false_acceptance_rate(std::span<const double> ood_scores, double threshold) {
  require_nonempty(ood_scores, "far");
  const auto accepted = std::count_if(ood_scores.begin(), ood_scores.end(),
                                      [&](double s) { return s < threshold; });
  return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

double false_rejection_rate(std::span<const double> id_scores, double threshold) {
  require_nonempty(id_scores, "frr");
  const auto rejected = std::count_if(id_scores.begin(), id_scores.end(),
                                      [&](double s) { return s >= threshold; });
  return static_cast<double>(rejected) / static_cast<double>(id_scores.size());
}

std::vector<double> candidate_thresholds(std::span<const double> id_scores,
                                         std::span<const double> ood_scores) {
  std::vector<double> pooled(id_scores.begin(), id_scores.end());
  pooled.insert(pooled.end(), ood_scores.begin(), ood_scores.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  std::vector<double> out;
  if (pooled.empty()) return out;
  out.reserve(2 * pooled.size() + 1);
  out.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    if (i > 0) out.push_back(pooled[i - 1] + (pooled[i] - pooled[i - 1]) / 2.0);
    out.push_back(pooled[i]);
  }
  out.push_back(pooled.back() + 1.0);
  return out;
}

ErrorRateCurve find_eer(std::span<const double> id_scores, std::span<const double> ood_scores) {
  require_nonempty(id_scores, "find_eer");
  require_nonempty(ood_scores, "find_eer");

  std::vector<double> id_sorted(id_scores.begin(), id_scores.end());
  std::vector<double> ood_sorted(ood_scores.begin(), ood_scores.end());
  std::sort(id_sorted.begin(), id_sorted.end());
  std::sort(ood_sorted.begin(), ood_sorted.end());
  const double n_id = static_cast<double>(id_sorted.size());
  const double n_ood = static_cast<double>(ood_sorted.size());

  ErrorRateCurve curve;
  for (double theta : candidate_thresholds(id_scores, ood_scores)) {
    // Counts via binary search: accepted OOD are s < theta, rejected ID s >= theta.
    const auto accepted = std::lower_bound(ood_sorted.begin(), ood_sorted.end(), theta) -
                          ood_sorted.begin();
    const auto kept = std::lower_bound(id_sorted.begin(), id_sorted.end(), theta) -
                      id_sorted.begin();
    curve.points.push_back({theta, static_cast<double>(accepted) / n_ood,
                            (n_id - static_cast<double>(kept)) / n_id});
  }

  for (std::size_t j = 0; j < curve.points.size(); ++j) {
    const auto& p = curve.points[j];
    const double diff = p.far - p.frr;
    if (diff == 0.0) {
      curve.eer = p.far;
      curve.eer_threshold = p.threshold;
      return curve;
    }
    if (diff > 0.0) {
      // The first point always has FAR = 0 and FRR = 1, so j >= 1 here.
      const auto& q = curve.points[j - 1];
      const double prev = q.far - q.frr;
      const double t = -prev / (diff - prev);
      curve.eer = q.far + t * (p.far - q.far);
      curve.eer_threshold = q.threshold + t * (p.threshold - q.threshold);
      return curve;
    }
  }
  throw std::logic_error("find_eer: no crossing found");
}

void write_curve_csv(std::ostream& out, const ErrorRateCurve& curve) {
  out << "threshold,far,frr\n";
  for (const auto& p : curve.points)
    out << format_double(p.threshold) << ',' << format_double(p.far) << ','
        << format_double(p.frr) << '\n';
  out << "# eer=" << format_double(curve.eer)
      << " at threshold=" << format_double(curve.eer_threshold) << '\n';
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace ood::detect
