// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "ood/detect/autoencoder.hpp"
#include "ood/embed/classifier.hpp"

namespace ood::detect {

enum class Verdict { in_domain, out_of_domain };

struct DetectionResult {
  double score = 0.0;
  Verdict verdict = Verdict::out_of_domain;
  double threshold = 0.0;
};

/// ID iff ||psi(phi(eps(x))) - eps(x)||^2 < threshold.
DetectionResult classify(std::span<const std::size_t> tokens,
                         const embed::BiLstmClassifier& embedder,
                         const Autoencoder& autoencoder, double threshold);

inline Verdict verdict_for(double score, double threshold) {
  return score < threshold ? Verdict::in_domain : Verdict::out_of_domain;
}

}  // namespace ood::detect
