// SPDX-License-Identifier: Apache-2.0
#include "ood/detect/detector.hpp"

#include <stdexcept>

namespace ood::detect {

DetectionResult classify(std::span<const std::size_t> tokens,
                         const embed::BiLstmClassifier& embedder,
                         const Autoencoder& autoencoder, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("classify: threshold must be >= 0");
  const auto rep = embed::embed_sentence(tokens, embedder);
  const double score = autoencoder.score(rep.values);
  return {score, verdict_for(score, threshold), threshold};
}

}  // namespace ood::detect
