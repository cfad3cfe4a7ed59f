#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2eslu/synthcorpus/utterance.hpp"

namespace e2eslu {

struct FeatureRendererConfig {
  std::size_t feature_dim = 64;
  // Frames emitted per wordpiece, drawn uniformly from [min_frames, max_frames].
  std::size_t min_frames = 1;
  std::size_t max_frames = 3;
  // Standard deviation of additive Gaussian noise per coordinate.
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Synthetic stand-in for spectrogram frames: each wordpiece owns a random
/// prototype vector, and an utterance is rendered as a few noisy copies of the
/// prototype of each of its pieces, in order.
class FeatureRenderer {
 public:
  FeatureRenderer(std::size_t vocab_size, FeatureRendererConfig cfg);

  // `frames_override` > 0 forces that many frames per piece.
  FeatureMatrix render(std::span<const int> pieces, std::uint64_t seed,
                       std::size_t frames_override = 0) const;

  std::span<const float> prototype(int piece) const;
  // Piece whose prototype is closest (L2) to `frame`.
  int nearest_piece(std::span<const float> frame) const;

  const FeatureRendererConfig& config() const noexcept { return cfg_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }

 private:
  std::size_t vocab_size_;
  FeatureRendererConfig cfg_;
  std::vector<float> prototypes_;
};

FeatureMatrix render_features(std::span<const int> pieces, const FeatureRenderer& renderer,
                              std::uint64_t seed);

}  // namespace e2eslu
