#include "e2eslu/synthcorpus/features.hpp"

#include <limits>
#include <string>

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/errors.hpp"

namespace e2eslu {

FeatureRenderer::FeatureRenderer(std::size_t vocab_size, FeatureRendererConfig cfg)
    : vocab_size_(vocab_size), cfg_(cfg) {
  if (cfg_.feature_dim == 0 || cfg_.min_frames == 0 || cfg_.max_frames < cfg_.min_frames) {
    throw ConfigError("feature renderer: need feature_dim > 0 and 1 <= min_frames <= max_frames");
  }
  if (cfg_.noise < 0) throw ConfigError("feature renderer: noise must be non-negative");
  Rng rng(cfg_.seed);
  prototypes_.resize(vocab_size_ * cfg_.feature_dim);
  for (auto& v : prototypes_) v = static_cast<float>(rng.normal());
}

std::span<const float> FeatureRenderer::prototype(int piece) const {
  if (piece < 0 || static_cast<std::size_t>(piece) >= vocab_size_) {
    throw IndexError("feature renderer: piece id " + std::to_string(piece) + " out of range");
  }
  return {prototypes_.data() + static_cast<std::size_t>(piece) * cfg_.feature_dim,
          cfg_.feature_dim};
}

FeatureMatrix FeatureRenderer::render(std::span<const int> pieces, std::uint64_t seed,
                                      std::size_t frames_override) const {
  if (pieces.empty()) throw DataError("render_features: empty piece sequence");
  Rng rng(seed);
  FeatureMatrix m;
  m.cols = cfg_.feature_dim;
  for (int p : pieces) {
    const auto proto = prototype(p);
    const std::size_t frames =
        frames_override ? frames_override
                        : cfg_.min_frames + rng.below(cfg_.max_frames - cfg_.min_frames + 1);
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t j = 0; j < cfg_.feature_dim; ++j) {
        const double noise = cfg_.noise > 0 ? rng.normal(0.0, cfg_.noise) : 0.0;
        m.data.push_back(static_cast<float>(proto[j] + noise));
      }
      ++m.rows;
    }
  }
  return m;
}

int FeatureRenderer::nearest_piece(std::span<const float> frame) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < vocab_size_; ++p) {
    double d = 0;
    for (std::size_t j = 0; j < cfg_.feature_dim; ++j) {
      const double diff = frame[j] - prototypes_[p * cfg_.feature_dim + j];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(p);
    }
  }
  return best;
}

FeatureMatrix render_features(std::span<const int> pieces, const FeatureRenderer& renderer,
                              std::uint64_t seed) {
  return renderer.render(pieces, seed);
}

}  // namespace e2eslu
