#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2eslu/diffengine/parameters.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment buffers and step counter of one parameter tensor.
struct AdamState {
  std::vector<Real> first_moment;
  std::vector<Real> second_moment;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros(std::size_t size, const AdamConfig& cfg);
};

// One bias-corrected Adam update of `param` in place. Increments state.t.
void adam_step(std::span<Real> param, std::span<const Real> grad, AdamState& state);

/// Adam over all non-frozen entries of a ParameterStore.
class Adam {
 public:
  Adam(ParameterStore& store, AdamConfig cfg);

  void set_lr(double lr);
  double lr() const noexcept { return cfg_.lr; }
  // Applies one update from the current gradients; parameters without a
  // gradient buffer or marked frozen are skipped.
  void step();

 private:
  ParameterStore& store_;
  AdamConfig cfg_;
  std::vector<AdamState> states_;
};

// Scales all gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(ParameterStore& store, double max_norm);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
