#include "e2eslu/diffengine/adam.hpp"

#include <cmath>
#include <string>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {
void validate(const AdamConfig& cfg) {
  if (!(cfg.lr > 0)) throw ConfigError("Adam learning rate must be positive, got " + std::to_string(cfg.lr));
  if (!(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
}
}  // namespace

AdamState AdamState::zeros(std::size_t size, const AdamConfig& cfg) {
  validate(cfg);
  AdamState s;
  s.first_moment.assign(size, Real(0));
  s.second_moment.assign(size, Real(0));
  s.lr = cfg.lr;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.epsilon = cfg.epsilon;
  return s;
}

void adam_step(std::span<Real> param, std::span<const Real> grad, AdamState& state) {
  if (!(state.lr > 0)) throw ConfigError("Adam learning rate must be positive");
  if (param.size() != grad.size() || param.size() != state.first_moment.size() ||
      param.size() != state.second_moment.size()) {
    throw DimensionError("adam_step: parameter, gradient and state sizes differ");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const Real b1 = static_cast<Real>(state.beta1);
  const Real b2 = static_cast<Real>(state.beta2);
  const Real step = static_cast<Real>(state.lr / c1);
  const Real inv_c2 = static_cast<Real>(1.0 / c2);
  const Real eps = static_cast<Real>(state.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const Real g = grad[i];
    Real& m = state.first_moment[i];
    Real& v = state.second_moment[i];
    m = b1 * m + (Real(1) - b1) * g;
    v = b2 * v + (Real(1) - b2) * g * g;
    param[i] -= step * m / (std::sqrt(v * inv_c2) + eps);
  }
}

Adam::Adam(ParameterStore& store, AdamConfig cfg) : store_(store), cfg_(cfg) {
  validate(cfg_);
  for (const auto& e : store_.entries()) states_.push_back(AdamState::zeros(e->tensor.size(), cfg_));
}

void Adam::set_lr(double lr) {
  if (!(lr > 0)) throw ConfigError("Adam learning rate must be positive");
  cfg_.lr = lr;
  for (auto& s : states_) s.lr = lr;
}

void Adam::step() {
  auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor& t = entries[i]->tensor;
    if (entries[i]->frozen || !t.has_grad()) continue;
    adam_step(t.values(), t.grad(), states_[i]);
  }
}

double clip_grad_norm(ParameterStore& store, double max_norm) {
  double sq = 0;
  for (const auto& e : store.entries()) {
    for (Real g : e->tensor.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const Real f = static_cast<Real>(max_norm / norm);
    for (auto& e : store.entries()) {
      for (auto& g : e->tensor.grad_mut()) g *= f;
    }
  }
  return norm;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
