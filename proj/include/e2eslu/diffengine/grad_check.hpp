#pragma once

#include <functional>
#include <span>

#include "e2eslu/diffengine/graph.hpp"
#include "e2eslu/diffengine/rng.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct GradCheckReport {
  double max_rel_error = 0;
  double max_abs_error = 0;
  std::size_t checked = 0;
  bool passed = true;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries whose
// true gradient is numerically zero from dominating the report.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares the reverse-mode gradient of a scalar function of `x` against
/// central differences (f(x+h) - f(x-h)) / 2h accumulated in double. `f`
/// receives a fresh graph for every evaluation and must be deterministic.
/// Meaningful tolerances require the double build.
GradCheckReport grad_check(const std::function<Var(Graph&, Var)>& f, const Tensor& x, double h,
                           double tol);

/// Same check for parameter tensors referenced by the function. At most
/// `max_entries` randomly chosen coordinates per tensor are probed (0 = all).
GradCheckReport grad_check_parameters(const std::function<Var(Graph&)>& f,
                                      std::span<Tensor* const> params, double h, double tol,
                                      std::size_t max_entries = 0, std::uint64_t seed = 0);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
