#include "e2eslu/diffengine/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

void compare(double analytic, double numeric, double tol, GradCheckReport& report) {
  const double abs_err = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  report.max_abs_error = std::max(report.max_abs_error, abs_err);
  report.max_rel_error = std::max(report.max_rel_error, abs_err / denom);
  report.checked += 1;
  if (abs_err / denom > tol || !std::isfinite(analytic) || !std::isfinite(numeric)) {
    report.passed = false;
  }
}

}  // namespace

GradCheckReport grad_check(const std::function<Var(Graph&, Var)>& f, const Tensor& x, double h,
                           double tol) {
  std::vector<double> analytic(x.size(), 0.0);
  {
    Graph g;
    Var in = g.variable(x);
    Var out = f(g, in);
    g.backward(out);
    auto gr = g.grad(in);
    for (std::size_t i = 0; i < gr.size(); ++i) analytic[i] = static_cast<double>(gr[i]);
  }
  auto eval = [&](const Tensor& point) {
    Graph g(false);
    Var in = g.constant(point);
    return static_cast<double>(f(g, in).value().item());
  };
  GradCheckReport report;
  Tensor probe = x;
  probe.set_requires_grad(false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real orig = probe[i];
    probe[i] = static_cast<Real>(static_cast<double>(orig) + h);
    const double up = eval(probe);
    probe[i] = static_cast<Real>(static_cast<double>(orig) - h);
    const double down = eval(probe);
    probe[i] = orig;
    compare(analytic[i], (up - down) / (2.0 * h), tol, report);
  }
  return report;
}

GradCheckReport grad_check_parameters(const std::function<Var(Graph&)>& f,
                                      std::span<Tensor* const> params, double h, double tol,
                                      std::size_t max_entries, std::uint64_t seed) {
  for (Tensor* p : params) p->zero_grad();
  {
    Graph g;
    Var out = f(g);
    g.backward(out);
  }
  auto eval = [&]() {
    Graph g(false);
    return static_cast<double>(f(g).value().item());
  };
  Rng rng(seed);
  GradCheckReport report;
  for (Tensor* p : params) {
    std::vector<double> analytic(p->size(), 0.0);
    if (p->has_grad()) {
      for (std::size_t i = 0; i < p->size(); ++i) analytic[i] = static_cast<double>(p->grad()[i]);
    }
    std::vector<std::size_t> idx(p->size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (max_entries > 0 && idx.size() > max_entries) {
      rng.shuffle(idx);
      idx.resize(max_entries);
    }
    for (std::size_t i : idx) {
      const Real orig = (*p)[i];
      (*p)[i] = static_cast<Real>(static_cast<double>(orig) + h);
      const double up = eval();
      (*p)[i] = static_cast<Real>(static_cast<double>(orig) - h);
      const double down = eval();
      (*p)[i] = orig;
      compare(analytic[i], (up - down) / (2.0 * h), tol, report);
    }
  }
  return report;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
