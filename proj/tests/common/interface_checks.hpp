#pragma once

// Property checks shared by the interface unit tests and acceptance run.

#include <algorithm>
#include <cmath>
#include <vector>

#include "e2eslu/diffengine/ops.hpp"
#include "e2eslu/interface/embedders.hpp"

namespace iface_checks {

using namespace e2eslu;

inline Tensor random_tensor(Shape s, Rng& rng, double sd = 1.0) {
  Tensor t(std::move(s));
  for (auto& v : t.values()) v = static_cast<Real>(rng.normal(0, sd));
  return t;
}

// Largest |topk(k = V) - matmul| over random instances.
inline double topk_full_vs_matmul(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0;
  for (int i = 0; i < instances; ++i) {
    const std::size_t v = 2 + rng.below(40), d = 1 + rng.below(16), n = 1 + rng.below(6);
    Tensor logits = random_tensor({n, v}, rng, 3.0);
    Tensor table = random_tensor({v, d}, rng);
    Graph g(false);
    Var a = topk_embed(g.constant(logits), g.constant(table), v);
    Var b = matmul_embed(g.constant(logits), g.constant(table));
    for (std::size_t j = 0; j < a.size(); ++j) {
      worst = std::max(worst, std::abs(static_cast<double>(a.value()[j]) - b.value()[j]));
    }
  }
  return worst;
}

// Frobenius norm of d(loss)/d(logits) through the given interface.
inline double logits_grad_norm(InterfaceKind kind, bool argmax, std::uint64_t seed) {
  Rng rng(seed);
  Tensor logits = random_tensor({3, 12}, rng);
  Tensor table = random_tensor({12, 5}, rng);
  Tensor weights = random_tensor({3, 5}, rng);
  Graph g;
  Var l = g.variable(logits);
  Var t = g.constant(table);
  Var e;
  if (argmax) {
    e = argmax_embed(l, t);
  } else {
    InterfaceConfig cfg;
    cfg.kind = kind;
    cfg.k = 4;
    e = embed_posteriors(l, t, cfg, rng, true);
  }
  g.backward(sum(mul(e, g.constant(weights))));
  double s = 0;
  for (Real v : g.grad(l)) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

// Total variation between straight-through Gumbel selection frequencies and
// softmax(logits). The selected index does not depend on tau.
inline double gumbel_tv(std::size_t v, int draws, double tau, std::uint64_t seed) {
  Rng rng(seed);
  Tensor logits = random_tensor({v}, rng);
  Tensor eye({v, v});
  for (std::size_t i = 0; i < v; ++i) eye[i * v + i] = 1;
  std::vector<double> counts(v, 0.0);
  Graph g(false);
  Var l = g.constant(logits);
  Var t = g.constant(eye);
  for (int i = 0; i < draws; ++i) {
    Var e = gumbel_embed(l, t, static_cast<Real>(tau), true, rng);
    for (std::size_t j = 0; j < v; ++j) counts[j] += e.value()[j];
  }
  double mx = -1e300;
  for (Real x : logits.values()) mx = std::max(mx, static_cast<double>(x));
  std::vector<double> p(v);
  double z = 0;
  for (std::size_t j = 0; j < v; ++j) z += p[j] = std::exp(logits[j] - mx);
  double tv = 0;
  for (std::size_t j = 0; j < v; ++j) tv += std::abs(counts[j] / draws - p[j] / z);
  return 0.5 * tv;
}

}  // namespace iface_checks
