#include "e2eslu/interface/embedders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

struct Flat {
  Var x;
  Shape out_shape;
};

// Flattens [..., V] to [n, V] and records the output shape [..., d].
Flat flatten(Var logits, Var table) {
  const Shape& s = logits.shape();
  const Shape& t = table.shape();
  if (s.empty() || t.size() != 2 || s.back() != t[0]) {
    throw DimensionError("posterior " + shape_string(s) + " does not match table " +
                         shape_string(t));
  }
  Shape out(s.begin(), s.end() - 1);
  out.push_back(t[1]);
  const std::size_t n = numel(s) / s.back();
  return {s.size() == 2 ? logits : reshape(logits, Shape{n, s.back()}), std::move(out)};
}

Var restore(Var y, const Shape& shape) { return y.shape() == shape ? y : reshape(y, shape); }

}  // namespace

InterfaceKind parse_interface(std::string_view name) {
  if (name == "topk") return InterfaceKind::kTopK;
  if (name == "matmul") return InterfaceKind::kMatMul;
  if (name == "gumbel") return InterfaceKind::kGumbel;
  throw ConfigError("unknown interface '" + std::string(name) + "' (topk, matmul, gumbel)");
}

std::string interface_name(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::kTopK: return "topk";
    case InterfaceKind::kMatMul: return "matmul";
    case InterfaceKind::kGumbel: return "gumbel";
  }
  return "?";
}

void InterfaceConfig::validate(std::size_t vocab_size) const {
  if (kind == InterfaceKind::kTopK && (k < 1 || k > vocab_size)) {
    throw ConfigError("top-k size " + std::to_string(k) + " outside [1, " +
                      std::to_string(vocab_size) + "]");
  }
  if (!(tau > 0)) throw ConfigError("Gumbel temperature must be positive");
}

Var topk_embed(Var logits, Var table, std::size_t k) {
  auto [x, out_shape] = flatten(logits, table);
  const std::size_t v = x.shape()[1];
  if (k < 1 || k > v) {
    throw ConfigError("top-k size " + std::to_string(k) + " outside [1, " + std::to_string(v) + "]");
  }
  const std::size_t n = x.shape()[0];
  const Real* data = x.value().data();
  std::vector<int> order(v);
  std::vector<int> ids(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    const Real* row = data + r * v;
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [row](int a, int b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
    std::copy_n(order.begin(), k, ids.begin() + static_cast<std::ptrdiff_t>(r * k));
  }
  Var weights = softmax(gather_cols(x, ids, k), -1);
  return restore(mix_rows(table, ids, weights), out_shape);
}

Var matmul_embed(Var logits, Var table) {
  auto [x, out_shape] = flatten(logits, table);
  return restore(matmul(softmax(x, -1), table), out_shape);
}

Var gumbel_embed(Var logits, Var table, Real tau, bool straight_through, Rng& rng,
                 const Tensor* uniform) {
  if (!(tau > 0)) throw ConfigError("Gumbel temperature must be positive");
  auto [x, out_shape] = flatten(logits, table);
  Graph& g = *x.graph;
  const std::size_t total = x.size();
  if (uniform && uniform->size() != total) {
    throw DimensionError("uniform noise " + shape_string(uniform->shape()) +
                         " does not match posterior " + shape_string(logits.shape()));
  }
  Tensor noise(x.shape());
  for (std::size_t i = 0; i < total; ++i) {
    const double u = uniform ? static_cast<double>((*uniform)[i]) : rng.uniform_open();
    noise[i] = static_cast<Real>(-std::log(-std::log(u)));
  }
  Var y = softmax(scale(add(x, g.constant(std::move(noise))), Real(1) / tau), -1);
  if (straight_through) {
    const std::vector<int> best = argmax_rows(y.value());
    const std::size_t v = x.shape()[1];
    Tensor hard(x.shape());
    for (std::size_t r = 0; r < best.size(); ++r) hard[r * v + static_cast<std::size_t>(best[r])] = 1;
    y = e2eslu::straight_through(y, std::move(hard));
  }
  return restore(matmul(y, table), out_shape);
}

Var argmax_embed(Var logits, Var table) {
  auto [x, out_shape] = flatten(logits, table);
  return restore(embedding_rows(table, argmax_rows(x.value())), out_shape);
}

Var embed_posteriors(Var logits, Var table, const InterfaceConfig& cfg, Rng& rng, bool training) {
  switch (cfg.kind) {
    case InterfaceKind::kTopK: return topk_embed(logits, table, cfg.k);
    case InterfaceKind::kMatMul: return matmul_embed(logits, table);
    case InterfaceKind::kGumbel:
      if (!training) return argmax_embed(logits, table);
      return gumbel_embed(logits, table, cfg.tau, cfg.straight_through, rng);
  }
  throw ConfigError("unknown interface kind");
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
