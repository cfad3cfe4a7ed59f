#include "e2eslu/diffengine/layers.hpp"

#include <cmath>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out, Rng& rng, const std::string& group, bool with_bias) {
  Linear l;
  l.weight = &store.add(name + ".weight", Shape{in, out}, Init::kXavierUniform, rng, group);
  if (with_bias) l.bias = &store.add(name + ".bias", Shape{out}, Init::kZeros, rng, group);
  return l;
}

Var Linear::operator()(Graph& g, Var x) const {
  Var y = matmul(x, g.parameter(*weight));
  return bias ? add(y, g.parameter(*bias)) : y;
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, std::size_t dim,
                            Rng& rng, const std::string& group) {
  LayerNorm n;
  n.gain = &store.add(name + ".gain", Shape{dim}, Init::kOnes, rng, group);
  n.bias = &store.add(name + ".bias", Shape{dim}, Init::kZeros, rng, group);
  return n;
}

Var LayerNorm::operator()(Graph& g, Var x) const {
  return layer_norm(x, g.parameter(*gain), g.parameter(*bias));
}

MultiHeadAttention MultiHeadAttention::create(ParameterStore& store, const std::string& name,
                                              std::size_t dim, std::size_t heads, Rng& rng,
                                              const std::string& group) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("model dim " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  MultiHeadAttention a;
  a.query = Linear::create(store, name + ".query", dim, dim, rng, group);
  a.key = Linear::create(store, name + ".key", dim, dim, rng, group);
  a.value = Linear::create(store, name + ".value", dim, dim, rng, group);
  a.output = Linear::create(store, name + ".output", dim, dim, rng, group);
  a.heads = heads;
  return a;
}

Var MultiHeadAttention::operator()(Graph& g, Var xq, Var xkv,
                                   std::span<const std::uint8_t> key_mask, bool causal) const {
  Var q = query(g, xq);
  Var k = key(g, xkv);
  Var v = value(g, xkv);
  return output(g, attention(q, k, v, heads, key_mask, causal));
}

FeedForward FeedForward::create(ParameterStore& store, const std::string& name, std::size_t dim,
                                std::size_t hidden, Rng& rng, const std::string& group) {
  FeedForward f;
  f.in = Linear::create(store, name + ".in", dim, hidden, rng, group);
  f.out = Linear::create(store, name + ".out", hidden, dim, rng, group);
  return f;
}

Var FeedForward::operator()(const ForwardContext& ctx, Var x) const {
  return out(ctx.graph, ctx.drop(relu(in(ctx.graph, x))));
}

EncoderLayer EncoderLayer::create(ParameterStore& store, const std::string& name, std::size_t dim,
                                  std::size_t heads, std::size_t hidden, Rng& rng,
                                  const std::string& group) {
  EncoderLayer l;
  l.norm_attn = LayerNorm::create(store, name + ".norm_attn", dim, rng, group);
  l.self_attn = MultiHeadAttention::create(store, name + ".self_attn", dim, heads, rng, group);
  l.norm_ff = LayerNorm::create(store, name + ".norm_ff", dim, rng, group);
  l.ff = FeedForward::create(store, name + ".ff", dim, hidden, rng, group);
  return l;
}

Var EncoderLayer::operator()(const ForwardContext& ctx, Var x,
                             std::span<const std::uint8_t> mask) const {
  Graph& g = ctx.graph;
  Var h = norm_attn(g, x);
  x = add(x, ctx.drop(self_attn(g, h, h, mask, false)));
  return add(x, ctx.drop(ff(ctx, norm_ff(g, x))));
}

DecoderLayer DecoderLayer::create(ParameterStore& store, const std::string& name, std::size_t dim,
                                  std::size_t heads, std::size_t hidden, Rng& rng,
                                  const std::string& group) {
  DecoderLayer l;
  l.norm_self = LayerNorm::create(store, name + ".norm_self", dim, rng, group);
  l.self_attn = MultiHeadAttention::create(store, name + ".self_attn", dim, heads, rng, group);
  l.norm_cross = LayerNorm::create(store, name + ".norm_cross", dim, rng, group);
  l.cross_attn = MultiHeadAttention::create(store, name + ".cross_attn", dim, heads, rng, group);
  l.norm_ff = LayerNorm::create(store, name + ".norm_ff", dim, rng, group);
  l.ff = FeedForward::create(store, name + ".ff", dim, hidden, rng, group);
  return l;
}

Var DecoderLayer::operator()(const ForwardContext& ctx, Var x,
                             std::span<const std::uint8_t> self_mask, Var memory,
                             std::span<const std::uint8_t> memory_mask) const {
  Graph& g = ctx.graph;
  Var h = norm_self(g, x);
  x = add(x, ctx.drop(self_attn(g, h, h, self_mask, true)));
  h = norm_cross(g, x);
  x = add(x, ctx.drop(cross_attn(g, h, memory, memory_mask, false)));
  return add(x, ctx.drop(ff(ctx, norm_ff(g, x))));
}

Tensor sinusoidal_positions(std::size_t length, std::size_t dim) {
  Tensor pe(Shape{length, dim});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim));
      pe[pos * dim + i] = static_cast<Real>(std::sin(angle));
      if (i + 1 < dim) pe[pos * dim + i + 1] = static_cast<Real>(std::cos(angle));
    }
  }
  return pe;
}

Var add_positions(Graph& g, Var x, Real scale_by) {
  const Shape& s = x.shape();
  const std::size_t length = s[s.size() - 2];
  const std::size_t dim = s.back();
  if (scale_by != Real(1)) x = scale(x, scale_by);
  return add(x, g.constant(sinusoidal_positions(length, dim)));
}

Var add_positions(Graph& g, Var x) {
  return add_positions(g, x, static_cast<Real>(std::sqrt(static_cast<double>(x.shape().back()))));
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
