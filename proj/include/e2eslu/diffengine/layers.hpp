#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "e2eslu/diffengine/ops.hpp"
#include "e2eslu/diffengine/parameters.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

/// Per-forward state shared by all layers: the tape, the RNG used for
/// dropout and sampling, and whether the pass is a training pass.
struct ForwardContext {
  Graph& graph;
  Rng& rng;
  bool training = false;
  Real dropout = 0;

  Var drop(Var x) const { return training ? dropout_if(x) : x; }

 private:
  Var dropout_if(Var x) const { return e2eslu::dropout(x, dropout, rng); }
};

struct Linear {
  Tensor* weight = nullptr;  // [in, out]
  Tensor* bias = nullptr;    // [out], may be null

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in,
                       std::size_t out, Rng& rng, const std::string& group, bool with_bias = true);
  Var operator()(Graph& g, Var x) const;
};

struct LayerNorm {
  Tensor* gain = nullptr;
  Tensor* bias = nullptr;

  static LayerNorm create(ParameterStore& store, const std::string& name, std::size_t dim,
                          Rng& rng, const std::string& group);
  Var operator()(Graph& g, Var x) const;
};

struct MultiHeadAttention {
  Linear query, key, value, output;
  std::size_t heads = 1;

  static MultiHeadAttention create(ParameterStore& store, const std::string& name, std::size_t dim,
                                   std::size_t heads, Rng& rng, const std::string& group);
  Var operator()(Graph& g, Var xq, Var xkv, std::span<const std::uint8_t> key_mask,
                 bool causal) const;
};

struct FeedForward {
  Linear in, out;

  static FeedForward create(ParameterStore& store, const std::string& name, std::size_t dim,
                            std::size_t hidden, Rng& rng, const std::string& group);
  Var operator()(const ForwardContext& ctx, Var x) const;
};

// Pre-norm encoder block: x + Attn(LN(x)), then x + FF(LN(x)).
struct EncoderLayer {
  LayerNorm norm_attn, norm_ff;
  MultiHeadAttention self_attn;
  FeedForward ff;

  static EncoderLayer create(ParameterStore& store, const std::string& name, std::size_t dim,
                             std::size_t heads, std::size_t hidden, Rng& rng,
                             const std::string& group);
  Var operator()(const ForwardContext& ctx, Var x, std::span<const std::uint8_t> mask) const;
};

// Pre-norm decoder block with causal self-attention and cross-attention.
struct DecoderLayer {
  LayerNorm norm_self, norm_cross, norm_ff;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;

  static DecoderLayer create(ParameterStore& store, const std::string& name, std::size_t dim,
                             std::size_t heads, std::size_t hidden, Rng& rng,
                             const std::string& group);
  Var operator()(const ForwardContext& ctx, Var x, std::span<const std::uint8_t> self_mask,
                 Var memory, std::span<const std::uint8_t> memory_mask) const;
};

// Sinusoidal position table [length, dim].
Tensor sinusoidal_positions(std::size_t length, std::size_t dim);

// Adds sinusoidal positions to x [..., L, d] after scaling it by `scale_by`
// (sqrt(d) for the two-argument form).
Var add_positions(Graph& g, Var x, Real scale_by);
Var add_positions(Graph& g, Var x);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
