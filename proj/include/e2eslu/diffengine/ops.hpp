#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2eslu/diffengine/graph.hpp"
#include "e2eslu/diffengine/rng.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

// Elementwise arithmetic. `b` may either match `a` exactly or match a trailing
// suffix of a's shape, in which case it is broadcast over the leading axes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real factor);
Var relu(Var a);

// a: [..., k], b: [k, n] -> [..., n]. Leading axes of `a` are flattened into rows.
Var matmul(Var a, Var b);

Var softmax(Var x, int axis = -1);

// Mean over rows whose target is not `ignore_index` of -log softmax(logits)[target].
// `logits` is [..., C] and `targets` holds one class per row. Returns 0 with a
// zero gradient when every row is ignored.
Var cross_entropy(Var logits, std::span<const int> targets, int ignore_index = -1);

Var layer_norm(Var x, Var gain, Var bias, Real eps = Real(1e-5));

// Row gather table[ids] -> [ids.size(), d]; backward scatter-adds.
Var embedding_rows(Var table, std::span<const int> ids);

// x: [T, C_in] or [B, T, C_in]; kernel: [K, C_in, C_out]; no padding.
// Output length floor((T - K) / stride) + 1.
Var conv1d(Var x, Var kernel, std::size_t stride);
std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride);

// Concatenation along the last axis; all inputs share their leading shape.
Var concat(std::span<const Var> parts);
Var mean_axis(Var x, int axis);
// Swaps the last two axes.
Var transpose(Var x);
Var slice(Var x, int axis, std::size_t begin, std::size_t end);
// Elements whose mask byte is nonzero are replaced by `fill` and receive no gradient.
Var masked_fill(Var x, std::span<const std::uint8_t> mask, Real fill);
Var reshape(Var x, Shape shape);
Var sum(Var x);
Var mean(Var x);

// x: [B, L, d], mask: [B, L] (nonzero = keep) -> [B, d] mean over kept steps.
Var masked_mean(Var x, std::span<const std::uint8_t> mask);

// Multi-head scaled dot-product attention with the head split along the model
// dimension. q: [B, Lq, d], k and v: [B, Lk, d]. `key_mask` is [B, Lk] with
// nonzero for attendable keys (empty means all). With `causal`, query i only
// sees keys j <= i.
Var attention(Var q, Var k, Var v, std::size_t heads, std::span<const std::uint8_t> key_mask,
              bool causal);

// Inverted dropout; identity when p == 0.
Var dropout(Var x, Real p, Rng& rng);

// x: [n, V], idx: n*k column indices -> [n, k].
Var gather_cols(Var x, std::span<const int> idx, std::size_t k);

// out[i] = sum_j weights[i, j] * table[ids[i * k + j]]; weights: [n, k].
Var mix_rows(Var table, std::span<const int> ids, Var weights);

// Forward value is `hard`; the gradient passes unchanged to `soft`.
Var straight_through(Var soft, Tensor hard);

// Index of the largest element in each row of a [..., n] tensor (ties -> lowest index).
std::vector<int> argmax_rows(const Tensor& x);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
