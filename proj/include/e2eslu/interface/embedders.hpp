#pragma once

#include <string>
#include <string_view>

#include "e2eslu/diffengine/ops.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

enum class InterfaceKind { kTopK, kMatMul, kGumbel };

InterfaceKind parse_interface(std::string_view name);
std::string interface_name(InterfaceKind kind);

struct InterfaceConfig {
  InterfaceKind kind = InterfaceKind::kGumbel;
  std::size_t k = 20;
  Real tau = 1;
  bool straight_through = true;

  void validate(std::size_t vocab_size) const;
};

// All embedders map posterior logits [..., V] and a table [V, d] to [..., d].

/// Softmax over the k largest logits of each row (ties to the lower id),
/// mixing the matching table rows.
Var topk_embed(Var logits, Var table, std::size_t k);

/// softmax(logits) * table.
Var matmul_embed(Var logits, Var table);

/// Gumbel-softmax selection with temperature `tau`. With `straight_through`
/// the forward value is the table row of argmax of the perturbed softmax and
/// the gradient follows the soft weights. `uniform`, when given, replaces the
/// U(0,1) draws (same shape as logits).
Var gumbel_embed(Var logits, Var table, Real tau, bool straight_through, Rng& rng,
                 const Tensor* uniform = nullptr);

/// Table row of each row's argmax. Blocks the gradient to `logits`.
Var argmax_embed(Var logits, Var table);

/// Dispatches on the configured interface. Outside training the Gumbel
/// interface decodes deterministically through argmax_embed.
Var embed_posteriors(Var logits, Var table, const InterfaceConfig& cfg, Rng& rng, bool training);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
