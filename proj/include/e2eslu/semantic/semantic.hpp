#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "e2eslu/diffengine/layers.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

inline constexpr std::size_t kSlotHeadLayers = 4;

struct SCConfig {
  std::size_t model_dim = 64;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  Real dropout = Real(0.1);
  std::size_t vocab_size = 0;
  std::size_t intents = 0;
  std::size_t slot_labels = 0;

  void validate() const;
};

/// Wordpiece encoder with intent and slot heads. The input embedding table is
/// the one the interface mixes from.
class SemanticModel {
 public:
  SemanticModel() = default;
  SemanticModel(ParameterStore& store, const SCConfig& cfg, Rng& rng,
                const std::string& prefix = "sc");

  const SCConfig& config() const { return cfg_; }
  Tensor& embedding_table() const { return *embedding_; }

  // embeddings: [B, L, d]; mask [B, L] marks non-pad steps. Returns every
  // layer's output in order.
  std::vector<Var> encode_pieces(const ForwardContext& ctx, Var embeddings,
                                 std::span<const std::uint8_t> mask) const;
  // Mean of the normalized final layer over `pool_mask` steps, then linear -> [B, N_IC].
  Var intent_logits(Graph& g, Var final_layer, std::span<const std::uint8_t> pool_mask) const;
  // Concatenation of the top four layer outputs, then linear -> [B, L, N_SL].
  Var slot_logits(Graph& g, std::span<const Var> layers) const;

 private:
  SCConfig cfg_;
  Tensor* embedding_ = nullptr;
  std::vector<EncoderLayer> layers_;
  LayerNorm intent_norm_;
  Linear intent_head_;
  Linear slot_head_;
};

/// Cross entropy over slot logits [B, L, N_SL] against targets [B*L] (-1 ignored).
Var slot_loss(Var slot_logits, std::span<const int> targets);
/// Cross entropy over intent logits [B, N_IC] against one intent per row.
Var intent_loss(Var intent_logits, std::span<const int> intents);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
