#include "e2eslu/semantic/semantic.hpp"

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

void SCConfig::validate() const {
  if (layers < kSlotHeadLayers) {
    throw ConfigError("semantic encoder needs at least " + std::to_string(kSlotHeadLayers) +
                      " layers, got " + std::to_string(layers));
  }
  if (model_dim == 0 || ff_dim == 0) throw ConfigError("semantic dimensions must be positive");
  if (heads == 0 || model_dim % heads != 0) {
    throw ConfigError("semantic model dim " + std::to_string(model_dim) +
                      " not divisible by heads " + std::to_string(heads));
  }
  if (vocab_size == 0 || intents == 0 || slot_labels == 0) {
    throw ConfigError("semantic vocab, intent and slot label counts must be positive");
  }
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must lie in [0, 1)");
}

SemanticModel::SemanticModel(ParameterStore& store, const SCConfig& cfg, Rng& rng,
                             const std::string& prefix)
    : cfg_(cfg) {
  cfg_.validate();
  const std::string enc = prefix + ".encoder";
  embedding_ = &store.add(prefix + ".embedding", Shape{cfg_.vocab_size, cfg_.model_dim},
                          Init::kEmbeddingNormal, rng, enc);
  for (std::size_t i = 0; i < cfg_.layers; ++i) {
    layers_.push_back(EncoderLayer::create(store, prefix + ".layer" + std::to_string(i),
                                           cfg_.model_dim, cfg_.heads, cfg_.ff_dim, rng, enc));
  }
  const std::string heads = prefix + ".heads";
  intent_norm_ = LayerNorm::create(store, prefix + ".intent_norm", cfg_.model_dim, rng, heads);
  intent_head_ = Linear::create(store, prefix + ".intent", cfg_.model_dim, cfg_.intents, rng, heads);
  slot_head_ = Linear::create(store, prefix + ".slot", kSlotHeadLayers * cfg_.model_dim,
                              cfg_.slot_labels, rng, heads);
}

std::vector<Var> SemanticModel::encode_pieces(const ForwardContext& ctx, Var embeddings,
                                              std::span<const std::uint8_t> mask) const {
  const Shape& s = embeddings.shape();
  if (s.size() != 3 || s[2] != cfg_.model_dim) {
    throw DimensionError("semantic encoder expects [B, L, " + std::to_string(cfg_.model_dim) +
                         "], got " + shape_string(s));
  }
  Var x = ctx.drop(add_positions(ctx.graph, embeddings));
  std::vector<Var> outs;
  outs.reserve(layers_.size());
  for (const auto& layer : layers_) {
    x = layer(ctx, x, mask);
    outs.push_back(x);
  }
  return outs;
}

Var SemanticModel::intent_logits(Graph& g, Var final_layer,
                                 std::span<const std::uint8_t> pool_mask) const {
  return intent_head_(g, masked_mean(intent_norm_(g, final_layer), pool_mask));
}

Var SemanticModel::slot_logits(Graph& g, std::span<const Var> layers) const {
  if (layers.size() < kSlotHeadLayers) {
    throw ConfigError("slot head needs " + std::to_string(kSlotHeadLayers) + " layer outputs");
  }
  return slot_head_(g, concat(layers.subspan(layers.size() - kSlotHeadLayers)));
}

Var slot_loss(Var slot_logits, std::span<const int> targets) {
  const Shape& s = slot_logits.shape();
  if (s.size() < 2 || numel(s) / s.back() != targets.size()) {
    throw ContractError("slot loss: " + std::to_string(targets.size()) +
                        " targets for logits " + shape_string(s));
  }
  return cross_entropy(slot_logits, targets, -1);
}

Var intent_loss(Var intent_logits, std::span<const int> intents) {
  const Shape& s = intent_logits.shape();
  if (s.size() != 2 || s[0] != intents.size()) {
    throw ContractError("intent loss: " + std::to_string(intents.size()) +
                        " targets for logits " + shape_string(s));
  }
  return cross_entropy(intent_logits, intents, -1);
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
