#include "e2eslu/harness/models.hpp"

#include <algorithm>

#include "e2eslu/errors.hpp"
#include "e2eslu/textproc/labels.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

Var weighted_sum(const LossTerms& t, const LossWeights& w) {
  Var total = w.asr == Real(1) ? t.asr : scale(t.asr, w.asr);
  if (t.intent) total = add(w.intent == Real(1) ? *t.intent : scale(*t.intent, w.intent), total);
  if (t.slot) total = add(total, w.slot == Real(1) ? *t.slot : scale(*t.slot, w.slot));
  return total;
}

struct Encoded {
  Var memory;
  std::vector<std::uint8_t> mask;
};

Encoded run_encoder(const AcousticModel& ac, const ForwardContext& ctx, const Batch& batch) {
  Encoded e;
  e.mask = batch.memory_mask(ac.config());
  Var features = ctx.graph.constant(batch.features);
  e.memory = ac.encode(ctx, ac.conv_embed(ctx, features), e.mask);
  return e;
}

// Emitted ids per decoding step: the pieces, then EOS unless truncated.
std::vector<int> step_ids(const GreedyResult& r, std::size_t b) {
  std::vector<int> ids = r.pieces[b];
  if (!r.truncated[b]) ids.push_back(kEosId);
  return ids;
}

std::vector<int> row_argmax(const Tensor& logits) { return argmax_rows(logits); }

}  // namespace

LossBreakdown breakdown(const LossTerms& t) {
  LossBreakdown b;
  if (t.intent) b.l_intent = static_cast<double>(t.intent->value().item());
  if (t.slot) b.l_slot = static_cast<double>(t.slot->value().item());
  b.l_asr = static_cast<double>(t.asr.value().item());
  b.l_e2e = static_cast<double>(t.total.value().item());
  return b;
}

std::vector<std::uint8_t> pooling_mask(std::span<const int> step_pieces,
                                       std::span<const std::uint8_t> step_mask,
                                       std::size_t length) {
  if (step_pieces.size() != step_mask.size() || length == 0 || step_mask.size() % length != 0) {
    throw ContractError("pooling mask inputs disagree in size");
  }
  std::vector<std::uint8_t> pool(step_mask.size(), 0);
  for (std::size_t row = 0; row < step_mask.size(); row += length) {
    bool any = false;
    for (std::size_t t = row; t < row + length; ++t) {
      if (step_mask[t] && (step_pieces[t] < 0 || step_pieces[t] >= kSpecialCount)) {
        pool[t] = 1;
        any = true;
      }
    }
    if (!any) {
      for (std::size_t t = row; t < row + length; ++t) pool[t] = step_mask[t];
    }
  }
  return pool;
}

Interpretation gold_interpretation(const Utterance& u) {
  Interpretation in;
  in.intent = u.intent;
  std::vector<GoldSlot> slots = u.slots;
  std::stable_sort(slots.begin(), slots.end(),
                   [](const GoldSlot& a, const GoldSlot& b) { return a.start_word < b.start_word; });
  for (auto& s : slots) in.slots.push_back({s.label, s.value});
  return in;
}

std::size_t copy_matching(const ParameterStore& from, ParameterStore& to) {
  std::size_t copied = 0;
  for (auto& entry : to.entries()) {
    if (!from.contains(entry->name)) continue;
    const Tensor& src = from.get(entry->name);
    if (src.shape() != entry->tensor.shape()) {
      throw ConfigError("parameter " + entry->name + " has shape " + shape_string(src.shape()) +
                        " in the source but " + shape_string(entry->tensor.shape()) + " here");
    }
    std::copy(src.values().begin(), src.values().end(), entry->tensor.values().begin());
    ++copied;
  }
  return copied;
}

// ---------------------------------------------------------------------------

AcousticPretrainModel::AcousticPretrainModel(const ModelConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg_.seed);
  ac_ = AcousticModel(store_, cfg_.ac, rng, "ac");
}

LossTerms AcousticPretrainModel::losses(const ForwardContext& ctx, const Batch& batch,
                                        const LossWeights&) const {
  Encoded e = run_encoder(ac_, ctx, batch);
  LossTerms t;
  t.asr_logits = ac_.decode_teacher_forced(ctx, e.memory, e.mask, batch.decoder_inputs,
                                           batch.length, batch.step_mask);
  t.asr = asr_loss(t.asr_logits, batch.decoder_targets);
  t.total = t.asr;
  return t;
}

std::vector<std::string> AcousticPretrainModel::unfreeze_order() const {
  return {"ac.decoder", "ac.encoder", "ac.conv"};
}

GreedyResult AcousticPretrainModel::transcribe(const Batch& batch) const {
  Graph g(false);
  Rng rng(cfg_.seed);
  ForwardContext ctx{g, rng, false, 0};
  Encoded e = run_encoder(ac_, ctx, batch);
  return ac_.decode_greedy(ctx, e.memory, e.mask);
}

// ---------------------------------------------------------------------------

MultistageModel::MultistageModel(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg_.ac.vocab_size != cfg_.sc.vocab_size) {
    throw ConfigError("acoustic vocabulary (" + std::to_string(cfg_.ac.vocab_size) +
                      ") differs from the semantic embedding table (" +
                      std::to_string(cfg_.sc.vocab_size) + ")");
  }
  cfg_.iface.validate(cfg_.ac.vocab_size);
  Rng rng(cfg_.seed);
  ac_ = AcousticModel(store_, cfg_.ac, rng, "ac");
  sc_ = SemanticModel(store_, cfg_.sc, rng, "sc");
}

std::pair<Var, Var> MultistageModel::understand(const ForwardContext& ctx, Var posteriors,
                                                std::span<const std::uint8_t> step_mask,
                                                std::span<const std::uint8_t> pool_mask) const {
  Graph& g = ctx.graph;
  Var table = g.parameter(sc_.embedding_table());
  Var emb = embed_posteriors(posteriors, table, cfg_.iface, ctx.rng, ctx.training);
  std::vector<Var> layers = sc_.encode_pieces(ctx, emb, step_mask);
  return {sc_.intent_logits(g, layers.back(), pool_mask), sc_.slot_logits(g, layers)};
}

LossTerms MultistageModel::losses(const ForwardContext& ctx, const Batch& batch,
                                  const LossWeights& weights) const {
  Encoded e = run_encoder(ac_, ctx, batch);
  LossTerms t;
  t.asr_logits = ac_.decode_teacher_forced(ctx, e.memory, e.mask, batch.decoder_inputs,
                                           batch.length, batch.step_mask);
  t.asr = asr_loss(t.asr_logits, batch.decoder_targets);
  const auto pool = pooling_mask(batch.decoder_targets, batch.step_mask, batch.length);
  auto [intent, slot] = understand(ctx, t.asr_logits, batch.step_mask, pool);
  t.intent = intent_loss(intent, batch.intents);
  t.slot = slot_loss(slot, batch.slot_targets);
  t.total = weighted_sum(t, weights);
  return t;
}

std::vector<std::string> MultistageModel::unfreeze_order() const {
  return {"sc.heads", "sc.encoder", "ac.decoder", "ac.encoder", "ac.conv"};
}

Prediction MultistageModel::predict(const Batch& batch, const WordpieceVocab& vocab) const {
  Graph g(false);
  Rng rng(cfg_.seed);
  ForwardContext ctx{g, rng, false, 0};
  Encoded e = run_encoder(ac_, ctx, batch);
  GreedyResult gr = ac_.decode_greedy(ctx, e.memory, e.mask);
  const std::size_t B = batch.size;
  const std::size_t V = cfg_.ac.vocab_size;
  std::size_t L = 1;
  for (const auto& p : gr.posteriors) L = std::max(L, p.dim(0));
  Tensor post(Shape{B, L, V});
  std::vector<std::uint8_t> step_mask(B * L, 0);
  std::vector<int> pieces(B * L, kPadId);
  std::vector<std::vector<int>> ids(B);
  for (std::size_t b = 0; b < B; ++b) {
    ids[b] = step_ids(gr, b);
    const Tensor& p = gr.posteriors[b];
    std::copy(p.values().begin(), p.values().end(), post.data() + b * L * V);
    for (std::size_t t = 0; t < ids[b].size(); ++t) {
      step_mask[b * L + t] = 1;
      pieces[b * L + t] = ids[b][t];
    }
  }
  const auto pool = pooling_mask(pieces, step_mask, L);
  auto [intent, slot] = understand(ctx, g.constant(std::move(post)), step_mask, pool);
  const std::vector<int> intents = row_argmax(intent.value());
  const std::vector<int> labels = row_argmax(slot.value());
  Prediction pred;
  for (std::size_t b = 0; b < B; ++b) {
    std::span<const int> lab(labels.data() + b * L, ids[b].size());
    pred.interpretations.push_back(assemble_interpretation(ids[b], lab, intents[b], vocab));
    pred.pieces.push_back(gr.pieces[b]);
    if (gr.truncated[b]) ++pred.truncations;
  }
  return pred;
}

Prediction MultistageModel::predict_from_transcripts(const Batch& batch,
                                                     const WordpieceVocab& vocab) const {
  constexpr Real kPeak = 50;
  Graph g(false);
  Rng rng(cfg_.seed);
  ForwardContext ctx{g, rng, false, 0};
  const std::size_t B = batch.size;
  const std::size_t L = batch.length;
  const std::size_t V = cfg_.ac.vocab_size;
  Tensor post(Shape{B, L, V});
  std::vector<int> pieces(B * L, kPadId);
  for (std::size_t i = 0; i < B * L; ++i) {
    if (!batch.step_mask[i]) continue;
    pieces[i] = batch.decoder_targets[i];
    post[i * V + static_cast<std::size_t>(pieces[i])] = kPeak;
  }
  const auto pool = pooling_mask(pieces, batch.step_mask, L);
  auto [intent, slot] = understand(ctx, g.constant(std::move(post)), batch.step_mask, pool);
  const std::vector<int> intents = row_argmax(intent.value());
  const std::vector<int> labels = row_argmax(slot.value());
  Prediction pred;
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = batch.piece_counts[b];
    std::vector<int> ids(pieces.begin() + static_cast<long>(b * L),
                         pieces.begin() + static_cast<long>(b * L + n + 1));
    std::span<const int> lab(labels.data() + b * L, n + 1);
    pred.interpretations.push_back(assemble_interpretation(ids, lab, intents[b], vocab));
    pred.pieces.emplace_back(ids.begin(), ids.begin() + static_cast<long>(n));
  }
  return pred;
}

// ---------------------------------------------------------------------------

MultitaskBaseline::MultitaskBaseline(const ModelConfig& cfg) : cfg_(cfg) {
  Rng rng(cfg_.seed);
  ac_ = AcousticModel(store_, cfg_.ac, rng, "ac");
  const std::size_t d = cfg_.ac.model_dim;
  intent_head_ = Linear::create(store_, "baseline.intent", d, cfg_.sc.intents, rng, "baseline.heads");
  slot_head_ = Linear::create(store_, "baseline.slot", d, cfg_.sc.slot_labels, rng, "baseline.heads");
}

LossTerms MultitaskBaseline::losses(const ForwardContext& ctx, const Batch& batch,
                                    const LossWeights& weights) const {
  Graph& g = ctx.graph;
  Encoded e = run_encoder(ac_, ctx, batch);
  Var hidden = ac_.decode_hidden(ctx, e.memory, e.mask, batch.decoder_inputs, batch.length,
                                 batch.step_mask);
  LossTerms t;
  t.asr_logits = ac_.project(g, hidden);
  t.asr = asr_loss(t.asr_logits, batch.decoder_targets);
  t.slot = slot_loss(slot_head_(g, hidden), batch.input_slot_targets);
  t.intent = intent_loss(intent_head_(g, masked_mean(e.memory, e.mask)), batch.intents);
  t.total = weighted_sum(t, weights);
  return t;
}

std::vector<std::string> MultitaskBaseline::unfreeze_order() const {
  return {"baseline.heads", "ac.decoder", "ac.encoder", "ac.conv"};
}

Prediction MultitaskBaseline::predict(const Batch& batch, const WordpieceVocab& vocab) const {
  Graph g(false);
  Rng rng(cfg_.seed);
  ForwardContext ctx{g, rng, false, 0};
  Encoded e = run_encoder(ac_, ctx, batch);
  GreedyResult gr = ac_.decode_greedy(ctx, e.memory, e.mask);
  const std::size_t B = batch.size;
  std::size_t L = 1;
  for (const auto& p : gr.pieces) L = std::max(L, p.size() + 1);
  std::vector<int> inputs(B * L, kPadId);
  std::vector<std::uint8_t> mask(B * L, 0);
  for (std::size_t b = 0; b < B; ++b) {
    inputs[b * L] = kBosId;
    mask[b * L] = 1;
    for (std::size_t t = 0; t < gr.pieces[b].size(); ++t) {
      inputs[b * L + t + 1] = gr.pieces[b][t];
      mask[b * L + t + 1] = 1;
    }
  }
  Var hidden = ac_.decode_hidden(ctx, e.memory, e.mask, inputs, L, mask);
  const std::vector<int> labels = row_argmax(slot_head_(g, hidden).value());
  const std::vector<int> intents =
      row_argmax(intent_head_(g, masked_mean(e.memory, e.mask)).value());
  Prediction pred;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& p = gr.pieces[b];
    std::span<const int> lab(labels.data() + b * L + 1, p.size());
    pred.interpretations.push_back(assemble_interpretation(p, lab, intents[b], vocab));
    pred.pieces.push_back(p);
    if (gr.truncated[b]) ++pred.truncations;
  }
  return pred;
}

std::unique_ptr<Trainable> make_model(const std::string& kind, const ModelConfig& cfg) {
  if (kind == "multistage") return std::make_unique<MultistageModel>(cfg);
  if (kind == "baseline") return std::make_unique<MultitaskBaseline>(cfg);
  if (kind == "acoustic") return std::make_unique<AcousticPretrainModel>(cfg);
  throw ConfigError("unknown model kind '" + kind + "'");
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
