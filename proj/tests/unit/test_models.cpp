#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "../common/tiny_model.hpp"
#include "e2eslu/errors.hpp"
#include "e2eslu/harness/models.hpp"

using namespace e2eslu;

namespace {

struct Fixture {
  ModelConfig cfg = tiny::config();
  std::vector<Utterance> utts = tiny::utterances(cfg);
  Batch batch = make_batch(std::span<const Utterance>(utts), cfg.ac.feature_dim,
                           cfg.ac.receptive_field());
};

std::vector<Real> copy_values(Var v) { return {v.value().values().begin(), v.value().values().end()}; }

double grad_norm(ParameterStore& store, const std::string& group) {
  double s = 0;
  for (auto& e : store.entries()) {
    if (e->group != group || !e->tensor.has_grad()) continue;
    for (Real g : e->tensor.grad()) s += static_cast<double>(g) * g;
  }
  return std::sqrt(s);
}

}  // namespace

TEST(Acoustic, ConvLengths) {
  ACConfig c;
  c.vocab_size = 10;
  EXPECT_EQ(c.receptive_field(), 22u);
  EXPECT_EQ(c.output_length(22), 1u);
  EXPECT_EQ(c.output_length(30), 2u);
  EXPECT_EQ(c.output_length(21), 0u);
  ParameterStore store;
  Rng rng(1);
  AcousticModel ac(store, c, rng);
  Graph g(false);
  ForwardContext ctx{g, rng, false, 0};
  EXPECT_EQ(ac.conv_embed(ctx, g.constant(Tensor({1, 30, 64}))).shape(), (Shape{1, 2, 64}));
  EXPECT_THROW(ac.conv_embed(ctx, g.constant(Tensor({1, 21, 64}))), LengthError);
}

TEST(Batch, Layout) {
  Fixture f;
  const auto& b = f.batch;
  EXPECT_EQ(b.size, 2u);
  EXPECT_EQ(b.length, 6u);
  EXPECT_EQ(b.frames, 31u);
  EXPECT_EQ(b.decoder_inputs, (std::vector<int>{kBosId, 4, 5, 6, kPadId, kPadId, kBosId, 7, 8, 9, 10, 4}));
  EXPECT_EQ(b.decoder_targets, (std::vector<int>{4, 5, 6, kEosId, -1, -1, 7, 8, 9, 10, 4, kEosId}));
  EXPECT_EQ(b.slot_targets, (std::vector<int>{0, 1, 1, 0, -1, -1, 2, 0, 3, 3, 0, 0}));
  EXPECT_EQ(b.input_slot_targets, (std::vector<int>{0, 0, 1, 1, -1, -1, 0, 2, 0, 3, 3, 0}));
  EXPECT_EQ(b.step_mask, (std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(b.content_mask, (std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 0}));
  EXPECT_EQ(b.intents, (std::vector<int>{1, 2}));
  // 24 frames -> 1 encoder step, 31 frames -> 2.
  EXPECT_EQ(b.memory_mask(f.cfg.ac), (std::vector<std::uint8_t>{1, 0, 1, 1}));
}

TEST(Batch, ShortUtteranceIsPadded) {
  Fixture f;
  f.utts[0].features.rows = 3;
  f.utts[0].features.data.resize(3 * f.cfg.ac.feature_dim);
  Batch b = make_batch(std::span<const Utterance>(f.utts), f.cfg.ac.feature_dim, f.cfg.ac.receptive_field());
  EXPECT_EQ(b.memory_mask(f.cfg.ac)[0], 1);
}

TEST(Acoustic, DecoderIsCausal) {
  Fixture f;
  ParameterStore store;
  Rng rng(2);
  AcousticModel ac(store, f.cfg.ac, rng);
  auto mem_mask = f.batch.memory_mask(f.cfg.ac);
  auto run = [&](const std::vector<int>& inputs) {
    Graph g(false);
    ForwardContext ctx{g, rng, false, 0};
    Var m = ac.encode(ctx, ac.conv_embed(ctx, g.constant(f.batch.features)), mem_mask);
    return copy_values(ac.decode_teacher_forced(ctx, m, mem_mask, inputs, f.batch.length, f.batch.step_mask));
  };
  auto base = run(f.batch.decoder_inputs);
  auto changed_inputs = f.batch.decoder_inputs;
  changed_inputs[6 + 3] = 5;
  auto changed = run(changed_inputs);
  const std::size_t v = f.cfg.ac.vocab_size;
  for (std::size_t t = 0; t < f.batch.length; ++t) {
    for (std::size_t j = 0; j < v; ++j) {
      const std::size_t i = (f.batch.length + t) * v + j;
      if (t < 3) {
        EXPECT_EQ(base[i], changed[i]) << t;
      }
    }
  }
  double diff = 0;
  for (std::size_t j = 0; j < v; ++j) diff += std::abs(base[(f.batch.length + 3) * v + j] - changed[(f.batch.length + 3) * v + j]);
  EXPECT_GT(diff, 0);
  // Row 0 is untouched by a change in row 1.
  for (std::size_t i = 0; i < f.batch.length * v; ++i) EXPECT_EQ(base[i], changed[i]);
}

TEST(Acoustic, PaddedFramesDoNotLeak) {
  Fixture f;
  ParameterStore store;
  Rng rng(3);
  AcousticModel ac(store, f.cfg.ac, rng);
  auto mem_mask = f.batch.memory_mask(f.cfg.ac);
  auto run = [&](const Tensor& feats) {
    Graph g(false);
    ForwardContext ctx{g, rng, false, 0};
    Var m = ac.encode(ctx, ac.conv_embed(ctx, g.constant(feats)), mem_mask);
    return copy_values(ac.decode_teacher_forced(ctx, m, mem_mask, f.batch.decoder_inputs, f.batch.length,
                                                f.batch.step_mask));
  };
  auto base = run(f.batch.features);
  Tensor noisy = f.batch.features;
  const std::size_t fd = f.cfg.ac.feature_dim;
  for (std::size_t t = 24; t < 31; ++t) {
    for (std::size_t j = 0; j < fd; ++j) noisy[t * fd + j] = 9;
  }
  auto after = run(noisy);
  for (std::size_t i = 0; i < f.batch.length * f.cfg.ac.vocab_size; ++i) EXPECT_NEAR(base[i], after[i], 1e-6);
}

TEST(Acoustic, InitialLossNearUniform) {
  Fixture f;
  AcousticPretrainModel m(f.cfg);
  Graph g(false);
  Rng rng(0);
  ForwardContext ctx{g, rng, false, 0};
  const double loss = m.losses(ctx, f.batch, LossWeights{}).total.value().item();
  EXPECT_NEAR(loss, std::log(static_cast<double>(f.cfg.ac.vocab_size)), 0.5);
}

TEST(Semantic, RequiresFourLayers) {
  SCConfig c;
  c.vocab_size = 10;
  c.intents = 2;
  c.slot_labels = 2;
  c.layers = 3;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Semantic, SlotHeadReadsTopFourLayers) {
  ModelConfig cfg = tiny::config();
  cfg.sc.layers = 6;
  ParameterStore store;
  Rng rng(4);
  SemanticModel sc(store, cfg.sc, rng);
  Graph g(false);
  ForwardContext ctx{g, rng, false, 0};
  Tensor emb({1, 3, cfg.sc.model_dim});
  for (auto& v : emb.values()) v = static_cast<Real>(rng.normal(0, 1));
  auto layers = sc.encode_pieces(ctx, g.constant(emb), std::vector<std::uint8_t>{1, 1, 1});
  ASSERT_EQ(layers.size(), 6u);
  auto base = copy_values(sc.slot_logits(g, layers));
  for (std::size_t l = 0; l < 6; ++l) {
    auto perturbed = layers;
    perturbed[l] = g.constant(Tensor(layers[l].shape(), Real(0.5)));
    auto out = copy_values(sc.slot_logits(g, perturbed));
    double diff = 0;
    for (std::size_t i = 0; i < out.size(); ++i) diff += std::abs(out[i] - base[i]);
    if (l < 2) {
      EXPECT_EQ(diff, 0.0) << l;
    } else {
      EXPECT_GT(diff, 1e-4) << l;
    }
  }
}

TEST(Semantic, PoolingMask) {
  std::vector<int> pieces = {5, 6, kEosId, -1, kEosId, -1};
  std::vector<std::uint8_t> mask = {1, 1, 1, 0, 1, 0};
  EXPECT_EQ(pooling_mask(pieces, mask, 3), (std::vector<std::uint8_t>{1, 1, 0, 0, 1, 0}));
}

TEST(Models, BaselineIsSmaller) {
  auto cfg = tiny::config();
  MultistageModel ms(cfg);
  MultitaskBaseline bl(cfg);
  EXPECT_LT(bl.parameters().scalar_count(), ms.parameters().scalar_count());
}

TEST(Models, VocabMismatchRejected) {
  auto cfg = tiny::config();
  cfg.sc.vocab_size = 12;
  EXPECT_THROW(MultistageModel{cfg}, ConfigError);
}

TEST(Models, TotalIsSumOfParts) {
  Fixture f;
  for (auto kind : {InterfaceKind::kTopK, InterfaceKind::kMatMul, InterfaceKind::kGumbel}) {
    auto cfg = f.cfg;
    cfg.iface.kind = kind;
    MultistageModel m(cfg);
    Graph g;
    Rng rng(5);
    ForwardContext ctx{g, rng, true, 0};
    auto b = breakdown(m.losses(ctx, f.batch, LossWeights{}));
    EXPECT_NEAR(b.l_e2e, b.l_intent + b.l_slot + b.l_asr, 1e-5);
    EXPECT_GT(b.l_intent, 0);
    EXPECT_GT(b.l_slot, 0);
    EXPECT_GT(b.l_asr, 0);
  }
  MultitaskBaseline bl(f.cfg);
  Graph g;
  Rng rng(6);
  ForwardContext ctx{g, rng, true, 0};
  auto b = breakdown(bl.losses(ctx, f.batch, LossWeights{}));
  EXPECT_NEAR(b.l_e2e, b.l_intent + b.l_slot + b.l_asr, 1e-5);
}

TEST(Models, UnderstandingLossReachesConv) {
  Fixture f;
  for (auto kind : {InterfaceKind::kTopK, InterfaceKind::kMatMul, InterfaceKind::kGumbel}) {
    auto cfg = f.cfg;
    cfg.iface.kind = kind;
    MultistageModel m(cfg);
    m.parameters().zero_grad();
    Graph g;
    Rng rng(7);
    ForwardContext ctx{g, rng, true, 0};
    LossWeights w;
    w.asr = 0;
    g.backward(m.losses(ctx, f.batch, w).total);
    EXPECT_GT(grad_norm(m.parameters(), "ac.conv"), 0) << interface_name(kind);
    EXPECT_GT(grad_norm(m.parameters(), "sc.heads"), 0);
  }
}

TEST(Models, PredictShapes) {
  Fixture f;
  WordpieceVocab vocab({"[PAD]", "[UNK]", "[BOS]", "[EOS]", "a", "b", "c", "d", "e", "f", "##g"});
  MultistageModel ms(f.cfg);
  auto p = ms.predict(f.batch, vocab);
  EXPECT_EQ(p.interpretations.size(), 2u);
  EXPECT_EQ(p.pieces.size(), 2u);
  MultitaskBaseline bl(f.cfg);
  EXPECT_EQ(bl.predict(f.batch, vocab).interpretations.size(), 2u);
}

TEST(Models, CopyMatching) {
  auto cfg = tiny::config();
  AcousticPretrainModel ac(cfg);
  MultistageModel ms(cfg);
  const std::size_t copied = copy_matching(ac.parameters(), ms.parameters());
  EXPECT_EQ(copied, ac.parameters().entries().size());
  for (auto& e : ac.parameters().entries()) {
    const Tensor& t = ms.parameters().get(e->name);
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(t[i], e->tensor[i]);
  }
}

TEST(Models, Factory) {
  auto cfg = tiny::config();
  EXPECT_EQ(make_model("multistage", cfg)->kind(), "multistage");
  EXPECT_EQ(make_model("baseline", cfg)->kind(), "baseline");
  EXPECT_EQ(make_model("acoustic", cfg)->kind(), "acoustic");
  EXPECT_THROW(make_model("rnn", cfg), ConfigError);
}
