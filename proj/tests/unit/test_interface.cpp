#include <gtest/gtest.h>

#include <cmath>

#include "../common/interface_checks.hpp"
#include "e2eslu/errors.hpp"

using namespace e2eslu;

namespace {

Tensor table3x2() { return Tensor({3, 2}, {1, 0, 0, 1, 2, 2}); }

}  // namespace

TEST(Interface, Names) {
  EXPECT_EQ(parse_interface("topk"), InterfaceKind::kTopK);
  EXPECT_EQ(parse_interface("matmul"), InterfaceKind::kMatMul);
  EXPECT_EQ(parse_interface("gumbel"), InterfaceKind::kGumbel);
  EXPECT_EQ(interface_name(InterfaceKind::kGumbel), "gumbel");
  EXPECT_THROW(parse_interface("argmax"), ConfigError);
}

TEST(Interface, ConfigValidation) {
  InterfaceConfig c;
  c.kind = InterfaceKind::kTopK;
  c.k = 0;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.k = 11;
  EXPECT_THROW(c.validate(10), ConfigError);
  c.k = 10;
  EXPECT_NO_THROW(c.validate(10));
  c.kind = InterfaceKind::kGumbel;
  c.tau = 0;
  EXPECT_THROW(c.validate(10), ConfigError);
}

TEST(Interface, MatMulExample) {
  Graph g(false);
  Var e = matmul_embed(g.constant(Tensor({1, 3}, {0, 0, 0})), g.constant(table3x2()));
  EXPECT_NEAR(e.value()[0], 1.0, 1e-6);
  EXPECT_NEAR(e.value()[1], 1.0, 1e-6);
}

TEST(Interface, TopKExample) {
  // k=2 keeps logits 2 and 1 (ids 2 and 0): weights e/(1+e) and 1/(1+e).
  Graph g(false);
  Var e = topk_embed(g.constant(Tensor({1, 3}, {1, 0, 2})), g.constant(table3x2()), 2);
  const double w2 = std::exp(1.0) / (1 + std::exp(1.0));
  EXPECT_NEAR(e.value()[0], (1 - w2) * 1 + w2 * 2, 1e-6);
  EXPECT_NEAR(e.value()[1], w2 * 2, 1e-6);
}

TEST(Interface, TopKTiesPreferLowerId) {
  Graph g(false);
  Var e = topk_embed(g.constant(Tensor({1, 3}, {5, 5, 5})), g.constant(table3x2()), 1);
  EXPECT_NEAR(e.value()[0], 1.0, 1e-6);
  EXPECT_NEAR(e.value()[1], 0.0, 1e-6);
}

TEST(Interface, TopKFullEqualsMatMul) { EXPECT_LT(iface_checks::topk_full_vs_matmul(100, 3), 1e-6); }

TEST(Interface, GumbelZeroNoiseIsTemperedSoftmax) {
  // u = 1/e gives Gumbel noise -log(-log u) = 0.
  Graph g(false);
  Tensor u({1, 3}, static_cast<Real>(std::exp(-1.0)));
  Rng rng(0);
  Var e = gumbel_embed(g.constant(Tensor({1, 3}, {0, 0, std::log(2.0)})), g.constant(table3x2()),
                       0.5, false, rng, &u);
  // softmax([0, 0, 2 ln 2]) = [1, 1, 4] / 6
  EXPECT_NEAR(e.value()[0], (1 + 8) / 6.0, 1e-5);
  EXPECT_NEAR(e.value()[1], (1 + 8) / 6.0, 1e-5);
  Var st = gumbel_embed(g.constant(Tensor({1, 3}, {0, 0, std::log(2.0)})), g.constant(table3x2()),
                        0.5, true, rng, &u);
  EXPECT_NEAR(st.value()[0], 2.0, 1e-6);
  EXPECT_NEAR(st.value()[1], 2.0, 1e-6);
}

TEST(Interface, GumbelFrequenciesFollowSoftmax) {
  EXPECT_LT(iface_checks::gumbel_tv(8, 10000, 1.0, 5), 0.03);
  EXPECT_LT(iface_checks::gumbel_tv(8, 10000, 2.0, 6), 0.03);
}

TEST(Interface, ArgmaxBlocksGradient) {
  EXPECT_EQ(iface_checks::logits_grad_norm(InterfaceKind::kMatMul, true, 1), 0.0);
  for (auto kind : {InterfaceKind::kTopK, InterfaceKind::kMatMul, InterfaceKind::kGumbel}) {
    EXPECT_GT(iface_checks::logits_grad_norm(kind, false, 1), 1e-6) << interface_name(kind);
  }
}

TEST(Interface, GumbelEvalIsArgmax) {
  Rng rng(3);
  Tensor logits = iface_checks::random_tensor({4, 6}, rng);
  Tensor table = iface_checks::random_tensor({6, 3}, rng);
  InterfaceConfig cfg;
  Graph g(false);
  Var a = embed_posteriors(g.constant(logits), g.constant(table), cfg, rng, false);
  Var b = argmax_embed(g.constant(logits), g.constant(table));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.value()[i], b.value()[i]);
}

TEST(Interface, HandlesBatchedLogits) {
  Rng rng(4);
  Tensor logits = iface_checks::random_tensor({2, 3, 5}, rng);
  Tensor table = iface_checks::random_tensor({5, 4}, rng);
  Graph g(false);
  for (auto kind : {InterfaceKind::kTopK, InterfaceKind::kMatMul, InterfaceKind::kGumbel}) {
    InterfaceConfig cfg;
    cfg.kind = kind;
    cfg.k = 2;
    Var e = embed_posteriors(g.constant(logits), g.constant(table), cfg, rng, true);
    EXPECT_EQ(e.shape(), (Shape{2, 3, 4}));
  }
  EXPECT_THROW(matmul_embed(g.constant(logits), g.constant(Tensor({4, 4}))), DimensionError);
}
