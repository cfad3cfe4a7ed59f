#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "e2eslu/diffengine/layers.hpp"
#include "e2eslu/diffengine/ops.hpp"
#include "e2eslu/errors.hpp"

using namespace e2eslu;

namespace {

Tensor make(Shape shape, std::vector<Real> values) { return Tensor(std::move(shape), std::move(values)); }

Tensor random_tensor(Shape shape, Rng& rng, double sd = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<Real>(rng.normal(0, sd));
  return t;
}

}  // namespace

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(make({2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor(Shape{0, 3}), DimensionError);
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
}

TEST(Tensor, NoGradientWithoutRequiresGrad) {
  Tensor t({2}, 1.0f);
  std::vector<Real> g = {1, 1};
  t.accumulate_grad(g);
  EXPECT_FALSE(t.has_grad());
}

TEST(Matmul, IdentityAndHandArithmetic) {
  Graph g(false);
  Var eye = g.constant(make({2, 2}, {1, 0, 0, 1}));
  Var a = g.constant(make({2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(matmul(eye, a).value().storage(), (std::vector<Real>{1, 2, 3, 4}));
  Var b = g.constant(make({2, 1}, {5, 6}));
  EXPECT_EQ(matmul(a, b).value().storage(), (std::vector<Real>{17, 39}));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  Graph g(false);
  Var a = g.constant(Tensor({2, 3}));
  Var b = g.constant(Tensor({2, 2}));
  try {
    matmul(a, b);
    FAIL();
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[2x2]"), std::string::npos) << msg;
  }
}

TEST(Matmul, GradOfSumIsRowBroadcastOfColumnSums) {
  Rng rng(3);
  Graph g;
  Var a = g.variable(random_tensor({3, 4}, rng));
  Tensor bt = random_tensor({4, 5}, rng);
  Var b = g.constant(bt);
  g.backward(sum(matmul(a, b)));
  auto grad = g.grad(a);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      Real row_sum = 0;
      for (std::size_t j = 0; j < 5; ++j) row_sum += bt.at(k, j);
      EXPECT_NEAR(grad[i * 4 + k], row_sum, 1e-5);
    }
  }
}

TEST(Softmax, AnalyticValues) {
  Graph g(false);
  auto u = softmax(g.constant(make({3}, {0, 0, 0}))).value();
  for (Real v : u.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-7);
  auto p = softmax(g.constant(make({2}, {0, static_cast<Real>(std::log(2.0))}))).value();
  EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-6);
}

TEST(Softmax, ShiftInvarianceAndNormalization) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g(false);
    Tensor x = random_tensor({4, 7}, rng, 5.0);
    Tensor shifted = x;
    for (auto& v : shifted.values()) v += 10.0f;
    auto a = softmax(g.constant(x)).value();
    auto b = softmax(g.constant(shifted)).value();
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < 7; ++c) {
        s += a.at(r, c);
        EXPECT_GE(a.at(r, c), 0.0f);
        EXPECT_NEAR(a.at(r, c), b.at(r, c), 1e-5);
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(Softmax, NaNIsNumericError) {
  Graph g(false);
  Var x = g.constant(make({2}, {0, std::numeric_limits<Real>::quiet_NaN()}));
  EXPECT_THROW(softmax(x), NumericError);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  Graph g(false);
  Var x = g.constant(Tensor({2, 4}));
  std::vector<int> t = {1, 3};
  EXPECT_NEAR(cross_entropy(x, t).value().item(), std::log(4.0), 1e-6);
}

TEST(CrossEntropy, PeakedLogitsApproachZero) {
  Graph g(false);
  Var x = g.constant(make({1, 3}, {0, 60, 0}));
  std::vector<int> t = {1};
  EXPECT_LT(cross_entropy(x, t).value().item(), 1e-12);
}

TEST(CrossEntropy, AllIgnoredGivesZeroAndNoGradient) {
  Graph g;
  Var x = g.variable(make({2, 3}, {1, 2, 3, 4, 5, 6}));
  std::vector<int> t = {-1, -1};
  Var loss = cross_entropy(x, t, -1);
  EXPECT_EQ(loss.value().item(), 0.0f);
  g.backward(loss);
  for (Real v : g.grad(x)) EXPECT_EQ(v, 0.0f);
}

TEST(CrossEntropy, IgnoredRowsContributeNothing) {
  Graph g(false);
  Var x = g.constant(make({2, 2}, {0, 0, 9, -9}));
  std::vector<int> t = {0, -1};
  EXPECT_NEAR(cross_entropy(x, t, -1).value().item(), std::log(2.0), 1e-6);
}

TEST(CrossEntropy, OutOfRangeTargetIsIndexError) {
  Graph g(false);
  Var x = g.constant(Tensor({1, 3}));
  std::vector<int> t = {3};
  EXPECT_THROW(cross_entropy(x, t), IndexError);
}

TEST(LayerNorm, ConstantRowAndTwoElementRow) {
  Graph g(false);
  Var gain = g.constant(Tensor({2}, 1.0f));
  Var bias = g.constant(Tensor({2}));
  auto c = layer_norm(g.constant(make({2}, {5, 5})), gain, bias).value();
  EXPECT_EQ(c[0], 0.0f);
  EXPECT_EQ(c[1], 0.0f);
  auto y = layer_norm(g.constant(make({2}, {1, 3})), gain, bias, Real(1e-12)).value();
  EXPECT_NEAR(y[0], -1.0, 1e-6);
  EXPECT_NEAR(y[1], 1.0, 1e-6);
}

TEST(EmbeddingRows, GatherAndScatterAdd) {
  Graph g;
  Var table = g.variable(make({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  std::vector<int> ids = {2};
  EXPECT_EQ(embedding_rows(table, ids).value().storage(), (std::vector<Real>{0, 0, 1}));
  std::vector<int> twice = {1, 1};
  g.backward(sum(embedding_rows(table, twice)));
  auto grad = g.grad(table);
  EXPECT_EQ(grad[3], 2.0f);
  EXPECT_EQ(grad[0], 0.0f);
}

TEST(EmbeddingRows, MatchesOneHotMatmul) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g(false);
    Tensor tt = random_tensor({6, 4}, rng);
    Var table = g.constant(tt);
    const int id = static_cast<int>(rng.below(6));
    Tensor onehot({1, 6});
    onehot[static_cast<std::size_t>(id)] = 1;
    std::vector<int> ids = {id};
    EXPECT_EQ(embedding_rows(table, ids).value().storage(),
              matmul(g.constant(onehot), table).value().storage());
  }
}

TEST(EmbeddingRows, IdOutOfRangeIsIndexError) {
  Graph g(false);
  Var table = g.constant(Tensor({3, 2}));
  std::vector<int> ids = {3};
  EXPECT_THROW(embedding_rows(table, ids), IndexError);
}

TEST(Primitives, ReluConvLengthMeanAxis) {
  Graph g(false);
  EXPECT_EQ(relu(g.constant(make({3}, {-1, 0, 2}))).value().storage(),
            (std::vector<Real>{0, 0, 2}));
  EXPECT_EQ(conv_output_length(10, 4, 2), 4u);
  Var x = g.constant(Tensor({10, 3}, 1.0f));
  Var k = g.constant(Tensor({4, 3, 5}, 1.0f));
  EXPECT_EQ(conv1d(x, k, 2).shape(), (Shape{4, 5}));
  EXPECT_EQ(mean_axis(g.constant(make({1, 2}, {2, 4})), -1).value().storage(),
            (std::vector<Real>{3}));
}

TEST(Primitives, ShapeViolationsAreDimensionErrors) {
  Graph g(false);
  Var a = g.constant(Tensor({2, 3}));
  Var b = g.constant(Tensor({3, 2}));
  EXPECT_THROW(add(a, b), DimensionError);
  Var k = g.constant(Tensor({4, 2, 5}));
  EXPECT_THROW(conv1d(a, k, 2), DimensionError);
  EXPECT_THROW(slice(a, 1, 2, 5), DimensionError);
}

TEST(Backward, SumAndSquare) {
  Graph g;
  Var x = g.variable(make({2}, {1, 2}));
  g.backward(sum(mul(x, x)));
  auto grad = g.grad(x);
  EXPECT_EQ(grad[0], 2.0f);
  EXPECT_EQ(grad[1], 4.0f);
}

TEST(Backward, FanOutAccumulates) {
  Graph g;
  Var x = g.variable(make({3}, {1, -2, 5}));
  g.backward(sum(add(x, x)));
  for (Real v : g.grad(x)) EXPECT_EQ(v, 2.0f);
}

TEST(Backward, NonScalarLossIsContractError) {
  Graph g;
  Var x = g.variable(make({2}, {1, 2}));
  EXPECT_THROW(g.backward(x), ContractError);
}

TEST(Backward, Deterministic) {
  Rng rng(2);
  Tensor x = random_tensor({4, 6}, rng);
  Tensor w = random_tensor({6, 3}, rng);
  auto run = [&] {
    Graph g;
    Var xv = g.variable(x);
    Var y = softmax(matmul(xv, g.constant(w)));
    g.backward(sum(mul(y, y)));
    auto gr = g.grad(xv);
    return std::vector<Real>(gr.begin(), gr.end());
  };
  EXPECT_EQ(run(), run());
}

TEST(Attention, CausalRowsIgnoreFutureKeys) {
  Rng rng(9);
  Tensor q = random_tensor({1, 4, 8}, rng);
  Tensor k = random_tensor({1, 4, 8}, rng);
  Tensor v = random_tensor({1, 4, 8}, rng);
  Graph g(false);
  auto base = attention(g.constant(q), g.constant(k), g.constant(v), 2, {}, true).value();
  Tensor k2 = k;
  Tensor v2 = v;
  for (std::size_t c = 0; c < 8; ++c) {
    k2[3 * 8 + c] += 1.5f;
    v2[3 * 8 + c] -= 2.0f;
  }
  auto moved = attention(g.constant(q), g.constant(k2), g.constant(v2), 2, {}, true).value();
  for (std::size_t i = 0; i < 3 * 8; ++i) EXPECT_EQ(base[i], moved[i]);
}

TEST(Attention, MaskedKeysHaveNoInfluence) {
  Rng rng(10);
  Tensor q = random_tensor({2, 3, 4}, rng);
  Tensor k = random_tensor({2, 3, 4}, rng);
  Tensor v = random_tensor({2, 3, 4}, rng);
  std::vector<std::uint8_t> mask = {1, 1, 0, 1, 1, 1};
  Graph g(false);
  auto base = attention(g.constant(q), g.constant(k), g.constant(v), 2, mask, false).value();
  Tensor v2 = v;
  for (std::size_t c = 0; c < 4; ++c) v2[2 * 4 + c] = 100.0f;
  auto moved = attention(g.constant(q), g.constant(k), g.constant(v2), 2, mask, false).value();
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(base[i], moved[i]);
}

TEST(Dropout, IdentityAtZeroAndSeeded) {
  Rng a(4), b(4);
  Graph g(false);
  Tensor x({100}, 1.0f);
  EXPECT_EQ(dropout(g.constant(x), 0, a).value().storage(), x.storage());
  auto d1 = dropout(g.constant(x), Real(0.5), a).value().storage();
  Rng c(4);
  (void)dropout(g.constant(x), 0, c);
  auto d2 = dropout(g.constant(x), Real(0.5), c).value().storage();
  EXPECT_EQ(d1, d2);
  (void)b;
}

TEST(Positions, SinusoidalTable) {
  Tensor pe = sinusoidal_positions(3, 4);
  EXPECT_EQ(pe.at(0, 0), 0.0f);
  EXPECT_EQ(pe.at(0, 1), 1.0f);
  EXPECT_NEAR(pe.at(1, 0), std::sin(1.0), 1e-6);
  EXPECT_NEAR(pe.at(2, 2), std::sin(2.0 / 100.0), 1e-6);
}
