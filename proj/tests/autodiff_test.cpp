#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace srl {
namespace {

using test::numeric_gradient;
using test::random_tensor;
using test::relative_error;

TEST(Tensor, RejectsInconsistentShapes) {
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<double>(5, 0.0)), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 0}), DimensionError);
  Tensor t(Shape{2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_TRUE(t.all_finite());
  t[4] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Rng rng(1);
  Tape tape;
  Tensor x = random_tensor({3, 4}, rng);
  Var out = matmul(constant(tape, Tensor::identity(3)), constant(tape, x));
  EXPECT_EQ(out.value(), x);
}

TEST(Matmul, HandExample) {
  Tape tape;
  Var out = matmul(constant(tape, Tensor::matrix({{1, 2}, {3, 4}})),
                   constant(tape, Tensor::matrix({{1}, {1}})));
  EXPECT_EQ(out.value(), Tensor::matrix({{3}, {7}}));
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(2);
  Tape tape;
  Tensor a = random_tensor({4, 5}, rng), b = random_tensor({5, 2}, rng);
  Var out = matmul(constant(tape, a), constant(tape, b));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(out.value().at(i, j), s, 1e-12);
    }
  }
}

TEST(Matmul, ShapeMismatchIsDimensionError) {
  Tape tape;
  EXPECT_THROW(matmul(constant(tape, Tensor(Shape{2, 3})), constant(tape, Tensor(Shape{2, 3}))),
               DimensionError);
  EXPECT_THROW(matmul(constant(tape, Tensor(Shape{2, 3})), constant(tape, Tensor(Shape{4}))),
               DimensionError);
}

TEST(Matmul, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  Parameter a("a", random_tensor({3, 4}, rng)), b("b", random_tensor({4, 2}, rng));
  Tensor w = random_tensor({3, 2}, rng);
  auto loss = [&](Tape& tape) {
    return sum(mul(matmul(tape.param(a), tape.param(b)), constant(tape, w)));
  };
  Tape tape;
  tape.backward(loss(tape));
  auto f = [&] {
    Tape t;
    return loss(t).value().item();
  };
  for (Parameter* p : {&a, &b}) {
    Tensor numeric = numeric_gradient(p->value, f);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      EXPECT_LT(relative_error(p->grad[i], numeric[i]), 1e-6) << p->name << "[" << i << "]";
    }
  }
}

// out[l] = sum_i sum_j a[i] W[i,l,j] p[j]
double bilinear_oracle(const Tensor& w, const Tensor& a, const Tensor& p, std::size_t l) {
  const std::size_t d1 = w.dim(0), labels = w.dim(1), d2 = w.dim(2);
  double s = 0.0;
  for (std::size_t i = 0; i < d1; ++i) {
    for (std::size_t j = 0; j < d2; ++j) s += a[i] * w[(i * labels + l) * d2 + j] * p[j];
  }
  return s;
}

TEST(Bilinear, ZeroWeightsGiveZeroScores) {
  Rng rng(4);
  Tape tape;
  Var out = bilinear(constant(tape, Tensor(Shape{3, 5, 2})), constant(tape, random_tensor({3}, rng)),
                     constant(tape, random_tensor({2}, rng)));
  EXPECT_EQ(out.value(), Tensor(Shape{5}));
}

TEST(Bilinear, ScalarReduction) {
  Tape tape;
  Tensor w(Shape{1, 3, 1}, std::vector<double>{2.0, -1.0, 0.5});
  Var out = bilinear(constant(tape, w), constant(tape, Tensor::vector({3.0})),
                     constant(tape, Tensor::vector({4.0})));
  EXPECT_EQ(out.value(), Tensor::vector({24.0, -12.0, 6.0}));
}

TEST(Bilinear, MatchesTripleLoop) {
  Rng rng(5);
  Tape tape;
  Tensor w = random_tensor({7, 5, 7}, rng), a = random_tensor({7}, rng), p = random_tensor({7}, rng);
  Var out = bilinear(constant(tape, w), constant(tape, a), constant(tape, p));
  for (std::size_t l = 0; l < 5; ++l) EXPECT_NEAR(out.value()[l], bilinear_oracle(w, a, p, l), 1e-10);
  Var right = matmul(constant(tape, a), bilinear_right(constant(tape, w), constant(tape, p)));
  for (std::size_t l = 0; l < 5; ++l) EXPECT_NEAR(right.value()[l], out.value()[l], 1e-12);
}

TEST(Bilinear, ShapeMismatchIsDimensionError) {
  Tape tape;
  EXPECT_THROW(bilinear(constant(tape, Tensor(Shape{3, 2, 4})), constant(tape, Tensor(Shape{3})),
                        constant(tape, Tensor(Shape{3}))),
               DimensionError);
  EXPECT_THROW(bilinear(constant(tape, Tensor(Shape{3, 4})), constant(tape, Tensor(Shape{3})),
                        constant(tape, Tensor(Shape{4}))),
               DimensionError);
}

TEST(Bilinear, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  Parameter w("w", random_tensor({3, 4, 2}, rng)), a("a", random_tensor({3}, rng)),
      p("p", random_tensor({2}, rng));
  Tensor weights = random_tensor({4}, rng);
  auto build = [&](Tape& t) {
    return dot(bilinear(t.param(w), t.param(a), t.param(p)), constant(t, weights));
  };
  auto build_right = [&](Tape& t) {
    return dot(matmul(t.param(a), bilinear_right(t.param(w), t.param(p))), constant(t, weights));
  };
  for (int route = 0; route < 2; ++route) {
    for (Parameter* q : {&w, &a, &p}) q->zero_grad();
    Tape tape;
    tape.backward(route == 0 ? build(tape) : build_right(tape));
    auto f = [&] {
      Tape t;
      return (route == 0 ? build(t) : build_right(t)).value().item();
    };
    for (Parameter* q : {&w, &a, &p}) {
      Tensor numeric = numeric_gradient(q->value, f);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        EXPECT_LT(relative_error(q->grad[i], numeric[i]), 1e-6) << q->name << " route " << route;
      }
    }
  }
}

TEST(Concat, JoinsInOrder) {
  Tape tape;
  Var out = concat({constant(tape, Tensor::vector({1})), constant(tape, Tensor::vector({2, 3}))});
  EXPECT_EQ(out.value(), Tensor::vector({1, 2, 3}));
  Var single = concat({constant(tape, Tensor::vector({4, 5}))});
  EXPECT_EQ(single.value(), Tensor::vector({4, 5}));
  EXPECT_THROW(concat({}), ArgumentError);
}

TEST(Concat, WordRepresentationBlocks) {
  Tape tape;
  std::vector<Var> blocks;
  for (std::size_t d : {100, 100, 100, 100, 16}) blocks.push_back(constant(tape, Tensor(Shape{d})));
  EXPECT_EQ(concat(blocks).size(), 416u);
}

TEST(Concat, GradientSlicesBackToParts) {
  Parameter a("a", Tensor::vector({1, 2})), b("b", Tensor::vector({3}));
  Tape tape;
  Var out = concat({tape.param(a), tape.param(b)});
  tape.backward(dot(out, constant(tape, Tensor::vector({10, 20, 30}))));
  EXPECT_EQ(a.grad, Tensor::vector({10, 20}));
  EXPECT_EQ(b.grad, Tensor::vector({30}));
}

TEST(Relu, ForwardAndSubgradient) {
  Parameter x("x", Tensor::vector({-1, 0, 2}));
  Tape tape;
  Var out = relu(tape.param(x));
  EXPECT_EQ(out.value(), Tensor::vector({0, 0, 2}));
  tape.backward(sum(out));
  EXPECT_EQ(x.grad, Tensor::vector({0, 0, 1}));

  Tape t2;
  EXPECT_EQ(relu(constant(t2, Tensor::vector({-3, -0.5}))).value(), Tensor(Shape{2}));
}

TEST(Relu, GradientMatchesFiniteDifferencesAwayFromZero) {
  Rng rng(7);
  Tensor x0 = random_tensor({20}, rng);
  for (double& v : x0.data()) {
    if (std::abs(v) < 1e-3) v = 0.5;
  }
  Parameter x("x", x0);
  Tensor w = random_tensor({20}, rng);
  auto build = [&](Tape& t) { return dot(relu(t.param(x)), constant(t, w)); };
  Tape tape;
  tape.backward(build(tape));
  Tensor numeric = numeric_gradient(x.value, [&] {
    Tape t;
    return build(t).value().item();
  });
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(x.grad[i], numeric[i], 1e-8);
}

TEST(ElementwiseOps, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  Parameter x("x", random_tensor({6}, rng)), y("y", random_tensor({6}, rng));
  auto build = [&](Tape& t) {
    Var a = sigmoid(t.param(x));
    Var b = tanh(mul(t.param(x), t.param(y)));
    Var c = add_n({a, b, scale(t.param(y), 0.3)});
    return sum(mul(c, slice(concat({t.param(x), t.param(y)}), 3, 6)));
  };
  Tape tape;
  tape.backward(build(tape));
  auto f = [&] {
    Tape t;
    return build(t).value().item();
  };
  for (Parameter* p : {&x, &y}) {
    Tensor numeric = numeric_gradient(p->value, f);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(relative_error(p->grad[i], numeric[i]), 1e-6);
  }
}

TEST(Sigmoid, StableForLargeInputs) {
  Tape tape;
  Var out = sigmoid(constant(tape, Tensor::vector({-800, 800, 0})));
  EXPECT_TRUE(out.value().all_finite());
  EXPECT_DOUBLE_EQ(out.value()[2], 0.5);
  EXPECT_NEAR(out.value()[0], 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(out.value()[1], 1.0);
}

TEST(Dropout, IdentityCases) {
  Rng rng(9);
  Tape tape;
  Var x = constant(tape, Tensor::vector({1, 2, 3}));
  EXPECT_EQ(dropout(x, 1.0, Mode::kTrain, rng).id, x.id);
  EXPECT_EQ(dropout(x, 1.0, Mode::kInfer, rng).id, x.id);
  EXPECT_EQ(dropout(x, 0.3, Mode::kInfer, rng).id, x.id);
}

TEST(Dropout, RejectsBadKeepProbability) {
  Rng rng(10);
  Tape tape;
  Var x = constant(tape, Tensor::vector({1}));
  EXPECT_THROW(dropout(x, 0.0, Mode::kTrain, rng), ArgumentError);
  EXPECT_THROW(dropout(x, 1.5, Mode::kInfer, rng), ArgumentError);
}

TEST(Dropout, SampleMeanMatchesInput) {
  Rng rng(11);
  const Tensor x = Tensor::vector({1.0, -2.0, 0.5});
  Tensor total(Shape{3});
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    Tape tape;
    total += dropout(constant(tape, x), 0.8, Mode::kTrain, rng).value();
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(total[k] / draws, x[k], 0.01 * std::abs(x[k]));
  }
}

TEST(Dropout, SharedMaskIsReused) {
  Rng rng(12);
  const Tensor mask = dropout_mask(Shape{50}, 0.5, rng);
  Tape tape;
  Var a = dropout(constant(tape, Tensor(Shape{50}, 1.0)), 0.5, Mode::kTrain, rng, &mask);
  Var b = dropout(constant(tape, Tensor(Shape{50}, 1.0)), 0.5, Mode::kTrain, rng, &mask);
  EXPECT_EQ(a.value(), mask);
  EXPECT_EQ(b.value(), mask);
  for (double v : mask.data()) EXPECT_TRUE(v == 0.0 || v == 2.0);
}

TEST(CrossEntropy, UniformScores) {
  Tape tape;
  Var loss = cross_entropy(constant(tape, Tensor(Shape{7}, 0.25)), 3);
  EXPECT_NEAR(loss.value().item(), std::log(7.0), 1e-12);
  EXPECT_NEAR(loss.value().item(), 1.9459, 1e-4);
}

TEST(CrossEntropy, SaturatedGold) {
  Tape tape;
  Tensor s(Shape{5}, 0.0);
  s[2] = 1000.0;
  EXPECT_NEAR(cross_entropy(constant(tape, s), 2).value().item(), 0.0, 1e-12);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Rng rng(13);
  Parameter s("s", random_tensor({6}, rng, 3.0));
  Tape tape;
  tape.backward(cross_entropy(tape.param(s), 4));
  double z = 0.0;
  for (double v : s.value.data()) z += std::exp(v);
  Tensor numeric = numeric_gradient(s.value, [&] {
    Tape t;
    return cross_entropy(t.param(s), 4).value().item();
  });
  for (std::size_t i = 0; i < 6; ++i) {
    const double expected = std::exp(s.value[i]) / z - (i == 4 ? 1.0 : 0.0);
    EXPECT_NEAR(s.grad[i], expected, 1e-10);
    EXPECT_NEAR(numeric[i], expected, 1e-8);
  }
}

TEST(CrossEntropy, GoldOutOfRange) {
  Tape tape;
  EXPECT_THROW(cross_entropy(constant(tape, Tensor(Shape{3})), 3), ArgumentError);
}

TEST(Backward, SumGivesOnes) {
  Parameter x("x", Tensor(Shape{2, 3}, 0.7));
  Tape tape;
  tape.backward(sum(tape.param(x)));
  EXPECT_EQ(x.grad, Tensor(Shape{2, 3}, 1.0));
}

TEST(Backward, DotGivesOtherOperand) {
  Parameter x("x", Tensor::vector({1, 2, 3})), y("y", Tensor::vector({4, 5, 6}));
  Tape tape;
  tape.backward(dot(tape.param(x), tape.param(y)));
  EXPECT_EQ(x.grad, y.value);
  EXPECT_EQ(y.grad, x.value);
}

TEST(Backward, AccumulatesAcrossCalls) {
  Parameter x("x", Tensor::vector({1, 2}));
  Tape tape;
  Var loss = dot(tape.param(x), tape.param(x));
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_EQ(x.grad, Tensor::vector({4, 8}));
  x.zero_grad();
  EXPECT_EQ(x.grad, Tensor(Shape{2}));
}

TEST(Backward, NonScalarLossRejected) {
  Tape tape;
  EXPECT_THROW(tape.backward(constant(tape, Tensor(Shape{2}))), ArgumentError);
}

TEST(Backward, UnreachableNodesHaveZeroGradient) {
  Parameter x("x", Tensor::vector({1, 2})), y("y", Tensor::vector({3, 4}));
  Tape tape;
  Var unused = tanh(tape.param(y));
  tape.backward(sum(tape.param(x)));
  EXPECT_EQ(tape.gradient(unused), Tensor(Shape{2}));
  EXPECT_EQ(y.grad, Tensor(Shape{2}));
}

TEST(Backward, LookupScattersIntoRow) {
  Parameter table("table", Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
  Tape tape;
  Var a = lookup(tape, table, 1);
  Var b = lookup(tape, table, 1);
  EXPECT_EQ(a.value(), Tensor::vector({3, 4}));
  tape.backward(add(sum(a), dot(b, constant(tape, Tensor::vector({2, 3})))));
  EXPECT_EQ(table.grad, Tensor::matrix({{0, 0}, {3, 4}, {0, 0}}));
}

TEST(Determinism, SameSeedSameValuesAndGradients) {
  auto run = [] {
    Rng rng(14);
    Parameter w("w", random_tensor({4, 4}, rng));
    Tape tape;
    Var h = dropout(tanh(matmul(tape.param(w), constant(tape, random_tensor({4}, rng)))), 0.5,
                    Mode::kTrain, rng);
    tape.backward(sum(h));
    return std::make_pair(h.value(), w.grad);
  };
  EXPECT_EQ(run(), run());
}

TEST(LearningRate, ScheduleValues) {
  EXPECT_EQ(learning_rate(0), 0.002);
  EXPECT_EQ(learning_rate(5000), 0.0015);
  EXPECT_EQ(learning_rate(10000), 0.001125);
  EXPECT_NEAR(learning_rate(2500), 0.002 * std::sqrt(0.75), 1e-15);
  EXPECT_LT(learning_rate(5001), learning_rate(5000));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParameterStore store;
  store.add("x", Tensor::vector({1.0, -2.0}));
  AdamState state;
  adam_step(store, state);
  EXPECT_EQ(store.get("x").value, Tensor::vector({1.0, -2.0}));
  EXPECT_EQ(state.first_moment[0], Tensor(Shape{2}));
  EXPECT_EQ(state.second_moment[0], Tensor(Shape{2}));
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  store.add("x", Tensor::scalar(0.5));
  store.get("x").grad[0] = 1.0;
  AdamState state;
  adam_step(store, state);
  // m = 0.1, v = 0.1; bias-corrected both are 1, so the step is lr/(1+eps).
  EXPECT_NEAR(store.get("x").value[0], 0.5 - 0.002 / (1.0 + 1e-8), 1e-15);
  EXPECT_NEAR(state.first_moment[0][0], 0.1, 1e-15);
  EXPECT_NEAR(state.second_moment[0][0], 0.1, 1e-15);
  EXPECT_EQ(store.get("x").grad[0], 0.0);
}

TEST(Adam, MomentsFollowRecurrence) {
  ParameterStore store;
  store.add("x", Tensor::vector({0.0, 0.0}));
  AdamState state;
  store.get("x").grad = Tensor::vector({2.0, -1.0});
  adam_step(store, state);
  const Tensor m_prev = state.first_moment[0];
  store.get("x").grad = Tensor::vector({-3.0, 4.0});
  adam_step(store, state);
  EXPECT_NEAR(state.first_moment[0][0], 0.9 * m_prev[0] + 0.1 * -3.0, 1e-15);
  EXPECT_NEAR(state.first_moment[0][1], 0.9 * m_prev[1] + 0.1 * 4.0, 1e-15);
  EXPECT_EQ(state.step, 2u);
}

TEST(Adam, FrozenParametersStayFixed) {
  ParameterStore store;
  store.add("x", Tensor::vector({1.0}), /*trainable=*/false);
  store.get("x").grad[0] = 5.0;
  AdamState state;
  adam_step(store, state);
  EXPECT_EQ(store.get("x").value[0], 1.0);
  EXPECT_EQ(store.get("x").grad[0], 0.0);
}

TEST(ClipGradients, RescalesToMaxNorm) {
  ParameterStore store;
  store.add("x", Tensor::vector({0.0, 0.0}));
  store.get("x").grad = Tensor::vector({3.0, 4.0});
  EXPECT_DOUBLE_EQ(clip_gradients(store, 1.0), 5.0);
  EXPECT_NEAR(store.get("x").grad[0], 0.6, 1e-15);
  EXPECT_NEAR(store.get("x").grad[1], 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(clip_gradients(store, 5.0), 1.0);
  EXPECT_NEAR(store.get("x").grad[1], 0.8, 1e-15);
}

}  // namespace
}  // namespace srl
