#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sql2text/layers.hpp"
#include "sql2text/parameters.hpp"

namespace sql2text {
namespace {

Tensor leaf(std::vector<Real> v) {
  const std::size_t n = v.size();
  return Tensor::from_values({n}, std::move(v), true);
}

void set_grad(Tensor& t, std::vector<Real> g) {
  t.zero_grad();
  // Accumulate the requested gradient through sum(t * g).
  sum(mul(t, Tensor::from_values(t.shape(), std::move(g)))).backward();
}

TEST(ParameterStore, KeepsRegistrationOrderAndRejectsBadEntries) {
  ParameterStore store;
  store.add("z", leaf({1, 2}));
  store.add("a", leaf({3}));
  std::vector<std::string> names;
  for (const auto& [name, t] : store) names.push_back(name);
  EXPECT_EQ(names, (std::vector<std::string>{"z", "a"}));
  EXPECT_EQ(store.parameter_count(), 3u);
  EXPECT_THROW(store.add("z", leaf({0})), std::invalid_argument);
  EXPECT_THROW(store.add("c", Tensor::zeros({2})), std::invalid_argument);
  EXPECT_THROW(store.get("missing"), std::out_of_range);
  EXPECT_TRUE(store.get("a").same_storage(store.get("a")));
}

TEST(ClipGradients, BelowThresholdIsUntouched) {
  ParameterStore store;
  Tensor p = store.add("p", leaf({0, 0}));
  set_grad(p, {6, 8});
  EXPECT_DOUBLE_EQ(clip_gradients(store, 20), 10.0);
  EXPECT_EQ(p.grad()[0], Real(6));
  EXPECT_EQ(p.grad()[1], Real(8));
}

TEST(ClipGradients, ScalesByMaxOverNorm) {
  ParameterStore store;
  Tensor p = store.add("p", leaf({0, 0}));
  set_grad(p, {30, 40});
  EXPECT_DOUBLE_EQ(clip_gradients(store, 20), 50.0);
  EXPECT_NEAR(p.grad()[0], 12.0, 1e-5);
  EXPECT_NEAR(p.grad()[1], 16.0, 1e-5);
}

TEST(ClipGradients, ZeroGradientsStayZero) {
  ParameterStore store;
  Tensor p = store.add("p", leaf({1, 1}));
  set_grad(p, {0, 0});
  EXPECT_EQ(clip_gradients(store, 20), 0.0);
  EXPECT_EQ(p.grad()[0], Real(0));
}

TEST(ClipGradients, IdempotentProperty) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 100; ++trial) {
    ParameterStore store;
    Tensor a = store.add("a", leaf(std::vector<Real>(3)));
    Tensor b = store.add("b", leaf(std::vector<Real>(4)));
    std::vector<Real> ga(3), gb(4);
    for (auto& g : ga) g = static_cast<Real>(u(rng));
    for (auto& g : gb) g = static_cast<Real>(u(rng));
    set_grad(a, ga);
    set_grad(b, gb);
    const double max_norm = 5 + 40 * std::uniform_real_distribution<double>(0, 1)(rng);
    clip_gradients(store, max_norm);
    const std::vector<Real> once_a(a.grad().begin(), a.grad().end());
    const std::vector<Real> once_b(b.grad().begin(), b.grad().end());
    const double norm_after = clip_gradients(store, max_norm);
    EXPECT_LE(norm_after, max_norm * (1 + 1e-6));
    // A second clip may only rescale by a factor within rounding of 1.
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.grad()[i], once_a[i], 1e-5 * std::abs(once_a[i]) + 1e-6);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(b.grad()[i], once_b[i], 1e-5 * std::abs(once_b[i]) + 1e-6);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  Tensor p = store.add("p", leaf({1}));
  set_grad(p, {1});
  AdamState adam;
  adam_step(store, adam);
  EXPECT_NEAR(p.values()[0], 1.0 - 0.001, 1e-7);
  EXPECT_FALSE(p.has_grad() && p.grad()[0] != Real(0));
}

TEST(Adam, ZeroGradientLeavesParameterAndDecaysMoments) {
  ParameterStore store;
  Tensor p = store.add("p", leaf({2}));
  AdamState adam;
  set_grad(p, {1});
  adam_step(store, adam);
  const Real after_first = p.values()[0];
  const Real m1 = adam.moments("p").first[0];
  const Real v1 = adam.moments("p").second[0];
  adam_step(store, adam);  // no gradient accumulated
  EXPECT_NEAR(adam.moments("p").first[0], 0.9 * m1, 1e-7);
  EXPECT_NEAR(adam.moments("p").second[0], 0.999 * v1, 1e-7);
  // With a zero gradient the update is lr * m_hat / sqrt(v_hat), still
  // non-zero because of momentum; only a fresh parameter stays put.
  ParameterStore fresh;
  Tensor q = fresh.add("q", leaf({5}));
  AdamState adam2;
  adam_step(fresh, adam2);
  EXPECT_EQ(q.values()[0], Real(5));
  EXPECT_NE(after_first, Real(2));
}

TEST(Adam, TwoStepsMatchHandRecursion) {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ParameterStore store;
  Tensor p = store.add("p", leaf({0.5, -1}));
  AdamState adam({lr, b1, b2, eps});
  const std::vector<std::vector<double>> grads = {{0.3, -2.0}, {-0.1, 4.0}};
  std::vector<double> value = {0.5, -1}, m(2, 0), v(2, 0);
  for (std::size_t t = 1; t <= 2; ++t) {
    const auto& g = grads[t - 1];
    set_grad(p, {static_cast<Real>(g[0]), static_cast<Real>(g[1])});
    adam_step(store, adam);
    for (std::size_t i = 0; i < 2; ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, t)), vh = v[i] / (1 - std::pow(b2, t));
      value[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  EXPECT_EQ(adam.step_count(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(p.values()[i], value[i], 1e-6);
    EXPECT_NEAR(adam.moments("p").first[i], m[i], 1e-6);
    EXPECT_NEAR(adam.moments("p").second[i], v[i], 1e-6);
  }
}

TEST(FiniteDifference, QuadraticIsExact) {
  ParameterStore store;
  store.add("p", leaf({3}));
  auto loss = [](const ParameterStore& s) { return sum(mul(s.get("p"), s.get("p"))); };
  // A step exactly representable in 32 bits keeps the difference exact.
  const auto result = finite_difference_check(loss, store, {1.0 / 1024, 10, 0, 0});
  EXPECT_EQ(result.coordinates_checked, 1u);
  EXPECT_NEAR(result.worst_analytic, 6.0, 1e-6);
  EXPECT_LT(result.max_relative_error, 1e-6);
}

TEST(FiniteDifference, IgnoredParameterHasZeroError) {
  ParameterStore store;
  store.add("used", leaf({1}));
  store.add("ignored", leaf({2, 3}));
  auto loss = [](const ParameterStore& s) { return sum(scale(s.get("used"), 2)); };
  const auto result = finite_difference_check(loss, store, {1e-2, 10, 0, 0});
  EXPECT_EQ(result.coordinates_checked, 3u);
  EXPECT_LT(result.max_relative_error, 1e-3);
}

TEST(FiniteDifference, SamplesASeededSubset) {
  ParameterStore store;
  store.add("p", leaf(std::vector<Real>(50, 1)));
  auto loss = [](const ParameterStore& s) { return sum(s.get("p")); };
  EXPECT_EQ(finite_difference_check(loss, store, {1e-2, 7, 3, 0}).coordinates_checked, 7u);
}

TEST(FiniteDifference, NonDeterministicLossIsDetected) {
  ParameterStore store;
  store.add("p", leaf({1}));
  Rng rng(0);
  auto loss = [&](const ParameterStore& s) { return sum(dropout(s.get("p"), Real(0.5), rng)); };
  // Draw until two consecutive evaluations disagree; the check must notice.
  EXPECT_THROW(
      {
        for (int i = 0; i < 64; ++i) finite_difference_check(loss, store, {1e-2, 1, 0, 0});
      },
      NonDeterministicLoss);
}

TEST(Layers, LinearAndLstmRegisterNamedParameters) {
  ParameterStore store;
  Rng rng(1);
  const Linear fc = Linear::create(store, "fc", 3, 2, Real(0.08), rng);
  const LstmCell cell = LstmCell::create(store, "cell", 3, 4, Real(0.08), rng);
  EXPECT_TRUE(store.contains("fc.weight"));
  EXPECT_TRUE(store.contains("fc.bias"));
  EXPECT_EQ(store.get("cell.weight").shape(), (Shape{7, 16}));
  for (Real w : fc.weight.values()) {
    EXPECT_LE(std::abs(w), Real(0.08));
  }
  for (Real b : cell.bias.values()) EXPECT_EQ(b, Real(0));
}

TEST(Layers, LstmStepMatchesHandFormula) {
  ParameterStore store;
  Rng rng(4);
  LstmCell cell = LstmCell::create(store, "cell", 2, 1, Real(0.5), rng);
  const Tensor x = Tensor::from_values({1, 2}, {0.3, -0.7});
  const Tensor h = Tensor::from_values({1, 1}, {0.2});
  const Tensor c = Tensor::from_values({1, 1}, {-0.4});
  auto [h1, c1] = cell.step(x, h, c);
  const auto w = cell.weight.values();  // 3 x 4: rows x0, x1, h
  auto gate = [&](std::size_t j) { return 0.3 * w[j] - 0.7 * w[4 + j] + 0.2 * w[8 + j]; };
  auto sig = [](double z) { return 1 / (1 + std::exp(-z)); };
  const double i = sig(gate(0)), f = sig(gate(1)), g = std::tanh(gate(2)), o = sig(gate(3));
  const double c_expected = f * -0.4 + i * g;
  EXPECT_NEAR(c1.item(), c_expected, 1e-6);
  EXPECT_NEAR(h1.item(), o * std::tanh(c_expected), 1e-6);
}

}  // namespace
}  // namespace sql2text
