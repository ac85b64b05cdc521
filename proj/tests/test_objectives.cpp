#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringmix/objectives.hpp"

namespace ringmix {
namespace {

Eigen::VectorXd random_vector(std::size_t d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = n(rng);
  return v;
}

TEST(Quadratic, ZeroGradientAtOptimum) {
  const Eigen::VectorXd opt = random_vector(12, 3);
  const auto q = quadratic_oracle(12, 50.0, opt, 1.0, 9);
  EXPECT_LE(q->full_gradient(opt).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(q->loss(opt), 0.0, 1e-15);
}

TEST(Quadratic, CurvatureSpectrum) {
  const auto q = quadratic_oracle(5, 16.0, Eigen::VectorXd::Zero(5), 0.0, 1);
  EXPECT_DOUBLE_EQ(q->curvature().minCoeff(), 1.0);
  EXPECT_NEAR(q->curvature().maxCoeff(), 16.0, 1e-12);
  EXPECT_NEAR(q->curvature()[2], 4.0, 1e-12);  // log-spaced midpoint

  const auto identity = quadratic_oracle(4, 1.0, Eigen::VectorXd::Zero(4), 0.0, 1);
  const Eigen::VectorXd w = random_vector(4, 5);
  EXPECT_LE((identity->full_gradient(w) - w).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(identity->loss(w), 0.5 * w.squaredNorm(), 1e-14);

  const auto scalar = quadratic_oracle(1, 100.0, Eigen::VectorXd::Zero(1), 0.0, 1);
  EXPECT_EQ(scalar->curvature()[0], 1.0);
}

TEST(Quadratic, NoiseVarianceScalesWithBatch) {
  const std::size_t d = 10;
  const auto q = quadratic_oracle(d, 10.0, Eigen::VectorXd::Zero(d), 2.0, 42);
  const Eigen::VectorXd w = random_vector(d, 6);
  const Eigen::VectorXd g = q->full_gradient(w);
  auto pooled_variance = [&](std::size_t m) {
    double sum = 0.0;
    double sq = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      const Eigen::VectorXd e = q->stochastic_gradient(w, {m, static_cast<std::uint64_t>(i) + 1000 * m}) - g;
      sum += e.sum();
      sq += e.squaredNorm();
    }
    const double n = static_cast<double>(draws * d);
    return (sq - sum * sum / n) / (n - 1.0);
  };
  const double v1 = pooled_variance(1);
  const double v100 = pooled_variance(100);
  EXPECT_NEAR(v1, 4.0, 0.2);
  EXPECT_NEAR(v1 / v100, 100.0, 10.0);
}

TEST(Quadratic, NoiselessGradientDescentIsMonotone) {
  const double kappa = 25.0;
  const auto q = quadratic_oracle(8, kappa, random_vector(8, 2), 0.0, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  double prev = q->loss(w);
  for (int step = 0; step < 500; ++step) {
    w -= (1.0 / kappa) * q->stochastic_gradient(w, {4, static_cast<std::uint64_t>(step)});
    const double cur = q->loss(w);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Quadratic, FiniteDifferences) {
  const auto q = quadratic_oracle(10, 100.0, random_vector(10, 8), 1.0, 3);
  EXPECT_LE(gradient_check(*q, random_vector(10, 11, 3.0)), 1e-7);
}

TEST(Logistic, ValuesAtOrigin) {
  const auto lg = logistic_oracle(6, 200, 2.0, 17);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  EXPECT_NEAR(lg->loss(zero), std::numbers::ln2, 1e-14);

  // -1/(2n) sum y_i x_i, accumulated directly.
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  for (Eigen::Index i = 0; i < lg->features().cols(); ++i) {
    for (Eigen::Index r = 0; r < 6; ++r) expected[r] -= lg->labels()[i] * lg->features()(r, i);
  }
  expected /= 2.0 * static_cast<double>(lg->samples());
  EXPECT_LE((lg->full_gradient(zero) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Logistic, BalancedLabels) {
  const auto lg = logistic_oracle(3, 101, 1.0, 1);
  int plus = 0;
  for (double y : lg->labels()) {
    ASSERT_TRUE(y == 1.0 || y == -1.0);
    plus += y > 0 ? 1 : 0;
  }
  EXPECT_NEAR(plus, 50.5, 0.5);
}

TEST(Logistic, FiniteDifferences) {
  const auto lg = logistic_oracle(10, 300, 3.0, 4);
  const Eigen::VectorXd w = random_vector(10, 19, 0.5);
  const double tight = gradient_check(*lg, w, 1e-5);
  const double mid = gradient_check(*lg, w, 1e-3);
  const double loose = gradient_check(*lg, w, 1e-1);
  EXPECT_LE(tight, 1e-5);
  EXPECT_LT(tight, mid);
  EXPECT_LT(mid, loose);
}

TEST(Logistic, StochasticGradientIsUnbiased) {
  const std::size_t d = 5;
  const auto lg = logistic_oracle(d, 64, 2.0, 23);
  const Eigen::VectorXd w = random_vector(d, 29, 0.3);
  const Eigen::VectorXd g = lg->full_gradient(w);
  const int draws = 4000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd s = lg->stochastic_gradient(w, {4, static_cast<std::uint64_t>(i)});
    sum += s;
    sq += s.cwiseProduct(s);
  }
  const Eigen::VectorXd mean = sum / draws;
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(d); ++r) {
    const double var = (sq[r] - draws * mean[r] * mean[r]) / (draws - 1);
    EXPECT_LE(std::abs(mean[r] - g[r]), 4.0 * std::sqrt(var / draws)) << r;
  }
}

TEST(Logistic, ShardsStayInside) {
  // Two samples per shard; distinct shards produce distinct gradients.
  const auto lg = logistic_oracle(3, 8, 2.0, 2);
  const Eigen::VectorXd w = random_vector(3, 1);
  const BatchDescriptor a{16, 5, 0, 4};
  const BatchDescriptor b{16, 5, 1, 4};
  EXPECT_NE(lg->stochastic_gradient(w, a), lg->stochastic_gradient(w, b));
  EXPECT_THROW(lg->stochastic_gradient(w, {1, 0, 4, 4}), std::invalid_argument);
}

TEST(Oracles, Deterministic) {
  const auto a = logistic_oracle(4, 50, 1.0, 77);
  const auto b = logistic_oracle(4, 50, 1.0, 77);
  EXPECT_EQ(a->features(), b->features());
  const Eigen::VectorXd w = random_vector(4, 3);
  EXPECT_EQ(a->stochastic_gradient(w, {8, 12}), b->stochastic_gradient(w, {8, 12}));
  EXPECT_NE(a->stochastic_gradient(w, {8, 12}), a->stochastic_gradient(w, {8, 13}));

  const auto q1 = quadratic_oracle(4, 3.0, Eigen::VectorXd::Ones(4), 1.0, 5);
  const auto q2 = quadratic_oracle(4, 3.0, Eigen::VectorXd::Ones(4), 1.0, 5);
  EXPECT_EQ(q1->stochastic_gradient(w, {2, 9}), q2->stochastic_gradient(w, {2, 9}));
}

TEST(Oracles, RejectBadShapes) {
  const auto q = quadratic_oracle(4, 3.0, Eigen::VectorXd::Zero(4), 1.0, 5);
  EXPECT_THROW(q->loss(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(q->stochastic_gradient(Eigen::VectorXd::Zero(4), {0, 1}), std::invalid_argument);
  EXPECT_THROW(quadratic_oracle(4, 0.5, Eigen::VectorXd::Zero(4), 1.0, 5), std::invalid_argument);
  EXPECT_THROW(quadratic_oracle(4, 2.0, Eigen::VectorXd::Zero(5), 1.0, 5), std::invalid_argument);
  EXPECT_THROW(logistic_oracle(4, 1, 1.0, 5), std::invalid_argument);
  const auto lg = logistic_oracle(4, 10, 1.0, 5);
  EXPECT_THROW(lg->full_gradient(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  EXPECT_EQ(to_string(ObjectiveKind::Logistic), "logistic");
}

}  // namespace
}  // namespace ringmix
