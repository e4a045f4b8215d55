#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tband/glm.hpp"

namespace tband {
namespace {

std::vector<LinkFamily> families() {
  return {LinkFamily::linear(0.01), LinkFamily::logistic(3.0), LinkFamily::poisson(3.0)};
}

std::vector<Observation> random_data(const LinkFamily& family, Dims d, std::size_t n,
                                     std::mt19937_64& rng) {
  std::vector<Observation> data;
  const Tensor3 w = testing::gaussian(d, rng) * 0.3;
  for (std::size_t t = 0; t < n; ++t) {
    Tensor3 x = testing::gaussian(d, rng);
    x *= 1.0 / x.frobenius_norm();
    const double eta = x.dot(w);
    data.push_back({x, sample_reward(family, eta, rng), t + 1});
  }
  return data;
}

TEST(LinkFamilyTest, DerivativeBounds) {
  const auto lin = LinkFamily::linear();
  EXPECT_EQ(lin.m_lower, 1.0);
  EXPECT_EQ(lin.M_upper, 1.0);
  const auto logit = LinkFamily::logistic(3.0);
  EXPECT_DOUBLE_EQ(logit.M_upper, 0.25);
  const double s = 1.0 / (1.0 + std::exp(-3.0));
  EXPECT_NEAR(logit.m_lower, s * (1.0 - s), 1e-15);
  const auto pois = LinkFamily::poisson(3.0);
  EXPECT_NEAR(pois.M_upper, std::exp(3.0), 1e-12);
  EXPECT_NEAR(pois.m_lower, std::exp(-3.0), 1e-15);

  for (const auto& family : families()) {
    EXPECT_GT(family.m_lower, 0.0);
    EXPECT_LE(family.m_lower, family.M_upper);
    for (double x = -family.eta_clip; x <= family.eta_clip + 1e-12; x += family.eta_clip / 50.0) {
      const double d = link_eval(family, x).b2;
      EXPECT_GE(d, family.m_lower * (1.0 - 1e-12)) << family.name() << " x=" << x;
      EXPECT_LE(d, family.M_upper * (1.0 + 1e-12)) << family.name() << " x=" << x;
    }
  }
}

TEST(LinkFamilyTest, ParseNames) {
  EXPECT_EQ(parse_link_kind("linear"), LinkKind::Linear);
  EXPECT_EQ(parse_link_kind("logistic"), LinkKind::Logistic);
  EXPECT_EQ(parse_link_kind("poisson"), LinkKind::Poisson);
  EXPECT_THROW(parse_link_kind("probit"), InvalidInput);
  EXPECT_THROW(LinkFamily::poisson(0.0), InvalidInput);
  EXPECT_THROW(LinkFamily::linear(-1.0), InvalidInput);
}

TEST(LinkEvalTest, KnownValues) {
  EXPECT_DOUBLE_EQ(link_eval(LinkFamily::linear(), 0.5).mu, 0.5);
  const auto lg = link_eval(LinkFamily::logistic(), 0.0);
  EXPECT_DOUBLE_EQ(lg.mu, 0.5);
  EXPECT_DOUBLE_EQ(lg.b2, 0.25);
  EXPECT_NEAR(lg.b, std::log(2.0), 1e-15);
  const auto po = link_eval(LinkFamily::poisson(), 0.0);
  EXPECT_DOUBLE_EQ(po.mu, 1.0);
  EXPECT_DOUBLE_EQ(po.b, 1.0);
}

TEST(LinkEvalTest, LogisticIsStableForLargeArguments) {
  const auto family = LinkFamily::logistic();
  const auto hi = link_eval(family, 800.0);
  EXPECT_TRUE(std::isfinite(hi.b));
  EXPECT_NEAR(hi.b, 800.0, 1e-9);
  EXPECT_DOUBLE_EQ(hi.mu, 1.0);
  const auto lo = link_eval(family, -800.0);
  EXPECT_GE(lo.b, 0.0);
  EXPECT_LT(lo.b, 1e-300);
  EXPECT_GE(lo.mu, 0.0);
}

TEST(LinkEvalTest, DerivativesMatchFiniteDifferences) {
  for (const auto& family : families()) {
    for (double x : {-2.5, -1.0, -0.1, 0.0, 0.7, 2.0}) {
      const double h = 1e-5;
      const auto v = link_eval(family, x);
      const double db = (link_eval(family, x + h).b - link_eval(family, x - h).b) / (2 * h);
      const double dmu = (link_eval(family, x + h).mu - link_eval(family, x - h).mu) / (2 * h);
      EXPECT_NEAR(v.b1, v.mu, 0.0);
      EXPECT_NEAR(db, v.mu, 1e-6 * std::max(1.0, std::abs(v.mu))) << family.name();
      EXPECT_NEAR(dmu, v.b2, 1e-6 * std::max(1.0, std::abs(v.b2))) << family.name();
      EXPECT_DOUBLE_EQ(link_mean(family, x), v.mu);
    }
  }
}

TEST(SampleRewardTest, SupportAndExactCases) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(sample_reward(LinkFamily::linear(0.0), 0.3, rng), 0.3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_reward(LinkFamily::logistic(), 30.0, rng), 1.0);
  for (int i = 0; i < 200; ++i) {
    const double y = sample_reward(LinkFamily::logistic(), 0.2, rng);
    EXPECT_TRUE(y == 0.0 || y == 1.0);
    const double c = sample_reward(LinkFamily::poisson(), 1.0, rng);
    EXPECT_GE(c, 0.0);
    EXPECT_EQ(c, std::floor(c));
  }
}

TEST(SampleRewardTest, PoissonMeanAtZero) {
  std::mt19937_64 rng(2024);
  const auto family = LinkFamily::poisson();
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_reward(family, 0.0, rng);
  const double mean = sum / n;
  EXPECT_GE(mean, 0.98);
  EXPECT_LE(mean, 1.02);
}

TEST(SampleRewardTest, LinearNoiseLevel) {
  std::mt19937_64 rng(5);
  const auto family = LinkFamily::linear(0.01);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double e = sample_reward(family, 1.0, rng) - 1.0;
    s += e;
    s2 += e * e;
  }
  EXPECT_NEAR(s / n, 0.0, 5e-4);
  EXPECT_NEAR(std::sqrt(s2 / n), 0.01, 5e-4);
}

TEST(SampleRewardTest, DeterministicAndRejectsClipViolation) {
  for (const auto& family : families()) {
    std::mt19937_64 a(77), b(77);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_reward(family, 0.4, a), sample_reward(family, 0.4, b));
  }
  std::mt19937_64 rng(3);
  EXPECT_THROW(sample_reward(LinkFamily::poisson(3.0), 3.5, rng), InvalidInput);
  EXPECT_THROW(sample_reward(LinkFamily::linear(), std::nan(""), rng), InvalidInput);
}

TEST(GlmLossTest, ClosedFormValues) {
  std::mt19937_64 rng(4);
  const Dims d{2, 3, 2};
  const Tensor3 zero(d);
  auto data = random_data(LinkFamily::logistic(), d, 20, rng);
  EXPECT_DOUBLE_EQ(glm_loss(LinkFamily::linear(), zero, data), 0.0);
  EXPECT_NEAR(glm_loss(LinkFamily::logistic(), zero, data), std::log(2.0), 1e-15);

  const Tensor3 x = testing::gaussian(d, rng);
  const Tensor3 w = testing::gaussian(d, rng);
  const std::vector<Observation> one{{x, 0.7, 1}};
  double eta = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) eta += x.raw()[i] * w.raw()[i];
  EXPECT_NEAR(glm_loss(LinkFamily::linear(), w, one), 0.5 * eta * eta - 0.7 * eta, 1e-12);
  EXPECT_THROW(glm_loss(LinkFamily::linear(), w, std::vector<Observation>{}), InvalidInput);
}

TEST(GlmLossTest, GradientOracles) {
  std::mt19937_64 rng(5);
  const Dims d{3, 2, 2};
  const Tensor3 w = testing::gaussian(d, rng) * 0.5;
  std::vector<Observation> noiseless;
  for (int t = 0; t < 30; ++t) {
    const Tensor3 x = testing::gaussian(d, rng);
    noiseless.push_back({x, x.dot(w), static_cast<std::size_t>(t)});
  }
  EXPECT_LE(glm_loss_gradient(LinkFamily::linear(), w, noiseless).frobenius_norm(), 1e-10);

  std::vector<Observation> balanced;
  Tensor3 expect(d);
  for (int t = 0; t < 10; ++t) {
    const Tensor3 x = testing::gaussian(d, rng);
    const double y = t % 2;
    balanced.push_back({x, y, static_cast<std::size_t>(t)});
    for (std::size_t i = 0; i < x.size(); ++i) expect.data()[i] += (0.5 - y) * x.raw()[i] / 10.0;
  }
  const Tensor3 g = glm_loss_gradient(LinkFamily::logistic(), Tensor3(d), balanced);
  EXPECT_LE(testing::max_abs_diff(g, expect), 1e-14);
}

TEST(GlmLossTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(6);
  const Dims d{3, 3, 2};
  for (const auto& family : families()) {
    const auto data = random_data(family, d, 40, rng);
    const Tensor3 w = testing::gaussian(d, rng) * 0.2;
    const Tensor3 g = glm_loss_gradient(family, w, data);
    Tensor3 fd(d);
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      Tensor3 wp = w, wm = w;
      wp.data()[i] += h;
      wm.data()[i] -= h;
      fd.data()[i] = (glm_loss(family, wp, data) - glm_loss(family, wm, data)) / (2 * h);
    }
    EXPECT_LE((fd - g).frobenius_norm(), 1e-5 * std::max(1.0, g.frobenius_norm())) << family.name();
  }
}

TEST(GlmLossTest, DesignMatrixPathAgrees) {
  std::mt19937_64 rng(7);
  const Dims d{2, 2, 3};
  for (const auto& family : families()) {
    const auto data = random_data(family, d, 25, rng);
    const Tensor3 w = testing::gaussian(d, rng) * 0.3;
    const DesignData design = DesignData::from_observations(data);
    EXPECT_EQ(design.n(), 25u);
    EXPECT_NEAR(glm_loss(family, w.vec().eval(), design), glm_loss(family, w, data), 1e-13);
    const Eigen::VectorXd gv = glm_loss_gradient(family, w.vec().eval(), design);
    EXPECT_LE((gv - glm_loss_gradient(family, w, data).vec()).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(GlmLossTest, Convexity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  const Dims d{3, 2, 2};
  for (const auto& family : families()) {
    const auto data = random_data(family, d, 30, rng);
    for (int trial = 0; trial < 50; ++trial) {
      const Tensor3 w1 = testing::gaussian(d, rng) * 0.5;
      const Tensor3 w2 = testing::gaussian(d, rng) * 0.5;
      const double a = unif(rng);
      const double mid = glm_loss(family, a * w1 + (1 - a) * w2, data);
      EXPECT_LE(mid, a * glm_loss(family, w1, data) + (1 - a) * glm_loss(family, w2, data) + 1e-10);
    }
  }
}

}  // namespace
}  // namespace tband
