#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"
#include "tband/bandit.hpp"
#include "tband/policies.hpp"

namespace tband {
namespace {

TEST(SyntheticInstanceTest, PaperShapeAndNormalization) {
  const auto spec = TransformSpec::identity(3);
  const auto inst = generate_synthetic_instance(10, 10, 3, 1, 100, LinkFamily::linear(), spec, 0);
  EXPECT_EQ(inst.dims(), (Dims{10, 10, 3}));
  EXPECT_EQ(inst.n_arms(), 100u);
  EXPECT_NEAR(inst.W_star.frobenius_norm(), 1.0, 1e-12);
  for (const auto& arm : inst.arms) EXPECT_NEAR(arm.frobenius_norm(), 1.0, 1e-12);
  EXPECT_EQ(tubal_rank(t_svd(inst.W_star, spec)), 1u);
  EXPECT_GT(inst.omega_min, 0.0);
  EXPECT_EQ(inst.U_star.dims(), (Dims{10, 1, 3}));

  const auto raw = generate_synthetic_instance(10, 10, 3, 1, 100, LinkFamily::linear(), spec, 0, false);
  EXPECT_GT(raw.W_star.frobenius_norm(), 1.0);
  EXPECT_LE(testing::max_abs_diff(raw.W_star * (1.0 / raw.W_star.frobenius_norm()), inst.W_star), 1e-14);
}

TEST(SyntheticInstanceTest, GenericFullRank) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto spec = TransformSpec::dct(2);
    const auto inst = generate_synthetic_instance(4, 3, 2, 3, 5, LinkFamily::logistic(), spec, seed);
    EXPECT_EQ(tubal_rank(t_svd(inst.W_star, spec)), 3u);
  }
}

TEST(SyntheticInstanceTest, OmegaMinIsSmallestLiftSingularValue) {
  const auto spec = TransformSpec::dct(3);
  const auto inst = generate_synthetic_instance(6, 5, 3, 2, 10, LinkFamily::linear(), spec, 4);
  Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(18, 15);
  for (std::size_t k = 0; k < 3; ++k) {
    lift.block(6 * k, 5 * k, 6, 5) = testing::breve_slice(inst.W_star, spec.matrix(), k);
  }
  Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(lift).singularValues();
  double smallest = sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) smallest = sv(i);
  EXPECT_NEAR(inst.omega_min, smallest, 1e-10);
}

TEST(SyntheticInstanceTest, DeterministicAndValidated) {
  const auto spec = TransformSpec::identity(2);
  const auto a = generate_synthetic_instance(3, 3, 2, 1, 4, LinkFamily::linear(), spec, 17);
  const auto b = generate_synthetic_instance(3, 3, 2, 1, 4, LinkFamily::linear(), spec, 17);
  EXPECT_EQ(a.W_star, b.W_star);
  EXPECT_EQ(a.arms, b.arms);
  EXPECT_THROW(generate_synthetic_instance(3, 3, 2, 4, 4, LinkFamily::linear(), spec, 0), InvalidInput);
  EXPECT_THROW(generate_synthetic_instance(3, 3, 2, 0, 4, LinkFamily::linear(), spec, 0), InvalidInput);
  EXPECT_THROW(generate_synthetic_instance(3, 3, 2, 1, 1, LinkFamily::linear(), spec, 0), InvalidInput);
}

TEST(RewardTensorInstanceTest, SmallConstruction) {
  const auto spec = TransformSpec::dct(2);
  Tensor3 m(4, 4, 2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 2; ++k) m(i, i, k) = 1.0 + static_cast<double>(i) + 0.5 * k;
  const auto inst = instance_from_reward_tensor(m, 4, 4, LinkFamily::linear(), spec, 3);
  EXPECT_EQ(inst.n_arms(), 16u);
  EXPECT_EQ(inst.dims(), (Dims{4, 4, 2}));
  for (const auto& arm : inst.arms) {
    for (double v : arm.raw()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_LT(arm.frobenius_norm(), 1e6);
  }
  std::mt19937_64 rng(1);
  const auto rect =
      instance_from_reward_tensor(testing::gaussian({5, 3, 2}, rng), 2, 3, LinkFamily::linear(), spec, 1);
  EXPECT_EQ(rect.n_arms(), 15u);
  EXPECT_EQ(rect.dims(), (Dims{2, 3, 2}));
}

TEST(RewardTensorInstanceTest, RejectsDegenerateInput) {
  const auto spec = TransformSpec::identity(2);
  EXPECT_THROW(instance_from_reward_tensor(Tensor3(4, 4, 2), 2, 2, LinkFamily::linear(), spec, 0),
               InvalidInput);
  EXPECT_THROW(instance_from_reward_tensor(Tensor3(2, 2, 2), 3, 3, LinkFamily::linear(), spec, 0),
               InvalidInput);
}

TEST(OracleArmTest, ScanAndTies) {
  const auto spec = TransformSpec::identity(2);
  std::mt19937_64 rng(2);
  const Tensor3 w = testing::gaussian({2, 2, 2}, rng);
  const Tensor3 x = testing::gaussian({2, 2, 2}, rng);
  const Tensor3 plus = x.dot(w) > 0 ? x : x * -1.0;
  auto inst = make_instance(w, {plus * -1.0, plus}, LinkFamily::linear(), spec, 1);
  EXPECT_EQ(oracle_arm(inst).index, 1u);
  EXPECT_EQ(oracle_arm(make_instance(w, {x}, LinkFamily::linear(), spec, 1)).index, 0u);
  EXPECT_EQ(oracle_arm(make_instance(w, {x, x, plus, plus}, LinkFamily::linear(), spec, 1)).index,
            x.dot(w) > 0 ? 0u : 2u);

  const auto big = generate_synthetic_instance(10, 10, 3, 1, 100, LinkFamily::logistic(),
                                               TransformSpec::identity(3), 5);
  std::size_t best = 0;
  for (std::size_t a = 0; a < big.n_arms(); ++a) {
    double eta = 0.0, eta_best = 0.0;
    for (std::size_t i = 0; i < big.W_star.size(); ++i) {
      eta += big.arms[a].raw()[i] * big.W_star.raw()[i];
      eta_best += big.arms[best].raw()[i] * big.W_star.raw()[i];
    }
    if (eta > eta_best) best = a;
  }
  EXPECT_EQ(oracle_arm(big).index, best);
  EXPECT_EQ(big.best_index, best);
}

TEST(OracleArmTest, InvariantUnderMonotoneLinks) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto spec = TransformSpec::dct(3);
    const auto lin = generate_synthetic_instance(5, 5, 3, 1, 50, LinkFamily::linear(), spec, seed);
    const auto lg = make_instance(lin.W_star, lin.arms, LinkFamily::logistic(), spec, 1);
    const auto po = make_instance(lin.W_star, lin.arms, LinkFamily::poisson(), spec, 1);
    EXPECT_EQ(oracle_arm(lin).index, oracle_arm(lg).index);
    EXPECT_EQ(oracle_arm(lin).index, oracle_arm(po).index);
  }
}

TEST(PlayTest, RewardsAndDeterminism) {
  const auto spec = TransformSpec::identity(3);
  const auto lin = generate_synthetic_instance(4, 4, 3, 1, 6, LinkFamily::linear(0.0), spec, 1);
  std::mt19937_64 rng(1);
  const Observation o = play(lin, 2, rng, 7);
  EXPECT_EQ(o.reward, lin.etas[2]);
  EXPECT_EQ(o.round, 7u);
  EXPECT_EQ(o.arm, lin.arms[2]);
  EXPECT_THROW(play(lin, 6, rng), InvalidInput);

  const auto lg = make_instance(lin.W_star, lin.arms, LinkFamily::logistic(), spec, 1);
  for (int i = 0; i < 50; ++i) {
    const double y = play(lg, i % 6, rng).reward;
    EXPECT_TRUE(y == 0.0 || y == 1.0);
  }
  auto r1 = keyed_rng(3, 10, 2);
  auto r2 = keyed_rng(3, 10, 2);
  EXPECT_EQ(play(lg, 2, r1).reward, play(lg, 2, r2).reward);
  EXPECT_NE(keyed_rng(3, 10, 2)(), keyed_rng(3, 11, 2)());
  EXPECT_NE(keyed_rng(3, 10, 2)(), keyed_rng(4, 10, 2)());
}

TEST(RegretTest, PrefixSums) {
  const auto spec = TransformSpec::identity(1);
  Tensor3 w(1, 1, 1);
  w(0, 0, 0) = 1.0;
  std::vector<Tensor3> arms(3, Tensor3(1, 1, 1));
  arms[0](0, 0, 0) = 1.0;
  arms[1](0, 0, 0) = 0.8;
  arms[2](0, 0, 0) = 0.7;
  const auto inst = make_instance(w, arms, LinkFamily::linear(), spec, 1);
  RegretTrace trace;
  regret_update(trace, inst, 0);
  EXPECT_EQ(trace.instantaneous.back(), 0.0);
  regret_update(trace, inst, 1);
  regret_update(trace, inst, 2);
  EXPECT_NEAR(trace.instantaneous[1], 0.2, 1e-15);
  EXPECT_NEAR(trace.cumulative[2], 0.5, 1e-15);
  EXPECT_EQ(trace.arm_indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(trace.rounds(), 3u);
  EXPECT_THROW(regret_update(trace, inst, 3), InvalidInput);
}

TEST(RegretTest, UniformRandomGrowsLinearly) {
  const auto inst = generate_synthetic_instance(10, 10, 3, 1, 100, LinkFamily::linear(0.01),
                                                TransformSpec::identity(3), 0);
  double mean_gap = 0.0;
  for (double m : inst.means) mean_gap += inst.best_value - m;
  mean_gap /= static_cast<double>(inst.n_arms());
  const RegretTrace trace = run_uniform_random(inst, 500, 42);
  ASSERT_EQ(trace.rounds(), 500u);
  EXPECT_NEAR(trace.cumulative.back(), 500 * mean_gap, 0.2 * 500 * mean_gap);
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    EXPECT_GE(trace.instantaneous[t], -1e-12);
    if (t > 0) EXPECT_GE(trace.cumulative[t], trace.cumulative[t - 1]);
  }
}

}  // namespace
}  // namespace tband
