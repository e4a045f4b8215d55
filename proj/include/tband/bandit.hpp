#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tband/glm.hpp"
#include "tband/talgebra.hpp"

namespace tband {

/**
 * A finite-armed generalized low-rank tensor bandit with known ground truth.
 *
 * Build through make_instance (or the generators below) so the cached
 * per-arm linear predictors and the oracle arm stay consistent with W_star.
 */
struct BanditInstance {
  Tensor3 W_star;
  std::vector<Tensor3> arms;
  LinkFamily family;
  TransformSpec spec = TransformSpec::identity(1);
  std::size_t r_true = 0;
  double omega_min = 0.0;  ///< smallest nonzero singular value of the lift of W_star
  Tensor3 U_star;          ///< leading r_true lateral slices of W_star's t-SVD
  Tensor3 V_star;
  std::uint64_t seed = 0;

  std::vector<double> etas;   ///< <X_a, W_star>
  std::vector<double> means;  ///< mu(<X_a, W_star>)
  std::size_t best_index = 0;
  double best_value = 0.0;

  Dims dims() const { return W_star.dims(); }
  std::size_t n_arms() const { return arms.size(); }
};

/// Validates shapes and fills the oracle-derived fields.
BanditInstance make_instance(Tensor3 w_star, std::vector<Tensor3> arms, LinkFamily family,
                             TransformSpec spec, std::size_t r_true, std::uint64_t seed = 0);

/**
 * W* = P *_L Q with Gaussian P (d1 x r x d3) and Q (r x d2 x d3); arms are
 * standard Gaussian vectors scaled to unit length and reshaped. With
 * `normalize`, W* is rescaled to unit Frobenius norm.
 */
BanditInstance generate_synthetic_instance(std::size_t d1, std::size_t d2, std::size_t d3,
                                           std::size_t r, std::size_t n_arms,
                                           const LinkFamily& family, const TransformSpec& spec,
                                           std::uint64_t seed, bool normalize = true);

/**
 * Arms built from a reward tensor M (n1 x n2 x n3). With M = U *_L S *_L V^T
 * truncated to rho = min(d1, d2) and Gaussian P (d1 x rho), Q (d2 x rho):
 * W* = P *_L Q^T, B = U *_L S *_L P^+, D = V *_L Q^+, and the arm for the pair
 * (i, j) is B(i,:,:)^T *_L D(j,:,:). All n1*n2 pairs are enumerated in
 * row-major (i outer) order. Pseudo-inverses are slice-wise in the transform
 * domain; an ill-conditioned slice (cond > 1e12) is rejected.
 */
BanditInstance instance_from_reward_tensor(const Tensor3& m, std::size_t d1, std::size_t d2,
                                           const LinkFamily& family, const TransformSpec& spec,
                                           std::uint64_t seed);

struct OracleArm {
  std::size_t index;
  double value;
};

/// argmax_a mu(<X_a, W*>), lowest index on ties.
OracleArm oracle_arm(const BanditInstance& instance);

/// Deterministic generator for the reward noise of (seed, round, arm).
std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t round, std::uint64_t arm);

Observation play(const BanditInstance& instance, std::size_t arm_index, std::mt19937_64& rng,
                 std::size_t round = 0);

struct DecisionRow {
  std::size_t round;
  std::size_t arm_index;
  double bonus;
  double predicted_mean;
};

struct RegretTrace {
  std::string policy_name;
  std::uint64_t seed = 0;
  std::vector<std::size_t> arm_indices;
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  std::size_t T1_used = 0;
  std::vector<DecisionRow> decisions;  ///< optional per-round UCB log

  std::size_t rounds() const { return instantaneous.size(); }
};

/// Appends mu(<X*, W*>) - mu(<X_t, W*>) and extends the prefix sum.
void regret_update(RegretTrace& trace, const BanditInstance& instance, std::size_t arm_index);

}  // namespace tband
