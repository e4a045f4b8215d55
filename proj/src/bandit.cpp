#include "tband/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tband {

namespace {

Tensor3 gaussian_tensor(std::size_t d1, std::size_t d2, std::size_t d3, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor3 out(d1, d2, d3);
  for (double& v : out.data()) v = normal(rng);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

BanditInstance make_instance(Tensor3 w_star, std::vector<Tensor3> arms, LinkFamily family,
                             TransformSpec spec, std::size_t r_true, std::uint64_t seed) {
  if (arms.empty()) throw InvalidInput("bandit instance: arm set is empty");
  if (w_star.d3() != spec.d3()) throw InvalidInput("bandit instance: transform d3 mismatch");
  const std::size_t rho = std::min(w_star.d1(), w_star.d2());
  if (r_true == 0 || r_true > rho) {
    throw InvalidInput("bandit instance: r_true=" + std::to_string(r_true) + " outside [1, " +
                       std::to_string(rho) + "]");
  }
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (arms[a].dims() != w_star.dims()) {
      throw InvalidInput("bandit instance: arm " + std::to_string(a) + " has dims " +
                         to_string(arms[a].dims()) + ", expected " + to_string(w_star.dims()));
    }
  }

  BanditInstance inst;
  const TSvdFactors f = t_svd(w_star, spec);
  double omega = std::numeric_limits<double>::infinity();
  for (const auto& sv : f.slice_singular_values) omega = std::min(omega, sv[r_true - 1]);
  inst.omega_min = omega;
  inst.U_star = f.U.lateral(0, r_true);
  inst.V_star = f.V.lateral(0, r_true);

  inst.etas.reserve(arms.size());
  inst.means.reserve(arms.size());
  for (const auto& x : arms) {
    const double eta = x.dot(w_star);
    inst.etas.push_back(eta);
    inst.means.push_back(link_mean(family, eta));
  }
  inst.W_star = std::move(w_star);
  inst.arms = std::move(arms);
  inst.family = family;
  inst.spec = std::move(spec);
  inst.r_true = r_true;
  inst.seed = seed;
  const OracleArm best = oracle_arm(inst);
  inst.best_index = best.index;
  inst.best_value = best.value;
  return inst;
}

BanditInstance generate_synthetic_instance(std::size_t d1, std::size_t d2, std::size_t d3,
                                           std::size_t r, std::size_t n_arms,
                                           const LinkFamily& family, const TransformSpec& spec,
                                           std::uint64_t seed, bool normalize) {
  if (r == 0 || r > std::min(d1, d2)) {
    throw InvalidInput("generate_synthetic_instance: r=" + std::to_string(r) + " outside [1, " +
                       std::to_string(std::min(d1, d2)) + "]");
  }
  if (n_arms < 2) throw InvalidInput("generate_synthetic_instance: need at least two arms");
  if (spec.d3() != d3) throw InvalidInput("generate_synthetic_instance: transform d3 mismatch");

  std::mt19937_64 rng(seed);
  const Tensor3 p = gaussian_tensor(d1, r, d3, rng);
  const Tensor3 q = gaussian_tensor(r, d2, d3, rng);
  Tensor3 w = t_product(p, q, spec);
  if (normalize) w *= 1.0 / w.frobenius_norm();

  std::vector<Tensor3> arms;
  arms.reserve(n_arms);
  for (std::size_t a = 0; a < n_arms; ++a) {
    Tensor3 x = gaussian_tensor(d1, d2, d3, rng);
    x *= 1.0 / x.frobenius_norm();
    arms.push_back(std::move(x));
  }
  return make_instance(std::move(w), std::move(arms), family, spec, r, seed);
}

BanditInstance instance_from_reward_tensor(const Tensor3& m, std::size_t d1, std::size_t d2,
                                           const LinkFamily& family, const TransformSpec& spec,
                                           std::uint64_t seed) {
  const std::size_t rho = std::min(d1, d2);
  if (rho == 0) throw InvalidInput("instance_from_reward_tensor: d1 and d2 must be positive");
  if (rho > std::min(m.d1(), m.d2())) {
    throw InvalidInput("instance_from_reward_tensor: min(d1, d2)=" + std::to_string(rho) +
                       " exceeds the rank capacity of M (" + to_string(m.dims()) + ")");
  }
  if (m.d3() != spec.d3()) throw InvalidInput("instance_from_reward_tensor: transform d3 mismatch");

  const TSvdFactors f = t_svd(m, spec);
  const Tensor3 u = f.U.lateral(0, rho);
  const Tensor3 s = f.S.block(0, rho, 0, rho);
  const Tensor3 v = f.V.lateral(0, rho);
  // Rejects a zero or numerically rank-deficient reward tensor.
  (void)t_pseudo_inverse(s, spec);

  std::mt19937_64 rng(seed);
  const Tensor3 p = gaussian_tensor(d1, rho, m.d3(), rng);
  const Tensor3 q = gaussian_tensor(d2, rho, m.d3(), rng);
  Tensor3 w = t_product(p, conj_transpose(q, spec), spec);

  const Tensor3 rows = t_product(t_product(u, s, spec), t_pseudo_inverse(p, spec), spec);
  const Tensor3 cols = t_product(v, t_pseudo_inverse(q, spec), spec);

  std::vector<Tensor3> arms;
  arms.reserve(m.d1() * m.d2());
  for (std::size_t i = 0; i < m.d1(); ++i) {
    const Tensor3 row_t = conj_transpose(rows.block(i, 1, 0, d1), spec);
    for (std::size_t j = 0; j < m.d2(); ++j) {
      arms.push_back(t_product(row_t, cols.block(j, 1, 0, d2), spec));
    }
  }
  return make_instance(std::move(w), std::move(arms), family, spec, rho, seed);
}

OracleArm oracle_arm(const BanditInstance& instance) {
  if (instance.arms.empty()) throw InvalidInput("oracle_arm: arm set is empty");
  OracleArm best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t a = 0; a < instance.arms.size(); ++a) {
    const double value = a < instance.means.size()
                             ? instance.means[a]
                             : link_mean(instance.family, instance.arms[a].dot(instance.W_star));
    if (value > best.value) best = {a, value};
  }
  return best;
}

std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t round, std::uint64_t arm) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ round);
  h = splitmix64(h ^ arm);
  return std::mt19937_64(h);
}

Observation play(const BanditInstance& instance, std::size_t arm_index, std::mt19937_64& rng,
                 std::size_t round) {
  if (arm_index >= instance.arms.size()) {
    throw InvalidInput("play: arm index " + std::to_string(arm_index) + " out of range (" +
                       std::to_string(instance.arms.size()) + " arms)");
  }
  const double eta = instance.etas.empty() ? instance.arms[arm_index].dot(instance.W_star)
                                           : instance.etas[arm_index];
  return Observation{instance.arms[arm_index], sample_reward(instance.family, eta, rng), round};
}

void regret_update(RegretTrace& trace, const BanditInstance& instance, std::size_t arm_index) {
  if (arm_index >= instance.arms.size()) {
    throw InvalidInput("regret_update: arm index " + std::to_string(arm_index) + " out of range");
  }
  const double gap = instance.best_value - instance.means[arm_index];
  trace.arm_indices.push_back(arm_index);
  trace.instantaneous.push_back(gap);
  trace.cumulative.push_back((trace.cumulative.empty() ? 0.0 : trace.cumulative.back()) + gap);
}

}  // namespace tband
