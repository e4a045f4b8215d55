#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tband/bandit.hpp"
#include "tband/estimator.hpp"

namespace tband {

// ---------------------------------------------------------------------------
// Rotation into the estimated subspaces
// ---------------------------------------------------------------------------

/**
 * Coordinates adapted to an estimated subspace pair. A tensor X is rotated to
 * X' = [U U_perp]^T *_L X *_L [V V_perp] and flattened block by block:
 * (1:r, 1:r), (r+1:d1, 1:r), (1:r, r+1:d2), (r+1:d1, r+1:d2). The first k
 * coordinates are the three blocks that touch the estimated subspaces.
 */
struct RotationContext {
  SubspaceEstimate est;
  Dims dims;
  std::size_t r = 0;
  std::size_t k = 0;  ///< (d1 + d2) d3 r - d3 r^2
  std::size_t p = 0;  ///< d1 d2 d3
  Tensor3 U_full;     ///< [U_hat U_perp]
  Tensor3 V_full;     ///< [V_hat V_perp]
  Tensor3 U_full_t;   ///< [U_hat U_perp]^T
  Tensor3 V_full_t;
};

RotationContext make_rotation_context(SubspaceEstimate est, const TransformSpec& spec);

std::size_t low_dimension(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t r);

Tensor3 rotate_arm(const Tensor3& x, const RotationContext& ctx, const TransformSpec& spec);
Tensor3 unrotate_arm(const Tensor3& x_rot, const RotationContext& ctx, const TransformSpec& spec);

Eigen::VectorXd vectorize_rotated(const Tensor3& x_rot, const RotationContext& ctx);

// ---------------------------------------------------------------------------
// Regularized GLM score equation
// ---------------------------------------------------------------------------

struct HistoryEntry {
  Eigen::VectorXd x;
  double reward;
};

/**
 * Observations grouped by distinct design point. The score equation only
 * depends on the history through per-point counts and reward sums, so a
 * finite arm set keeps every solve at (#distinct points) x p cost.
 */
class ScoreData {
 public:
  explicit ScoreData(std::size_t p = 0) : p_(p) {}

  /// Adds one observation and returns the index of its design point.
  std::size_t add(const Eigen::VectorXd& x, double reward);

  std::size_t dimension() const { return p_; }
  std::size_t n_points() const { return points_.size(); }
  std::size_t n_observations() const { return n_obs_; }

  /// n_points x p, one distinct design point per row.
  Eigen::MatrixXd design() const;
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<double>& counts() const { return counts_; }
  const std::vector<double>& reward_sums() const { return reward_sums_; }

 private:
  std::size_t p_;
  std::size_t n_obs_ = 0;
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> counts_;
  std::vector<double> reward_sums_;
  std::map<std::vector<double>, std::size_t> index_;
};

struct ScoreSolution {
  Eigen::VectorXd theta;
  double residual = 0.0;   ///< ||score||_2
  double tolerance = 0.0;  ///< 1e-8 * max(1, ||sum y_i x_i||_2)
  std::size_t iterations = 0;
};

enum class NewtonSystem {
  Auto,      ///< low-rank update when there are fewer distinct points than dimensions
  Direct,    ///< Cholesky of the full p x p Hessian
  LowRank,   ///< Woodbury identity around the diagonal regularizer
};

/**
 * Solves sum_i mu(x_i^T theta) x_i + Lambda theta = sum_i y_i x_i by damped
 * Newton on the strictly convex potential. Throws NumericalError carrying the
 * final residual when 100 iterations do not reach the tolerance.
 */
ScoreSolution solve_glm_score(const LinkFamily& family, const ScoreData& data,
                              const Eigen::VectorXd& lambda_diag, const Eigen::VectorXd& warm_start,
                              NewtonSystem system = NewtonSystem::Auto);

ScoreSolution solve_glm_score(const LinkFamily& family, std::span<const HistoryEntry> history,
                              const Eigen::VectorXd& lambda_diag, const Eigen::VectorXd& warm_start);

// ---------------------------------------------------------------------------
// LowGLM-UCB
// ---------------------------------------------------------------------------

struct LowGlmUcbParams {
  std::size_t p = 0;
  std::size_t k = 0;
  double lambda = 1.0;
  double lambda_perp = 1.0;
  double b_perp = 0.0;
  std::size_t T1 = 0;
  double alpha_scale = 1.0;  ///< multiplies the confidence width in arm selection

  void validate() const;
};

/// mT / (k log(1 + mT / (k lambda))).
double default_lambda_perp(double m_lower, std::size_t T, std::size_t k, double lambda);

class LowGlmUcbState {
 public:
  LowGlmUcbState(LinkFamily family, LowGlmUcbParams params);

  /// Folds an exploration-stage observation into V and the score data (no round advance).
  void add_prior_observation(const Eigen::VectorXd& x, double reward);
  /// Records a UCB-stage observation: V += x x^T, history append, theta re-solved.
  void update(const Eigen::VectorXd& x, double reward);
  /// Re-solves theta_hat from the current score data.
  void refit();

  /// Caches x^T V^{-1} x for a fixed arm set, maintained through rank-one updates.
  void register_arms(Eigen::MatrixXd arms);
  bool has_registered_arms() const { return registered_.rows() > 0; }
  const Eigen::MatrixXd& registered_arms() const { return registered_; }
  const Eigen::VectorXd& registered_quadratic_forms() const { return quad_forms_; }

  /// x^T V^{-1} x by a fresh Cholesky solve.
  double quadratic_form_direct(const Eigen::VectorXd& x) const;

  const LinkFamily& family() const { return family_; }
  const LowGlmUcbParams& params() const { return params_; }
  const Eigen::VectorXd& theta_hat() const { return theta_; }
  void set_theta(const Eigen::VectorXd& theta) { theta_ = theta; }
  const Eigen::MatrixXd& V() const { return V_; }
  const Eigen::MatrixXd& V_inverse() const { return V_inv_; }
  const Eigen::VectorXd& Lambda() const { return lambda_diag_; }
  const ScoreData& score_data() const { return score_; }
  /// UCB-stage history as (design point index, reward) pairs.
  const std::vector<std::pair<std::size_t, double>>& history() const { return history_; }
  std::size_t round() const { return round_; }
  const ScoreSolution& last_solution() const { return last_solution_; }

 private:
  void rank_one(const Eigen::VectorXd& x);
  void refresh_inverse();

  LinkFamily family_;
  LowGlmUcbParams params_;
  Eigen::VectorXd lambda_diag_;
  Eigen::MatrixXd V_;
  Eigen::MatrixXd V_inv_;
  Eigen::VectorXd theta_;
  ScoreData score_;
  std::vector<std::pair<std::size_t, double>> history_;
  std::size_t round_ = 0;
  std::size_t updates_since_refresh_ = 0;
  Eigen::MatrixXd registered_;
  Eigen::VectorXd quad_forms_;
  ScoreSolution last_solution_;
};

/**
 * Confidence radius alpha_t(delta) of the almost-low-dimensional GLM-UCB:
 * (M/m) (sqrt(k log(1 + m(t+T1)/(k lambda)) + m(t+T1)/lambda_perp - log delta^2)
 *        + sqrt(m) (sqrt(lambda) + sqrt(lambda_perp) B_perp)).
 * The m(t+T1)/lambda_perp term accounts for the p - k complement coordinates
 * and vanishes when k == p.
 */
double alpha_bonus(const LowGlmUcbState& state, std::size_t t, double delta);

/// Standard GLM-UCB radius (M/m)(sqrt(p log(1 + mt/(p lambda)) - log delta^2) + sqrt(m lambda)).
double glm_ucb_radius(double M_upper, double m_lower, std::size_t p, double lambda, std::size_t t,
                      double delta);

struct UcbChoice {
  std::size_t index = 0;
  double bonus = 0.0;           ///< alpha_scale * alpha_t(delta/2) * ||x||_{V^-1}
  double predicted_mean = 0.0;  ///< mu(x^T theta_hat)
};

/// argmax_x mu(x^T theta) + alpha_t(delta/2) ||x||_{V^-1}; lowest index on ties.
UcbChoice lowglm_ucb_select(const LowGlmUcbState& state, std::span<const Eigen::VectorXd> arms,
                            double delta);
/// Same rule over the registered arm set, using the cached quadratic forms.
UcbChoice lowglm_ucb_select_registered(const LowGlmUcbState& state, double delta);

void lowglm_ucb_update(LowGlmUcbState& state, const Eigen::VectorXd& chosen, double reward);

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

struct GLowTestrParams {
  std::optional<std::size_t> T1;        ///< empty: exploration-length schedule
  double c_T1 = 1.0;                    ///< constant in front of the T1 schedule
  std::size_t r = 1;
  std::optional<double> lambda_T1;      ///< empty: default_lambda schedule
  double c_lambda = 1.0;
  double lambda = 1.0;
  std::optional<double> lambda_perp;    ///< empty: mT / (k log(1 + mT/(k lambda)))
  std::optional<double> b_perp;         ///< empty: B_perp schedule
  double c_b_perp = 1.0;
  double delta = 0.01;
  double a = 1.0;
  std::optional<double> gamma;          ///< empty: median gap over the arm pool
  double alpha_scale = 1.0;
  bool oracle_subspace = false;         ///< use W*'s own subspaces (diagnostic runs)
  SolverOptions solver{};
  bool record_decisions = false;
};

struct GlmUcbParams {
  double lambda = 1.0;
  double delta = 0.01;
  double alpha_scale = 1.0;
  std::optional<Eigen::VectorXd> fixed_theta;  ///< skip estimation (oracle-greedy checks)
  bool record_decisions = false;
};

/// Extra diagnostics of a G-LowTESTR run.
struct GLowTestrReport {
  std::size_t T1 = 0;
  double lambda_T1 = 0.0;
  double lambda_perp = 0.0;
  double b_perp = 0.0;
  double gamma = 0.0;
  std::size_t k = 0;
  FitResult fit;
  double subspace_distance = 0.0;
  double relative_error = 0.0;  ///< ||W_hat - W*||_F / ||W*||_F
};

/// Median of singular_value_gap over the arm pool.
double estimate_gap(const BanditInstance& instance, double a, std::size_t r);

/**
 * c (d1+d2)^{3/2} sqrt(d3 ell log(d3) T) / (omega_min sqrt(a) (1 - gamma)),
 * rounded and clamped to [d3 (d1 + d2), T/2].
 */
std::size_t default_T1(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T,
                       double omega_min, double a, double gamma, double ell, double c = 1.0);

/// The same expression before rounding and clamping.
double T1_schedule_raw(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T,
                       double omega_min, double a, double gamma, double ell, double c = 1.0);

/// ell * c (d1+d2)^3 d3 log d3 / (a T1 (1-gamma)^2 omega_min^2).
double default_b_perp(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T1,
                      double omega_min, double a, double gamma, double ell, double c = 1.0);

/**
 * Explore-subspace-then-refine. Rounds 1..T1 pull arms uniformly at random;
 * the nuclear-norm GLM estimate then fixes the rotation, and LowGLM-UCB runs
 * for the remaining T - T1 rounds with the exploration data reused in rotated
 * coordinates. Reward noise for round t and arm a comes from keyed_rng(seed, t, a).
 */
RegretTrace run_g_lowtestr(const BanditInstance& instance, std::size_t T,
                           const GLowTestrParams& params, std::uint64_t seed,
                           GLowTestrReport* report = nullptr);

/// LowGLM-UCB with k = p, lambda_perp = lambda, B_perp = 0, T1 = 0 on canonical vec(X).
RegretTrace run_glm_ucb_baseline(const BanditInstance& instance, std::size_t T,
                                 const GlmUcbParams& params, std::uint64_t seed);

/// Uniformly random arm every round.
RegretTrace run_uniform_random(const BanditInstance& instance, std::size_t T, std::uint64_t seed);

/// Generator for a policy's own randomness, independent of the reward streams.
std::mt19937_64 policy_rng(std::uint64_t seed);

}  // namespace tband
