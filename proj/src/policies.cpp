#include "tband/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tband {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

std::size_t low_dimension(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t r) {
  return (d1 + d2) * d3 * r - d3 * r * r;
}

RotationContext make_rotation_context(SubspaceEstimate est, const TransformSpec& spec) {
  RotationContext ctx;
  ctx.dims = est.W_hat.dims();
  ctx.r = est.r;
  ctx.p = ctx.dims.size();
  ctx.k = low_dimension(ctx.dims.d1, ctx.dims.d2, ctx.dims.d3, ctx.r);
  ctx.U_full = est.U_full();
  ctx.V_full = est.V_full();
  ctx.U_full_t = conj_transpose(ctx.U_full, spec);
  ctx.V_full_t = conj_transpose(ctx.V_full, spec);
  ctx.est = std::move(est);
  return ctx;
}

Tensor3 rotate_arm(const Tensor3& x, const RotationContext& ctx, const TransformSpec& spec) {
  if (x.dims() != ctx.dims) {
    throw InvalidInput("rotate_arm: arm dims " + to_string(x.dims()) + " vs subspace dims " +
                       to_string(ctx.dims));
  }
  return t_product(t_product(ctx.U_full_t, x, spec), ctx.V_full, spec);
}

Tensor3 unrotate_arm(const Tensor3& x_rot, const RotationContext& ctx, const TransformSpec& spec) {
  if (x_rot.dims() != ctx.dims) throw InvalidInput("unrotate_arm: dimension mismatch");
  return t_product(t_product(ctx.U_full, x_rot, spec), ctx.V_full_t, spec);
}

VectorXd vectorize_rotated(const Tensor3& x_rot, const RotationContext& ctx) {
  if (x_rot.dims() != ctx.dims) {
    throw InvalidInput("vectorize_rotated: dims " + to_string(x_rot.dims()) + " vs " +
                       to_string(ctx.dims));
  }
  const std::size_t d1 = ctx.dims.d1;
  const std::size_t d2 = ctx.dims.d2;
  const std::size_t r = ctx.r;
  VectorXd out(static_cast<Index>(ctx.p));
  Index offset = 0;
  const auto append = [&](const Tensor3& block) {
    const auto n = static_cast<Index>(block.size());
    if (n > 0) out.segment(offset, n) = block.vec();
    offset += n;
  };
  append(x_rot.block(0, r, 0, r));
  append(x_rot.block(r, d1 - r, 0, r));
  append(x_rot.block(0, r, r, d2 - r));
  append(x_rot.block(r, d1 - r, r, d2 - r));
  return out;
}

// ---------------------------------------------------------------------------
// Score equation
// ---------------------------------------------------------------------------

std::size_t ScoreData::add(const VectorXd& x, double reward) {
  if (static_cast<std::size_t>(x.size()) != p_) {
    throw InvalidInput("ScoreData::add: vector length " + std::to_string(x.size()) +
                       ", expected " + std::to_string(p_));
  }
  ++n_obs_;
  std::vector<double> key(x.data(), x.data() + x.size());
  const auto [it, inserted] = index_.try_emplace(std::move(key), points_.size());
  if (inserted) {
    points_.push_back(x);
    counts_.push_back(1.0);
    reward_sums_.push_back(reward);
  } else {
    counts_[it->second] += 1.0;
    reward_sums_[it->second] += reward;
  }
  return it->second;
}

MatrixXd ScoreData::design() const {
  MatrixXd out(static_cast<Index>(points_.size()), static_cast<Index>(p_));
  for (std::size_t j = 0; j < points_.size(); ++j) out.row(static_cast<Index>(j)) = points_[j];
  return out;
}

namespace {

constexpr std::size_t kMaxNewtonIters = 100;

double potential(const LinkFamily& family, const VectorXd& eta, const VectorXd& counts,
                 const VectorXd& sums, const VectorXd& theta, const VectorXd& lambda_diag) {
  double total = 0.5 * theta.dot(lambda_diag.cwiseProduct(theta));
  for (Index j = 0; j < eta.size(); ++j) {
    total += counts(j) * link_eval(family, eta(j)).b - sums(j) * eta(j);
  }
  return total;
}

VectorXd score(const LinkFamily& family, const MatrixXd& x, const VectorXd& eta,
               const VectorXd& counts, const VectorXd& sums, const VectorXd& theta,
               const VectorXd& lambda_diag) {
  VectorXd weights(eta.size());
  for (Index j = 0; j < eta.size(); ++j) {
    weights(j) = counts(j) * link_mean(family, eta(j)) - sums(j);
  }
  VectorXd g = lambda_diag.cwiseProduct(theta);
  if (x.rows() > 0) g.noalias() += x.transpose() * weights;
  return g;
}

}  // namespace

ScoreSolution solve_glm_score(const LinkFamily& family, const ScoreData& data,
                              const VectorXd& lambda_diag, const VectorXd& warm_start,
                              NewtonSystem system) {
  const auto p = static_cast<Index>(data.dimension());
  if (lambda_diag.size() != p) throw InvalidInput("solve_glm_score: Lambda has the wrong length");
  if (!(lambda_diag.array() > 0.0).all()) {
    throw InvalidInput("solve_glm_score: Lambda entries must be positive");
  }

  const MatrixXd x = data.design();
  const VectorXd counts = Eigen::Map<const VectorXd>(data.counts().data(),
                                                     static_cast<Index>(data.counts().size()));
  const VectorXd sums = Eigen::Map<const VectorXd>(data.reward_sums().data(),
                                                   static_cast<Index>(data.reward_sums().size()));
  const Index n = x.rows();

  ScoreSolution sol;
  sol.theta = warm_start.size() == p ? warm_start : VectorXd::Zero(p);
  const double target_norm = n > 0 ? (x.transpose() * sums).norm() : 0.0;
  sol.tolerance = 1e-8 * std::max(1.0, target_norm);
  if (n == 0) {
    sol.theta.setZero();
    return sol;
  }

  const bool low_rank =
      system == NewtonSystem::LowRank || (system == NewtonSystem::Auto && n < p);
  const VectorXd lambda_inv = lambda_diag.cwiseInverse();
  MatrixXd gram;
  if (low_rank) gram.noalias() = x * lambda_inv.asDiagonal() * x.transpose();

  VectorXd eta = x * sol.theta;
  VectorXd g = score(family, x, eta, counts, sums, sol.theta, lambda_diag);
  double f = potential(family, eta, counts, sums, sol.theta, lambda_diag);
  sol.residual = g.norm();

  for (; sol.iterations < kMaxNewtonIters && !(sol.residual <= sol.tolerance); ++sol.iterations) {
    VectorXd curvature(n);
    for (Index j = 0; j < n; ++j) curvature(j) = counts(j) * link_eval(family, eta(j)).b2;

    VectorXd direction;
    if (low_rank) {
      // (Lambda + X^T D X)^{-1} g via Woodbury with D^{1/2} folded in symmetrically.
      const VectorXd sq = curvature.cwiseMax(0.0).cwiseSqrt();
      MatrixXd inner = sq.asDiagonal() * gram * sq.asDiagonal();
      inner.diagonal().array() += 1.0;
      const VectorXd scaled = lambda_inv.cwiseProduct(g);
      const VectorXd rhs = sq.cwiseProduct(x * scaled);
      Eigen::LLT<MatrixXd> llt(inner);
      const VectorXd z = llt.solve(rhs);
      direction = scaled - lambda_inv.cwiseProduct(x.transpose() * sq.cwiseProduct(z));
    } else {
      MatrixXd hessian = x.transpose() * curvature.asDiagonal() * x;
      hessian.diagonal() += lambda_diag;
      Eigen::LLT<MatrixXd> llt(hessian);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("solve_glm_score: Hessian factorization failed");
      }
      direction = llt.solve(g);
    }

    const double slope = g.dot(direction);
    double step = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      const VectorXd trial = sol.theta - step * direction;
      const VectorXd trial_eta = x * trial;
      const double trial_f = potential(family, trial_eta, counts, sums, trial, lambda_diag);
      if (!std::isfinite(trial_f)) continue;
      const bool armijo = trial_f <= f - 1e-4 * step * slope;
      VectorXd trial_g;
      bool better_score = false;
      if (!armijo && trial_f <= f + 1e-12 * std::abs(f)) {
        // Near the optimum the potential is flat to rounding; fall back on the score norm.
        trial_g = score(family, x, trial_eta, counts, sums, trial, lambda_diag);
        better_score = trial_g.norm() < sol.residual;
      }
      if (armijo || better_score) {
        sol.theta = trial;
        eta = trial_eta;
        f = trial_f;
        g = better_score ? trial_g : score(family, x, eta, counts, sums, sol.theta, lambda_diag);
        sol.residual = g.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  if (!(sol.residual <= sol.tolerance)) {
    throw NumericalError("solve_glm_score: Newton stopped after " +
                         std::to_string(sol.iterations) + " iterations with residual " +
                         std::to_string(sol.residual) + " (tolerance " +
                         std::to_string(sol.tolerance) + ")");
  }
  return sol;
}

ScoreSolution solve_glm_score(const LinkFamily& family, std::span<const HistoryEntry> history,
                              const VectorXd& lambda_diag, const VectorXd& warm_start) {
  ScoreData data(static_cast<std::size_t>(lambda_diag.size()));
  for (const auto& entry : history) data.add(entry.x, entry.reward);
  return solve_glm_score(family, data, lambda_diag, warm_start);
}

// ---------------------------------------------------------------------------
// LowGLM-UCB
// ---------------------------------------------------------------------------

void LowGlmUcbParams::validate() const {
  if (p == 0) throw InvalidInput("LowGLM-UCB: p must be positive");
  if (k == 0 || k > p) throw InvalidInput("LowGLM-UCB: k must lie in [1, p]");
  if (!(lambda > 0.0) || !(lambda_perp > 0.0)) {
    throw InvalidInput("LowGLM-UCB: lambda and lambda_perp must be positive");
  }
  if (b_perp < 0.0) throw InvalidInput("LowGLM-UCB: B_perp must be non-negative");
  if (alpha_scale < 0.0) throw InvalidInput("LowGLM-UCB: alpha_scale must be non-negative");
}

double default_lambda_perp(double m_lower, std::size_t T, std::size_t k, double lambda) {
  if (k == 0 || T == 0 || !(lambda > 0.0) || !(m_lower > 0.0)) {
    throw InvalidInput("default_lambda_perp: arguments must be positive");
  }
  const double mt = m_lower * static_cast<double>(T);
  const double kd = static_cast<double>(k);
  return mt / (kd * std::log1p(mt / (kd * lambda)));
}

namespace {
constexpr std::size_t kInverseRefreshPeriod = 200;
}

LowGlmUcbState::LowGlmUcbState(LinkFamily family, LowGlmUcbParams params)
    : family_(family), params_(params), score_(params.p) {
  params_.validate();
  const auto p = static_cast<Index>(params_.p);
  const auto k = static_cast<Index>(params_.k);
  lambda_diag_.resize(p);
  lambda_diag_.head(k).setConstant(params_.lambda);
  lambda_diag_.tail(p - k).setConstant(params_.lambda_perp);
  const double m = family_.m_lower;
  V_ = (lambda_diag_ / m).asDiagonal();
  V_inv_ = (m * lambda_diag_.cwiseInverse()).asDiagonal();
  theta_ = VectorXd::Zero(p);
}

void LowGlmUcbState::rank_one(const VectorXd& x) {
  if (x.size() != V_.rows()) {
    throw InvalidInput("LowGLM-UCB: vector length " + std::to_string(x.size()) + ", expected " +
                       std::to_string(V_.rows()));
  }
  V_.noalias() += x * x.transpose();
  const VectorXd u = V_inv_ * x;
  const double c = 1.0 + x.dot(u);
  V_inv_.noalias() -= (u / c) * u.transpose();
  if (has_registered_arms()) {
    const VectorXd proj = registered_ * u;
    quad_forms_.array() -= proj.array().square() / c;
  }
  if (++updates_since_refresh_ >= kInverseRefreshPeriod) refresh_inverse();
}

void LowGlmUcbState::refresh_inverse() {
  Eigen::LLT<MatrixXd> llt(V_);
  if (llt.info() != Eigen::Success) throw NumericalError("LowGLM-UCB: V lost positive definiteness");
  V_inv_ = llt.solve(MatrixXd::Identity(V_.rows(), V_.cols()));
  V_inv_ = 0.5 * (V_inv_ + V_inv_.transpose()).eval();
  if (has_registered_arms()) {
    quad_forms_ = (registered_ * V_inv_).cwiseProduct(registered_).rowwise().sum();
  }
  updates_since_refresh_ = 0;
}

void LowGlmUcbState::add_prior_observation(const VectorXd& x, double reward) {
  rank_one(x);
  score_.add(x, reward);
}

void LowGlmUcbState::update(const VectorXd& x, double reward) {
  rank_one(x);
  const std::size_t point = score_.add(x, reward);
  history_.emplace_back(point, reward);
  ++round_;
  refit();
}

void LowGlmUcbState::refit() {
  last_solution_ = solve_glm_score(family_, score_, lambda_diag_, theta_);
  theta_ = last_solution_.theta;
}

void LowGlmUcbState::register_arms(MatrixXd arms) {
  if (arms.cols() != V_.cols()) throw InvalidInput("register_arms: arm length mismatch");
  registered_ = std::move(arms);
  refresh_inverse();
}

double LowGlmUcbState::quadratic_form_direct(const VectorXd& x) const {
  Eigen::LLT<MatrixXd> llt(V_);
  if (llt.info() != Eigen::Success) throw NumericalError("LowGLM-UCB: V is numerically singular");
  return x.dot(llt.solve(x));
}

double alpha_bonus(const LowGlmUcbState& state, std::size_t t, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("alpha_bonus: delta must lie in (0, 1)");
  if (t == 0) throw InvalidInput("alpha_bonus: t must be at least 1");
  const auto& prm = state.params();
  const double big_m = state.family().M_upper;
  const double m = state.family().m_lower;
  const double horizon = m * static_cast<double>(t + prm.T1);
  const double kd = static_cast<double>(prm.k);
  double inside = kd * std::log1p(horizon / (kd * prm.lambda)) - std::log(delta * delta);
  if (prm.k < prm.p) inside += horizon / prm.lambda_perp;
  return big_m / m *
         (std::sqrt(inside) +
          std::sqrt(m) * (std::sqrt(prm.lambda) + std::sqrt(prm.lambda_perp) * prm.b_perp));
}

double glm_ucb_radius(double M_upper, double m_lower, std::size_t p, double lambda, std::size_t t,
                      double delta) {
  const double pd = static_cast<double>(p);
  const double mt = m_lower * static_cast<double>(t);
  return M_upper / m_lower *
         (std::sqrt(pd * std::log1p(mt / (pd * lambda)) - std::log(delta * delta)) +
          std::sqrt(m_lower) * std::sqrt(lambda));
}

namespace {

double ucb_width(const LowGlmUcbState& state, double delta) {
  return state.params().alpha_scale * alpha_bonus(state, state.round() + 1, delta / 2.0);
}

}  // namespace

UcbChoice lowglm_ucb_select(const LowGlmUcbState& state, std::span<const VectorXd> arms,
                            double delta) {
  if (arms.empty()) throw InvalidInput("lowglm_ucb_select: empty arm set");
  const double width = ucb_width(state, delta);
  Eigen::LLT<MatrixXd> llt(state.V());
  if (llt.info() != Eigen::Success) throw NumericalError("LowGLM-UCB: V is numerically singular");
  UcbChoice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const VectorXd& x = arms[i];
    if (x.size() != state.V().rows()) throw InvalidInput("lowglm_ucb_select: arm length mismatch");
    const double mean = link_mean(state.family(), x.dot(state.theta_hat()));
    const double bonus = width * std::sqrt(std::max(0.0, x.dot(llt.solve(x))));
    if (mean + bonus > best_score) {
      best_score = mean + bonus;
      best = {i, bonus, mean};
    }
  }
  return best;
}

UcbChoice lowglm_ucb_select_registered(const LowGlmUcbState& state, double delta) {
  if (!state.has_registered_arms()) throw InvalidInput("lowglm_ucb_select: no registered arms");
  const double width = ucb_width(state, delta);
  const VectorXd eta = state.registered_arms() * state.theta_hat();
  const VectorXd& quad = state.registered_quadratic_forms();
  UcbChoice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < eta.size(); ++i) {
    const double mean = link_mean(state.family(), eta(i));
    const double bonus = width * std::sqrt(std::max(0.0, quad(i)));
    if (mean + bonus > best_score) {
      best_score = mean + bonus;
      best = {static_cast<std::size_t>(i), bonus, mean};
    }
  }
  return best;
}

void lowglm_ucb_update(LowGlmUcbState& state, const VectorXd& chosen, double reward) {
  state.update(chosen, reward);
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

double estimate_gap(const BanditInstance& instance, double a, std::size_t r) {
  std::vector<double> gaps;
  gaps.reserve(instance.arms.size());
  for (const auto& x : instance.arms) gaps.push_back(singular_value_gap(x, a, r, instance.spec));
  std::sort(gaps.begin(), gaps.end());
  const std::size_t n = gaps.size();
  return n % 2 == 1 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
}

namespace {

void check_schedule_args(double omega_min, double a, double gamma) {
  if (!(omega_min > 0.0)) throw InvalidInput("schedule: omega_min must be positive");
  if (!(a > 0.0 && a <= 1.0)) throw InvalidInput("schedule: a must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("schedule: gamma must lie in [0, 1)");
}

}  // namespace

double T1_schedule_raw(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T,
                       double omega_min, double a, double gamma, double ell, double c) {
  check_schedule_args(omega_min, a, gamma);
  const double dsum = static_cast<double>(d1 + d2);
  const double dd3 = static_cast<double>(d3);
  return c * std::pow(dsum, 1.5) * std::sqrt(dd3 * ell * std::log(dd3) * static_cast<double>(T)) /
         (omega_min * std::sqrt(a) * (1.0 - gamma));
}

std::size_t default_T1(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T,
                       double omega_min, double a, double gamma, double ell, double c) {
  const double raw = T1_schedule_raw(d1, d2, d3, T, omega_min, a, gamma, ell, c);
  const double lo = static_cast<double>(d3 * (d1 + d2));
  const double hi = static_cast<double>(T / 2);
  const double clamped = std::min(std::max(std::round(raw), lo), hi);
  return static_cast<std::size_t>(std::max(clamped, 1.0));
}

double default_b_perp(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t T1,
                      double omega_min, double a, double gamma, double ell, double c) {
  check_schedule_args(omega_min, a, gamma);
  if (T1 == 0) throw InvalidInput("default_b_perp: T1 must be positive");
  const double dsum = static_cast<double>(d1 + d2);
  const double dd3 = static_cast<double>(d3);
  return ell * c * dsum * dsum * dsum * dd3 * std::log(dd3) /
         (a * static_cast<double>(T1) * (1.0 - gamma) * (1.0 - gamma) * omega_min * omega_min);
}

// ---------------------------------------------------------------------------
// Policy runs
// ---------------------------------------------------------------------------

std::mt19937_64 policy_rng(std::uint64_t seed) {
  constexpr std::uint64_t kPolicyStream = ~std::uint64_t{0};
  return keyed_rng(seed, kPolicyStream, kPolicyStream);
}

namespace {

MatrixXd canonical_arm_matrix(const BanditInstance& instance) {
  const auto p = static_cast<Index>(instance.dims().size());
  MatrixXd out(static_cast<Index>(instance.n_arms()), p);
  for (std::size_t a = 0; a < instance.n_arms(); ++a) {
    out.row(static_cast<Index>(a)) = instance.arms[a].vec().transpose();
  }
  return out;
}

void require_horizon(std::size_t T) {
  if (T < 1) throw InvalidInput("policy run: horizon T must be positive");
}

double play_round(const BanditInstance& instance, std::size_t arm, std::uint64_t seed,
                  std::size_t round) {
  auto rng = keyed_rng(seed, round, arm);
  return play(instance, arm, rng, round).reward;
}

void run_ucb_stage(const BanditInstance& instance, LowGlmUcbState& state, double delta,
                   std::size_t first_round, std::size_t T, std::uint64_t seed, bool record,
                   RegretTrace& trace) {
  for (std::size_t round = first_round; round <= T; ++round) {
    const UcbChoice choice = lowglm_ucb_select_registered(state, delta);
    const double reward = play_round(instance, choice.index, seed, round);
    regret_update(trace, instance, choice.index);
    if (record) trace.decisions.push_back({round, choice.index, choice.bonus, choice.predicted_mean});
    state.update(state.registered_arms().row(static_cast<Index>(choice.index)).transpose(), reward);
  }
}

}  // namespace

RegretTrace run_g_lowtestr(const BanditInstance& instance, std::size_t T,
                           const GLowTestrParams& params, std::uint64_t seed,
                           GLowTestrReport* report) {
  require_horizon(T);
  const Dims dims = instance.dims();
  const std::size_t r = params.r;
  if (r == 0 || r > std::min(dims.d1, dims.d2)) {
    throw InvalidInput("G-LowTESTR: r=" + std::to_string(r) + " outside [1, min(d1, d2)]");
  }
  const double ell = instance.spec.ell();
  GLowTestrReport diag;

  diag.gamma = params.gamma ? *params.gamma : estimate_gap(instance, params.a, r);
  if (!(diag.gamma >= 0.0 && diag.gamma < 1.0)) throw InvalidInput("G-LowTESTR: gamma must lie in [0, 1)");
  diag.T1 = params.T1 ? *params.T1
                      : default_T1(dims.d1, dims.d2, dims.d3, T, instance.omega_min, params.a,
                                   diag.gamma, ell, params.c_T1);
  if (diag.T1 < 1 || diag.T1 >= T) {
    throw InvalidInput("G-LowTESTR: T1=" + std::to_string(diag.T1) + " must lie in [1, T)");
  }

  RegretTrace trace;
  trace.policy_name = "g_lowtestr";
  trace.seed = seed;
  trace.T1_used = diag.T1;

  // Stage 1: uniform exploration.
  auto prng = policy_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, instance.n_arms() - 1);
  std::vector<std::size_t> explored(diag.T1);
  DesignData design;
  design.dims = dims;
  design.X.resize(static_cast<Index>(diag.T1), static_cast<Index>(dims.size()));
  design.y.resize(static_cast<Index>(diag.T1));
  for (std::size_t round = 1; round <= diag.T1; ++round) {
    const std::size_t arm = pick(prng);
    const double reward = play_round(instance, arm, seed, round);
    regret_update(trace, instance, arm);
    explored[round - 1] = arm;
    design.X.row(static_cast<Index>(round - 1)) = instance.arms[arm].vec().transpose();
    design.y(static_cast<Index>(round - 1)) = reward;
  }

  // Subspace estimate.
  diag.lambda_T1 = params.lambda_T1 ? *params.lambda_T1
                                    : default_lambda(dims.d1, dims.d2, dims.d3, diag.T1, r,
                                                     params.a, diag.gamma, ell, params.c_lambda);
  SubspaceEstimate est;
  if (params.oracle_subspace) {
    est = extract_subspaces(instance.W_star, r, instance.spec);
    diag.fit.W = instance.W_star;
    diag.fit.converged = true;
  } else {
    diag.fit = fit_nuclear_norm_glm(instance.family, design, diag.lambda_T1, instance.spec,
                                    params.solver);
    if (!diag.fit.converged) {
      throw NumericalError("G-LowTESTR aborted: nuclear-norm estimator did not converge in " +
                           std::to_string(diag.fit.iterations) + " iterations (residual " +
                           std::to_string(diag.fit.residual) + ")");
    }
    est = extract_subspaces(diag.fit.W, r, instance.spec);
  }
  diag.subspace_distance = subspace_distance(est, instance.U_star, instance.V_star, instance.spec);
  diag.relative_error =
      (diag.fit.W - instance.W_star).frobenius_norm() / instance.W_star.frobenius_norm();

  // Stage 2: LowGLM-UCB in rotated coordinates.
  const RotationContext ctx = make_rotation_context(std::move(est), instance.spec);
  MatrixXd rotated(static_cast<Index>(instance.n_arms()), static_cast<Index>(ctx.p));
  for (std::size_t a = 0; a < instance.n_arms(); ++a) {
    rotated.row(static_cast<Index>(a)) =
        vectorize_rotated(rotate_arm(instance.arms[a], ctx, instance.spec), ctx).transpose();
  }
  diag.k = ctx.k;
  diag.lambda_perp = params.lambda_perp
                         ? *params.lambda_perp
                         : default_lambda_perp(instance.family.m_lower, T, ctx.k, params.lambda);
  diag.b_perp = params.b_perp ? *params.b_perp
                              : default_b_perp(dims.d1, dims.d2, dims.d3, diag.T1,
                                               instance.omega_min, params.a, diag.gamma, ell,
                                               params.c_b_perp);

  LowGlmUcbState state(instance.family, LowGlmUcbParams{ctx.p, ctx.k, params.lambda,
                                                        diag.lambda_perp, diag.b_perp, diag.T1,
                                                        params.alpha_scale});
  for (std::size_t i = 0; i < diag.T1; ++i) {
    state.add_prior_observation(rotated.row(static_cast<Index>(explored[i])).transpose(),
                                design.y(static_cast<Index>(i)));
  }
  state.register_arms(std::move(rotated));
  state.refit();
  run_ucb_stage(instance, state, params.delta, diag.T1 + 1, T, seed, params.record_decisions,
                trace);

  if (report != nullptr) *report = std::move(diag);
  return trace;
}

RegretTrace run_glm_ucb_baseline(const BanditInstance& instance, std::size_t T,
                                 const GlmUcbParams& params, std::uint64_t seed) {
  require_horizon(T);
  const std::size_t p = instance.dims().size();
  LowGlmUcbState state(instance.family,
                       LowGlmUcbParams{p, p, params.lambda, params.lambda, 0.0, 0, params.alpha_scale});
  state.register_arms(canonical_arm_matrix(instance));

  RegretTrace trace;
  trace.policy_name = "glm_ucb";
  trace.seed = seed;
  if (params.fixed_theta) {
    state.set_theta(*params.fixed_theta);
    for (std::size_t round = 1; round <= T; ++round) {
      const UcbChoice choice = lowglm_ucb_select_registered(state, params.delta);
      play_round(instance, choice.index, seed, round);
      regret_update(trace, instance, choice.index);
      if (params.record_decisions) {
        trace.decisions.push_back({round, choice.index, choice.bonus, choice.predicted_mean});
      }
    }
    return trace;
  }
  run_ucb_stage(instance, state, params.delta, 1, T, seed, params.record_decisions, trace);
  return trace;
}

RegretTrace run_uniform_random(const BanditInstance& instance, std::size_t T, std::uint64_t seed) {
  require_horizon(T);
  RegretTrace trace;
  trace.policy_name = "uniform_random";
  trace.seed = seed;
  auto prng = policy_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, instance.n_arms() - 1);
  for (std::size_t round = 1; round <= T; ++round) {
    const std::size_t arm = pick(prng);
    play_round(instance, arm, seed, round);
    regret_update(trace, instance, arm);
  }
  return trace;
}

}  // namespace tband
