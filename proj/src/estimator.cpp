#include "tband/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tband {

void SolverOptions::validate() const {
  if (max_iters == 0) throw InvalidInput("SolverOptions: max_iters must be positive");
  if (!(grad_tol > 0.0)) throw InvalidInput("SolverOptions: grad_tol must be positive");
  if (!(step_init > 0.0)) throw InvalidInput("SolverOptions: step_init must be positive");
  if (!(backtrack_beta > 0.0 && backtrack_beta < 1.0)) {
    throw InvalidInput("SolverOptions: backtrack_beta must lie in (0, 1)");
  }
}

namespace {

constexpr int kMaxBacktracks = 80;

struct Problem {
  const LinkFamily& family;
  const DesignData& data;
  const TransformSpec& spec;
  double lambda;

  double smooth(const Eigen::VectorXd& w) const { return glm_loss(family, w, data); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    return glm_loss_gradient(family, w, data);
  }
  Eigen::VectorXd prox(const Eigen::VectorXd& v, double step) const {
    return svt_prox(Tensor3::from_vec(data.dims, v), step * lambda, spec).vec();
  }
  double penalty(const Eigen::VectorXd& w) const {
    return lambda * nuclear_norm(Tensor3::from_vec(data.dims, w), spec);
  }
  double residual(const Eigen::VectorXd& w, double step) const {
    const Eigen::VectorXd mapped = prox(w - step * gradient(w), step);
    return (w - mapped).norm() / std::max(1.0, w.norm());
  }
};

}  // namespace

FitResult fit_nuclear_norm_glm(const LinkFamily& family, const DesignData& data, double lambda,
                               const TransformSpec& spec, const SolverOptions& opts) {
  opts.validate();
  if (data.n() == 0) throw InvalidInput("fit_nuclear_norm_glm: no observations");
  if (!(lambda > 0.0)) throw InvalidInput("fit_nuclear_norm_glm: lambda must be positive");
  if (data.dims.d3 != spec.d3()) throw InvalidInput("fit_nuclear_norm_glm: transform d3 mismatch");

  const Problem problem{family, data, spec, lambda};
  const auto p = static_cast<Eigen::Index>(data.dims.size());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z = w;
  double objective = problem.smooth(w);
  double step = opts.step_init;
  double momentum = 1.0;
  bool grow = true;

  FitResult result;
  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    result.iterations = iter;
    const double fz = problem.smooth(z);
    const Eigen::VectorXd gz = problem.gradient(z);

    // Optimistically grow the step, then backtrack on the quadratic upper bound.
    double trial = grow ? step / opts.backtrack_beta : step;
    Eigen::VectorXd candidate;
    double f_candidate = 0.0;
    for (int bt = 0;; ++bt) {
      candidate = problem.prox(z - trial * gz, trial);
      f_candidate = problem.smooth(candidate);
      const Eigen::VectorXd d = candidate - z;
      const double bound = fz + gz.dot(d) + d.squaredNorm() / (2.0 * trial);
      if (f_candidate <= bound + 1e-14 * std::abs(bound)) break;
      if (bt == kMaxBacktracks) {
        throw NumericalError("fit_nuclear_norm_glm: line search failed at iteration " +
                             std::to_string(iter));
      }
      trial *= opts.backtrack_beta;
    }
    step = trial;

    const double candidate_objective = f_candidate + problem.penalty(candidate);
    const bool momentum_active = (z - w).squaredNorm() > 0.0;
    if (!(candidate_objective <= objective)) {
      if (momentum_active) {
        // Function-value restart: drop momentum and retry from the last accepted iterate.
        z = w;
        momentum = 1.0;
        continue;
      }
      // A plain proximal step failed to descend: we are at the rounding floor.
      // The residual grows with s, so keep shrinking the step until it certifies
      // stationarity or the step underflows.
      result.residual = problem.residual(w, step);
      if (result.residual <= opts.grad_tol) {
        result.converged = true;
        break;
      }
      grow = false;
      step *= opts.backtrack_beta;
      if (step < 1e-12 * opts.step_init) break;
      continue;
    }

    const Eigen::VectorXd previous = w;
    w = candidate;
    objective = candidate_objective;
    if (opts.use_acceleration) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      z = w + ((momentum - 1.0) / next) * (w - previous);
      momentum = next;
    } else {
      z = w;
    }

    result.residual = problem.residual(w, step);
    if (opts.record_log) result.log.push_back({iter, objective, result.residual, step});
    if (result.residual <= opts.grad_tol) {
      result.converged = true;
      break;
    }
  }

  result.W = Tensor3::from_vec(data.dims, w);
  result.objective = objective;
  result.step = step;
  return result;
}

FitResult fit_nuclear_norm_glm(const LinkFamily& family, std::span<const Observation> data,
                               double lambda, const TransformSpec& spec, const SolverOptions& opts) {
  return fit_nuclear_norm_glm(family, DesignData::from_observations(data), lambda, spec, opts);
}

void write_solver_log(std::ostream& out, const std::vector<SolverLogRow>& log) {
  out << "iter,objective,residual,step\n";
  out.precision(17);
  for (const auto& row : log) {
    out << row.iter << ',' << row.objective << ',' << row.residual << ',' << row.step << '\n';
  }
}

double default_lambda(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t n, std::size_t r,
                      double a, double gamma, double ell, double c) {
  if (d3 < 2) throw InvalidInput("default_lambda: d3 must be at least 2 (log d3 > 0)");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("default_lambda: gamma must lie in [0, 1)");
  if (!(a > 0.0 && a <= 1.0)) throw InvalidInput("default_lambda: a must lie in (0, 1]");
  if (n == 0 || r == 0) throw InvalidInput("default_lambda: n and r must be positive");
  if (!(ell > 0.0) || !(c > 0.0)) throw InvalidInput("default_lambda: ell and c must be positive");
  const double dd3 = static_cast<double>(d3);
  const double denom = a * static_cast<double>(r) * static_cast<double>(n) * dd3 * dd3 *
                       static_cast<double>(std::min(d1, d2)) * (1.0 - gamma) * (1.0 - gamma);
  return c * std::sqrt(ell * std::log(dd3) / denom);
}

SubspaceEstimate extract_subspaces(const Tensor3& w_hat, std::size_t r, const TransformSpec& spec) {
  const std::size_t d1 = w_hat.d1();
  const std::size_t d2 = w_hat.d2();
  if (r == 0 || r > std::min(d1, d2)) {
    throw InvalidInput("extract_subspaces: r=" + std::to_string(r) + " outside [1, " +
                       std::to_string(std::min(d1, d2)) + "]");
  }
  const TSvdFactors f = t_svd(w_hat, spec, SvdMode::Full);
  return SubspaceEstimate{f.U.lateral(0, r), f.U.lateral(r, d1 - r), f.V.lateral(0, r),
                          f.V.lateral(r, d2 - r), w_hat, r};
}

std::size_t estimate_rank(const Tensor3& w_hat, const TransformSpec& spec, double rel_tol) {
  return tubal_rank(t_svd(w_hat, spec), rel_tol);
}

double subspace_distance(const SubspaceEstimate& est, const Tensor3& u_star, const Tensor3& v_star,
                         const TransformSpec& spec) {
  if (u_star.d1() != est.U_hat.d1() || v_star.d1() != est.V_hat.d1() ||
      u_star.d3() != est.U_hat.d3() || v_star.d3() != est.V_hat.d3()) {
    throw InvalidInput("subspace_distance: dimension mismatch");
  }
  if (est.U_perp.d2() == 0 || est.V_perp.d2() == 0) return 0.0;
  const double du = t_product(conj_transpose(est.U_perp, spec), u_star, spec).frobenius_norm();
  const double dv = t_product(conj_transpose(est.V_perp, spec), v_star, spec).frobenius_norm();
  return du * dv;
}

}  // namespace tband
