#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tband/glm.hpp"
#include "tband/talgebra.hpp"

namespace tband {

struct SolverOptions {
  std::size_t max_iters = 2000;
  double grad_tol = 1e-7;
  double step_init = 1.0;
  double backtrack_beta = 0.5;
  bool use_acceleration = true;
  bool record_log = false;

  void validate() const;
};

struct SolverLogRow {
  std::size_t iter;
  double objective;
  double residual;
  double step;
};

struct FitResult {
  Tensor3 W;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;   ///< relative stationarity residual at the final step size
  double objective = 0.0;  ///< L(W) + lambda ||W||_*
  double step = 0.0;
  std::vector<SolverLogRow> log;  ///< populated when SolverOptions::record_log is set
};

/**
 * Minimizes L(W) + lambda ||W||_* by accelerated proximal gradient with
 * backtracking and function-value restarts, starting from W = 0.
 *
 * Accepted iterates have non-increasing objective. Convergence is declared
 * once ||W - prox(W - s grad L(W), s lambda)||_F / max(1, ||W||_F) <= grad_tol.
 * Hitting max_iters is not an error: the result carries converged = false.
 */
FitResult fit_nuclear_norm_glm(const LinkFamily& family, std::span<const Observation> data,
                               double lambda, const TransformSpec& spec,
                               const SolverOptions& opts = {});

FitResult fit_nuclear_norm_glm(const LinkFamily& family, const DesignData& data, double lambda,
                               const TransformSpec& spec, const SolverOptions& opts = {});

/// Writes `iter,objective,residual,step` rows.
void write_solver_log(std::ostream& out, const std::vector<SolverLogRow>& log);

/// c * sqrt(ell log d3 / (a r n d3^2 min(d1,d2) (1-gamma)^2)).
double default_lambda(std::size_t d1, std::size_t d2, std::size_t d3, std::size_t n, std::size_t r,
                      double a, double gamma, double ell, double c = 1.0);

struct SubspaceEstimate {
  Tensor3 U_hat;   ///< d1 x r x d3
  Tensor3 U_perp;  ///< d1 x (d1-r) x d3
  Tensor3 V_hat;   ///< d2 x r x d3
  Tensor3 V_perp;  ///< d2 x (d2-r) x d3
  Tensor3 W_hat;
  std::size_t r = 0;

  Tensor3 U_full() const { return hcat(U_hat, U_perp); }
  Tensor3 V_full() const { return hcat(V_hat, V_perp); }
};

/// Splits the full t-SVD of W_hat after the first r lateral slices.
SubspaceEstimate extract_subspaces(const Tensor3& w_hat, std::size_t r, const TransformSpec& spec);

/// Number of tubes whose largest singular value exceeds rel_tol * sigma_1.
std::size_t estimate_rank(const Tensor3& w_hat, const TransformSpec& spec, double rel_tol = 1e-3);

/// ||U_perp^T *_L U*||_F * ||V_perp^T *_L V*||_F.
double subspace_distance(const SubspaceEstimate& est, const Tensor3& u_star, const Tensor3& v_star,
                         const TransformSpec& spec);

}  // namespace tband
