#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tband/tensor3.hpp"
#include "tband/transform.hpp"

namespace tband {

/// C = A *_L B: slice-wise matrix product in the transform domain.
Tensor3 t_product(const Tensor3& a, const Tensor3& b, const TransformSpec& spec);

/// A^T with bdiag(transform(A^T)) = bdiag(A_breve)^T.
Tensor3 conj_transpose(const Tensor3& a, const TransformSpec& spec);

/// m x m x d3 tensor whose transform-domain slices are all I_m.
Tensor3 identity_tensor(std::size_t m, std::size_t d3, const TransformSpec& spec);

enum class SvdMode {
  Thin,  ///< rho = min(d1, d2) lateral slices in U and V
  Full,  ///< U is d1 x d1, S is d1 x d2, V is d2 x d2
};

/// Factors of A = U *_L S *_L V^T.
struct TSvdFactors {
  Tensor3 U;
  Tensor3 S;  ///< f-diagonal
  Tensor3 V;
  /// Transform-domain singular values, one non-increasing list per slice.
  std::vector<std::vector<double>> slice_singular_values;

  std::size_t rank_capacity() const { return S.d1() < S.d2() ? S.d1() : S.d2(); }
};

/// Transformed t-SVD. Throws NumericalError naming the slice if an SVD fails.
TSvdFactors t_svd(const Tensor3& a, const TransformSpec& spec, SvdMode mode = SvdMode::Thin);

/// Number of indices i with max_k |S_breve(i,i,k)| > tol * (largest singular value).
std::size_t tubal_rank(const TSvdFactors& factors, double tol = 1e-8);

/// Per-slice singular values of A_breve, each sorted non-increasing.
std::vector<Eigen::VectorXd> transform_singular_values(const Tensor3& a, const TransformSpec& spec);

/**
 * Slice-wise Moore-Penrose pseudo-inverse in the transform domain (n2 x n1 x d3).
 * Throws InvalidInput naming the slice when a slice is rank deficient or its
 * condition number exceeds max_condition.
 */
Tensor3 t_pseudo_inverse(const Tensor3& a, const TransformSpec& spec, double max_condition = 1e12);

/// ||A||_2 = largest singular value of the block-diagonal lift.
double spectral_norm(const Tensor3& a, const TransformSpec& spec);

/// ||A||_* = (1/ell) * sum of all transform-domain singular values.
double nuclear_norm(const Tensor3& a, const TransformSpec& spec);

/// argmin_W 0.5 ||W - A||_F^2 + tau ||W||_*.
Tensor3 svt_prox(const Tensor3& a, double tau, const TransformSpec& spec);

/**
 * Relative gap (sigma_1 - sigma_q) / sigma_1 between the largest and the
 * q-th largest pooled singular value of the block-diagonal lift, with
 * q = ceil(a * r * d3).
 */
double singular_value_gap(const Tensor3& a, double frac, std::size_t r, const TransformSpec& spec);

}  // namespace tband
