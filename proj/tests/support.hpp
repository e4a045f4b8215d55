#pragma once

// Test-side oracles. These deliberately avoid the library's own transform and
// slice helpers: everything is spelled out as index loops over plain arrays.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tband/talgebra.hpp"

namespace tband::testing {

inline Tensor3 gaussian(Dims d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor3 t(d);
  for (double& v : t.data()) v = n(rng);
  return t;
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

inline std::vector<TransformSpec> all_specs(std::size_t d3, std::uint64_t seed = 7) {
  return {TransformSpec::identity(d3), TransformSpec::dct(d3), TransformSpec::random_orthogonal(d3, seed)};
}

/// Orthonormal DCT-II matrix written out from its defining formula.
inline Eigen::MatrixXd dct_matrix(std::size_t n) {
  Eigen::MatrixXd c(n, n);
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t j = 0; j < n; ++j) c(k, j) = scale * std::cos(pi * (2.0 * j + 1.0) * k / (2.0 * n));
  }
  return c;
}

/// out(i,j,k) = sum_l L(k,l) a(i,j,l).
inline Tensor3 mode3(const Tensor3& a, const Eigen::MatrixXd& l) {
  Tensor3 out(a.d1(), a.d2(), static_cast<std::size_t>(l.rows()));
  for (std::size_t i = 0; i < a.d1(); ++i)
    for (std::size_t j = 0; j < a.d2(); ++j)
      for (std::size_t k = 0; k < out.d3(); ++k) {
        double s = 0.0;
        for (std::size_t q = 0; q < a.d3(); ++q) s += l(k, q) * a(i, j, q);
        out(i, j, k) = s;
      }
  return out;
}

/// A *_L B by explicit loops in the transform domain.
inline Tensor3 t_product_oracle(const Tensor3& a, const Tensor3& b, const Eigen::MatrixXd& l) {
  const Tensor3 ab = mode3(a, l);
  const Tensor3 bb = mode3(b, l);
  Tensor3 cb(a.d1(), b.d2(), a.d3());
  for (std::size_t k = 0; k < a.d3(); ++k)
    for (std::size_t i = 0; i < a.d1(); ++i)
      for (std::size_t j = 0; j < b.d2(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < a.d2(); ++q) s += ab(i, q, k) * bb(q, j, k);
        cb(i, j, k) = s;
      }
  return mode3(cb, l.inverse());
}

/// Matrix of transform-domain slice k, built by loops.
inline Eigen::MatrixXd breve_slice(const Tensor3& a, const Eigen::MatrixXd& l, std::size_t k) {
  const Tensor3 ab = mode3(a, l);
  Eigen::MatrixXd m(a.d1(), a.d2());
  for (std::size_t i = 0; i < a.d1(); ++i)
    for (std::size_t j = 0; j < a.d2(); ++j) m(i, j) = ab(i, j, k);
  return m;
}

/// Random orthogonal d x r x d3 tensor (orthonormal columns in every transform slice).
inline Tensor3 random_orthogonal_columns(std::size_t d, std::size_t r, const TransformSpec& spec,
                                         std::mt19937_64& rng) {
  Tensor3 breve(d, r, spec.d3());
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t k = 0; k < spec.d3(); ++k) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < r; ++j) breve(i, j, k) = q(i, j);
  }
  return inverse_transform(breve, spec);
}

}  // namespace tband::testing
