#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "tband/tensor3.hpp"

namespace tband {

enum class TransformKind { Identity, DCT, RandomOrthogonal };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/**
 * Invertible mode-3 transform L with L * L^T = ell * I.
 *
 * The transform fixes the whole tensor algebra: products, transposes,
 * factorizations and norms are all computed slice-wise in the domain
 * A_breve = A x_3 L. Every kind supplied here is real orthogonal, so ell = 1.
 */
class TransformSpec {
 public:
  static TransformSpec identity(std::size_t d3);
  /// Orthonormal DCT-II.
  static TransformSpec dct(std::size_t d3);
  /// Q factor of a seeded Gaussian matrix, with the sign of diag(R) folded in.
  static TransformSpec random_orthogonal(std::size_t d3, std::uint64_t seed);
  static TransformSpec make(TransformKind kind, std::size_t d3, std::uint64_t seed = 0);

  TransformKind kind() const { return kind_; }
  std::size_t d3() const { return d3_; }
  double ell() const { return ell_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// L^{-1} = L^T / ell.
  const Eigen::MatrixXd& inverse_matrix() const { return inverse_; }

 private:
  TransformSpec(TransformKind kind, std::size_t d3, std::optional<std::uint64_t> seed,
                Eigen::MatrixXd matrix);

  TransformKind kind_ = TransformKind::Identity;
  std::size_t d3_ = 0;
  std::optional<std::uint64_t> seed_;
  double ell_ = 1.0;
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd inverse_;
};

/// A_breve = A x_3 L.
Tensor3 apply_transform(const Tensor3& a, const TransformSpec& spec);

/// A = A_breve x_3 L^{-1}.
Tensor3 inverse_transform(const Tensor3& a_breve, const TransformSpec& spec);

}  // namespace tband
