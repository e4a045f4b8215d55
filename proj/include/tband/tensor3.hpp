#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tband {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine fails (non-convergence, singular system).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dims {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t d3 = 0;

  std::size_t size() const { return d1 * d2 * d3; }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& dims);

/**
 * Dense real third-order tensor.
 *
 * Entry (i, j, k) lives at index i + j*d1 + k*d1*d2: every frontal slice is
 * stored column-major and slices are stacked along the third mode. The same
 * order defines vec(.) everywhere in the library.
 */
class Tensor3 {
 public:
  using SliceMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstSliceMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  Tensor3() = default;
  Tensor3(std::size_t d1, std::size_t d2, std::size_t d3);
  explicit Tensor3(Dims dims);
  Tensor3(Dims dims, std::vector<double> data);

  static Tensor3 zeros(Dims dims) { return Tensor3(dims); }
  static Tensor3 from_vec(Dims dims, const Eigen::VectorXd& v);

  const Dims& dims() const { return dims_; }
  std::size_t d1() const { return dims_.d1; }
  std::size_t d2() const { return dims_.d2; }
  std::size_t d3() const { return dims_.d3; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + j * dims_.d1 + k * dims_.d1 * dims_.d2];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + j * dims_.d1 + k * dims_.d1 * dims_.d2];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& raw() const { return data_; }

  /// Frontal slice k as a d1 x d2 matrix view.
  SliceMap slice(std::size_t k);
  ConstSliceMap slice(std::size_t k) const;

  /// Canonical vectorization (a view, no copy).
  VecMap vec();
  ConstVecMap vec() const;

  /// (d1*d2) x d3 view whose column k is the vectorized frontal slice k.
  Eigen::Map<Eigen::MatrixXd> tubes();
  Eigen::Map<const Eigen::MatrixXd> tubes() const;

  double frobenius_norm() const;
  double dot(const Tensor3& other) const;

  /// Sub-block [r0, r0+nr) x [c0, c0+nc) x all slices.
  Tensor3 block(std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) const;

  /// Lateral slices [c0, c0+nc) (columns of every frontal slice).
  Tensor3 lateral(std::size_t c0, std::size_t nc) const { return block(0, d1(), c0, nc); }

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  bool operator==(const Tensor3&) const = default;

 private:
  void require_same_dims(const Tensor3& other, const char* what) const;

  Dims dims_{};
  std::vector<double> data_;
};

/// Concatenate tensors along the second mode (lateral slices): [A B].
Tensor3 hcat(const Tensor3& a, const Tensor3& b);

}  // namespace tband
