#include "tband/tensor3.hpp"

#include <cmath>

namespace tband {

std::string to_string(const Dims& dims) {
  return std::to_string(dims.d1) + "x" + std::to_string(dims.d2) + "x" + std::to_string(dims.d3);
}

Tensor3::Tensor3(std::size_t d1, std::size_t d2, std::size_t d3) : Tensor3(Dims{d1, d2, d3}) {}

Tensor3::Tensor3(Dims dims) : dims_(dims), data_(dims.size(), 0.0) {}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_.size()) {
    throw InvalidInput("Tensor3: data length " + std::to_string(data_.size()) +
                       " does not match dims " + to_string(dims_));
  }
}

Tensor3 Tensor3::from_vec(Dims dims, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != dims.size()) {
    throw InvalidInput("Tensor3::from_vec: length mismatch for dims " + to_string(dims));
  }
  return Tensor3(dims, std::vector<double>(v.data(), v.data() + v.size()));
}

Tensor3::SliceMap Tensor3::slice(std::size_t k) {
  return SliceMap(data_.data() + k * d1() * d2(), static_cast<Eigen::Index>(d1()),
                  static_cast<Eigen::Index>(d2()));
}

Tensor3::ConstSliceMap Tensor3::slice(std::size_t k) const {
  return ConstSliceMap(data_.data() + k * d1() * d2(), static_cast<Eigen::Index>(d1()),
                       static_cast<Eigen::Index>(d2()));
}

Tensor3::VecMap Tensor3::vec() { return VecMap(data_.data(), static_cast<Eigen::Index>(size())); }

Tensor3::ConstVecMap Tensor3::vec() const {
  return ConstVecMap(data_.data(), static_cast<Eigen::Index>(size()));
}

Eigen::Map<Eigen::MatrixXd> Tensor3::tubes() {
  return {data_.data(), static_cast<Eigen::Index>(d1() * d2()), static_cast<Eigen::Index>(d3())};
}

Eigen::Map<const Eigen::MatrixXd> Tensor3::tubes() const {
  return {data_.data(), static_cast<Eigen::Index>(d1() * d2()), static_cast<Eigen::Index>(d3())};
}

double Tensor3::frobenius_norm() const { return vec().norm(); }

double Tensor3::dot(const Tensor3& other) const {
  require_same_dims(other, "dot");
  return vec().dot(other.vec());
}

Tensor3 Tensor3::block(std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) const {
  if (r0 + nr > d1() || c0 + nc > d2()) {
    throw InvalidInput("Tensor3::block: range exceeds dims " + to_string(dims_));
  }
  Tensor3 out(nr, nc, d3());
  for (std::size_t k = 0; k < d3(); ++k) {
    if (nr > 0 && nc > 0) {
      out.slice(k) = slice(k).block(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(c0),
                                    static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
    }
  }
  return out;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require_same_dims(other, "+=");
  vec() += other.vec();
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require_same_dims(other, "-=");
  vec() -= other.vec();
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  vec() *= s;
  return *this;
}

void Tensor3::require_same_dims(const Tensor3& other, const char* what) const {
  if (dims_ != other.dims_) {
    throw InvalidInput(std::string("Tensor3::") + what + ": dims " + to_string(dims_) + " vs " +
                       to_string(other.dims_));
  }
}

Tensor3 hcat(const Tensor3& a, const Tensor3& b) {
  if (a.d1() != b.d1() || a.d3() != b.d3()) {
    throw InvalidInput("hcat: incompatible dims " + to_string(a.dims()) + " and " +
                       to_string(b.dims()));
  }
  Tensor3 out(a.d1(), a.d2() + b.d2(), a.d3());
  for (std::size_t k = 0; k < a.d3(); ++k) {
    auto s = out.slice(k);
    if (a.d2() > 0) s.leftCols(static_cast<Eigen::Index>(a.d2())) = a.slice(k);
    if (b.d2() > 0) s.rightCols(static_cast<Eigen::Index>(b.d2())) = b.slice(k);
  }
  return out;
}

}  // namespace tband
