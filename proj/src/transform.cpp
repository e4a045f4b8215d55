#include "tband/transform.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace tband {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity:
      return "identity";
    case TransformKind::DCT:
      return "dct";
    case TransformKind::RandomOrthogonal:
      return "random_orthogonal";
  }
  return "identity";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "identity") return TransformKind::Identity;
  if (name == "dct") return TransformKind::DCT;
  if (name == "random_orthogonal" || name == "rom") return TransformKind::RandomOrthogonal;
  throw InvalidInput("unknown transform kind '" + std::string(name) + "'");
}

TransformSpec::TransformSpec(TransformKind kind, std::size_t d3, std::optional<std::uint64_t> seed,
                             Eigen::MatrixXd matrix)
    : kind_(kind), d3_(d3), seed_(seed), matrix_(std::move(matrix)) {
  // ell is recovered from the matrix itself so a drifting construction shows up in the invariant.
  ell_ = (matrix_ * matrix_.transpose()).trace() / static_cast<double>(d3_);
  inverse_ = matrix_.transpose() / ell_;
}

TransformSpec TransformSpec::identity(std::size_t d3) {
  if (d3 == 0) throw InvalidInput("TransformSpec: d3 must be positive");
  const auto n = static_cast<Eigen::Index>(d3);
  return TransformSpec(TransformKind::Identity, d3, std::nullopt, Eigen::MatrixXd::Identity(n, n));
}

TransformSpec TransformSpec::dct(std::size_t d3) {
  if (d3 == 0) throw InvalidInput("TransformSpec: d3 must be positive");
  const auto n = static_cast<Eigen::Index>(d3);
  Eigen::MatrixXd l(n, n);
  const double nd = static_cast<double>(d3);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (Eigen::Index j = 0; j < n; ++j) {
      l(k, j) = scale * std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) *
                                 static_cast<double>(k) / nd);
    }
  }
  return TransformSpec(TransformKind::DCT, d3, std::nullopt, std::move(l));
}

TransformSpec TransformSpec::random_orthogonal(std::size_t d3, std::uint64_t seed) {
  if (d3 == 0) throw InvalidInput("TransformSpec: d3 must be positive");
  const auto n = static_cast<Eigen::Index>(d3);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return TransformSpec(TransformKind::RandomOrthogonal, d3, seed, std::move(q));
}

TransformSpec TransformSpec::make(TransformKind kind, std::size_t d3, std::uint64_t seed) {
  switch (kind) {
    case TransformKind::Identity:
      return identity(d3);
    case TransformKind::DCT:
      return dct(d3);
    case TransformKind::RandomOrthogonal:
      return random_orthogonal(d3, seed);
  }
  return identity(d3);
}

namespace {

void require_d3(const Tensor3& a, const TransformSpec& spec, const char* what) {
  if (a.d3() != spec.d3()) {
    throw InvalidInput(std::string(what) + ": tensor d3=" + std::to_string(a.d3()) +
                       " but transform d3=" + std::to_string(spec.d3()));
  }
}

}  // namespace

Tensor3 apply_transform(const Tensor3& a, const TransformSpec& spec) {
  require_d3(a, spec, "apply_transform");
  Tensor3 out(a.dims());
  // A_breve(i,j,k) = sum_m L(k,m) A(i,j,m), i.e. tubes * L^T.
  if (a.size() > 0) out.tubes().noalias() = a.tubes() * spec.matrix().transpose();
  return out;
}

Tensor3 inverse_transform(const Tensor3& a_breve, const TransformSpec& spec) {
  require_d3(a_breve, spec, "inverse_transform");
  Tensor3 out(a_breve.dims());
  if (a_breve.size() > 0) {
    out.tubes().noalias() = a_breve.tubes() * spec.inverse_matrix().transpose();
  }
  return out;
}

}  // namespace tband
