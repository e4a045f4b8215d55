#include "tband/talgebra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tband {

namespace {

using Eigen::Index;

Index idx(std::size_t n) { return static_cast<Index>(n); }

Eigen::JacobiSVD<Eigen::MatrixXd> slice_svd(const Eigen::MatrixXd& m, std::size_t slice,
                                            unsigned options) {
  if (!m.allFinite()) {
    throw NumericalError("t_svd: non-finite entries in transform slice " + std::to_string(slice));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, options);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("t_svd: SVD did not converge on transform slice " +
                         std::to_string(slice));
  }
  return svd;
}

}  // namespace

Tensor3 t_product(const Tensor3& a, const Tensor3& b, const TransformSpec& spec) {
  if (a.d2() != b.d1() || a.d3() != b.d3()) {
    throw InvalidInput("t_product: cannot multiply " + to_string(a.dims()) + " by " +
                       to_string(b.dims()));
  }
  const Tensor3 ab = apply_transform(a, spec);
  const Tensor3 bb = apply_transform(b, spec);
  Tensor3 cb(a.d1(), b.d2(), a.d3());
  for (std::size_t k = 0; k < a.d3(); ++k) {
    if (cb.size() > 0) cb.slice(k).noalias() = ab.slice(k) * bb.slice(k);
  }
  return inverse_transform(cb, spec);
}

Tensor3 conj_transpose(const Tensor3& a, const TransformSpec& spec) {
  (void)spec;  // the mode-3 transform commutes with transposing frontal slices
  Tensor3 out(a.d2(), a.d1(), a.d3());
  for (std::size_t k = 0; k < a.d3(); ++k) {
    if (out.size() > 0) out.slice(k) = a.slice(k).transpose();
  }
  return out;
}

Tensor3 identity_tensor(std::size_t m, std::size_t d3, const TransformSpec& spec) {
  if (spec.d3() != d3) {
    throw InvalidInput("identity_tensor: d3 mismatch with transform");
  }
  Tensor3 ib(m, m, d3);
  for (std::size_t k = 0; k < d3; ++k) ib.slice(k).setIdentity();
  return inverse_transform(ib, spec);
}

TSvdFactors t_svd(const Tensor3& a, const TransformSpec& spec, SvdMode mode) {
  const std::size_t d1 = a.d1();
  const std::size_t d2 = a.d2();
  const std::size_t d3 = a.d3();
  const std::size_t rho = std::min(d1, d2);
  const bool full = mode == SvdMode::Full;
  const std::size_t ucols = full ? d1 : rho;
  const std::size_t vcols = full ? d2 : rho;

  const Tensor3 ab = apply_transform(a, spec);
  Tensor3 ub(d1, ucols, d3);
  Tensor3 sb(full ? d1 : rho, full ? d2 : rho, d3);
  Tensor3 vb(d2, vcols, d3);
  std::vector<std::vector<double>> values(d3);

  const unsigned options =
      full ? (Eigen::ComputeFullU | Eigen::ComputeFullV) : (Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (std::size_t k = 0; k < d3; ++k) {
    if (rho == 0) continue;
    const auto svd = slice_svd(ab.slice(k), k, options);
    const Eigen::VectorXd& sv = svd.singularValues();
    values[k].assign(sv.data(), sv.data() + sv.size());
    ub.slice(k) = svd.matrixU();
    vb.slice(k) = svd.matrixV();
    for (std::size_t i = 0; i < rho; ++i) sb(i, i, k) = sv(idx(i));
  }
  return TSvdFactors{inverse_transform(ub, spec), inverse_transform(sb, spec),
                     inverse_transform(vb, spec), std::move(values)};
}

std::size_t tubal_rank(const TSvdFactors& factors, double tol) {
  const std::size_t rho = factors.rank_capacity();
  double largest = 0.0;
  for (const auto& slice : factors.slice_singular_values) {
    for (double s : slice) largest = std::max(largest, std::abs(s));
  }
  if (largest == 0.0) return 0;
  std::size_t rank = 0;
  for (std::size_t i = 0; i < rho; ++i) {
    double tube_max = 0.0;
    for (const auto& slice : factors.slice_singular_values) {
      if (i < slice.size()) tube_max = std::max(tube_max, std::abs(slice[i]));
    }
    if (tube_max > tol * largest) ++rank;
  }
  return rank;
}

std::vector<Eigen::VectorXd> transform_singular_values(const Tensor3& a, const TransformSpec& spec) {
  const Tensor3 ab = apply_transform(a, spec);
  std::vector<Eigen::VectorXd> out(a.d3());
  if (a.d1() == 0 || a.d2() == 0) return out;
  for (std::size_t k = 0; k < a.d3(); ++k) {
    const Eigen::MatrixXd s = ab.slice(k);
    if (!s.allFinite()) {
      throw NumericalError("singular values: non-finite entries in transform slice " +
                           std::to_string(k));
    }
    out[k] = Eigen::JacobiSVD<Eigen::MatrixXd>(s).singularValues();
  }
  return out;
}

Tensor3 t_pseudo_inverse(const Tensor3& a, const TransformSpec& spec, double max_condition) {
  const Tensor3 ab = apply_transform(a, spec);
  Tensor3 out(a.d2(), a.d1(), a.d3());
  if (a.d1() == 0 || a.d2() == 0) return out;
  for (std::size_t k = 0; k < a.d3(); ++k) {
    const auto svd = slice_svd(ab.slice(k), k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (!(smallest > 0.0) || sv(0) / smallest > max_condition) {
      throw InvalidInput("t_pseudo_inverse: transform slice " + std::to_string(k) +
                         " is degenerate (condition number " +
                         (smallest > 0.0 ? std::to_string(sv(0) / smallest) : std::string("inf")) +
                         ")");
    }
    out.slice(k).noalias() =
        svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  }
  return inverse_transform(out, spec);
}

double spectral_norm(const Tensor3& a, const TransformSpec& spec) {
  double best = 0.0;
  for (const auto& sv : transform_singular_values(a, spec)) {
    if (sv.size() > 0) best = std::max(best, sv(0));
  }
  return best;
}

double nuclear_norm(const Tensor3& a, const TransformSpec& spec) {
  double total = 0.0;
  for (const auto& sv : transform_singular_values(a, spec)) total += sv.sum();
  return total / spec.ell();
}

Tensor3 svt_prox(const Tensor3& a, double tau, const TransformSpec& spec) {
  if (!(tau > 0.0)) throw InvalidInput("svt_prox: tau must be positive");
  const Tensor3 ab = apply_transform(a, spec);
  Tensor3 out(a.dims());
  if (a.d1() == 0 || a.d2() == 0) return out;
  for (std::size_t k = 0; k < a.d3(); ++k) {
    const auto svd = slice_svd(ab.slice(k), k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
    Index keep = 0;
    while (keep < shrunk.size() && shrunk(keep) > 0.0) ++keep;
    if (keep == 0) continue;
    out.slice(k).noalias() = svd.matrixU().leftCols(keep) * shrunk.head(keep).asDiagonal() *
                             svd.matrixV().leftCols(keep).transpose();
  }
  return inverse_transform(out, spec);
}

double singular_value_gap(const Tensor3& a, double frac, std::size_t r, const TransformSpec& spec) {
  if (frac < 0.0 || frac > 1.0) throw InvalidInput("singular_value_gap: a must lie in [0, 1]");
  if (r == 0) throw InvalidInput("singular_value_gap: r must be positive");
  std::vector<double> pooled;
  for (const auto& sv : transform_singular_values(a, spec)) {
    pooled.insert(pooled.end(), sv.data(), sv.data() + sv.size());
  }
  std::sort(pooled.begin(), pooled.end(), std::greater<>());
  const double target = frac * static_cast<double>(r) * static_cast<double>(a.d3());
  // Guard against products like 0.1*30 landing a hair above an integer.
  auto q = static_cast<std::size_t>(std::ceil(target - 1e-12));
  q = std::max<std::size_t>(q, 1);
  if (q > pooled.size()) {
    throw InvalidInput("singular_value_gap: ceil(a*r*d3)=" + std::to_string(q) + " exceeds the " +
                       std::to_string(pooled.size()) + " pooled singular values");
  }
  if (pooled.front() <= 0.0) throw NumericalError("singular_value_gap: gap undefined for a zero tensor");
  return (pooled.front() - pooled[q - 1]) / pooled.front();
}

}  // namespace tband
