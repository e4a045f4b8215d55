#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "tband/tensor3.hpp"

namespace tband {

enum class LinkKind { Linear, Logistic, Poisson };

std::string_view to_string(LinkKind kind);
LinkKind parse_link_kind(std::string_view name);

/**
 * Canonical exponential-family link with derivative bounds m <= mu'(x) <= M
 * over |x| <= eta_clip. Dispersion is fixed to 1.
 */
struct LinkFamily {
  LinkKind kind = LinkKind::Linear;
  double noise_sigma = 0.0;  ///< Linear only
  double eta_clip = 3.0;
  double m_lower = 1.0;
  double M_upper = 1.0;

  static LinkFamily linear(double noise_sigma = 0.01);
  static LinkFamily logistic(double eta_clip = 3.0);
  static LinkFamily poisson(double eta_clip = 3.0);
  static LinkFamily make(LinkKind kind, double noise_sigma = 0.01, double eta_clip = 3.0);

  std::string name() const { return std::string(to_string(kind)); }
};

struct LinkValues {
  double mu;  ///< mean, b'(x)
  double b;   ///< log-partition
  double b1;  ///< b'(x) == mu
  double b2;  ///< b''(x) == mu'(x)
};

LinkValues link_eval(const LinkFamily& family, double x);

/// mu(x) only; cheaper than link_eval in hot loops.
double link_mean(const LinkFamily& family, double x);

/// Reward draw with mean mu(eta). Poisson rejects |eta| > eta_clip.
double sample_reward(const LinkFamily& family, double eta, std::mt19937_64& rng);

struct Observation {
  Tensor3 arm;
  double reward = 0.0;
  std::size_t round = 0;
};

/// L(W) = (1/n) sum_t [ b(<X_t, W>) - y_t <X_t, W> ].
double glm_loss(const LinkFamily& family, const Tensor3& w, std::span<const Observation> data);

/// grad L(W) = (1/n) sum_t [ mu(<X_t, W>) - y_t ] X_t.
Tensor3 glm_loss_gradient(const LinkFamily& family, const Tensor3& w,
                          std::span<const Observation> data);

/**
 * Observations packed as a row-per-observation design matrix; the estimator
 * evaluates loss and gradient as matrix-vector products over this layout.
 */
struct DesignData {
  Dims dims;
  Eigen::MatrixXd X;  ///< n x (d1*d2*d3), rows are canonical vec(X_t)
  Eigen::VectorXd y;

  static DesignData from_observations(std::span<const Observation> data);
  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
};

double glm_loss(const LinkFamily& family, const Eigen::VectorXd& w, const DesignData& data);
Eigen::VectorXd glm_loss_gradient(const LinkFamily& family, const Eigen::VectorXd& w,
                                  const DesignData& data);

}  // namespace tband
