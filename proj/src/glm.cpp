#include "tband/glm.hpp"

#include <cmath>

namespace tband {

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Linear:
      return "linear";
    case LinkKind::Logistic:
      return "logistic";
    case LinkKind::Poisson:
      return "poisson";
  }
  return "linear";
}

LinkKind parse_link_kind(std::string_view name) {
  if (name == "linear") return LinkKind::Linear;
  if (name == "logistic") return LinkKind::Logistic;
  if (name == "poisson") return LinkKind::Poisson;
  throw InvalidInput("unknown link family '" + std::string(name) + "'");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

LinkFamily LinkFamily::linear(double noise_sigma) {
  if (noise_sigma < 0.0) throw InvalidInput("linear family: noise_sigma must be non-negative");
  return LinkFamily{LinkKind::Linear, noise_sigma, 3.0, 1.0, 1.0};
}

LinkFamily LinkFamily::logistic(double eta_clip) {
  if (!(eta_clip > 0.0)) throw InvalidInput("logistic family: eta_clip must be positive");
  const double s = sigmoid(eta_clip);
  return LinkFamily{LinkKind::Logistic, 0.0, eta_clip, s * (1.0 - s), 0.25};
}

LinkFamily LinkFamily::poisson(double eta_clip) {
  if (!(eta_clip > 0.0)) throw InvalidInput("poisson family: eta_clip must be positive");
  return LinkFamily{LinkKind::Poisson, 0.0, eta_clip, std::exp(-eta_clip), std::exp(eta_clip)};
}

LinkFamily LinkFamily::make(LinkKind kind, double noise_sigma, double eta_clip) {
  switch (kind) {
    case LinkKind::Linear:
      return linear(noise_sigma);
    case LinkKind::Logistic:
      return logistic(eta_clip);
    case LinkKind::Poisson:
      return poisson(eta_clip);
  }
  return linear(noise_sigma);
}

LinkValues link_eval(const LinkFamily& family, double x) {
  switch (family.kind) {
    case LinkKind::Linear:
      return {x, 0.5 * x * x, x, 1.0};
    case LinkKind::Logistic: {
      const double s = sigmoid(x);
      return {s, softplus(x), s, s * (1.0 - s)};
    }
    case LinkKind::Poisson: {
      const double e = std::exp(x);
      return {e, e, e, e};
    }
  }
  return {x, 0.5 * x * x, x, 1.0};
}

double link_mean(const LinkFamily& family, double x) {
  switch (family.kind) {
    case LinkKind::Linear:
      return x;
    case LinkKind::Logistic:
      return sigmoid(x);
    case LinkKind::Poisson:
      return std::exp(x);
  }
  return x;
}

double sample_reward(const LinkFamily& family, double eta, std::mt19937_64& rng) {
  if (!std::isfinite(eta)) throw InvalidInput("sample_reward: non-finite linear predictor");
  switch (family.kind) {
    case LinkKind::Linear: {
      if (family.noise_sigma == 0.0) return eta;
      std::normal_distribution<double> noise(0.0, family.noise_sigma);
      return eta + noise(rng);
    }
    case LinkKind::Logistic: {
      std::bernoulli_distribution coin(sigmoid(eta));
      return coin(rng) ? 1.0 : 0.0;
    }
    case LinkKind::Poisson: {
      if (std::abs(eta) > family.eta_clip) {
        throw InvalidInput("sample_reward: |eta|=" + std::to_string(std::abs(eta)) +
                           " exceeds poisson eta_clip=" + std::to_string(family.eta_clip));
      }
      std::poisson_distribution<long long> counts(std::exp(eta));
      return static_cast<double>(counts(rng));
    }
  }
  return eta;
}

DesignData DesignData::from_observations(std::span<const Observation> data) {
  if (data.empty()) throw InvalidInput("design data: no observations");
  DesignData out;
  out.dims = data.front().arm.dims();
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(out.dims.size());
  out.X.resize(n, p);
  out.y.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& obs = data[static_cast<std::size_t>(t)];
    if (obs.arm.dims() != out.dims) {
      throw InvalidInput("design data: observation " + std::to_string(t) + " has dims " +
                         to_string(obs.arm.dims()) + ", expected " + to_string(out.dims));
    }
    out.X.row(t) = obs.arm.vec().transpose();
    out.y(t) = obs.reward;
  }
  return out;
}

double glm_loss(const LinkFamily& family, const Eigen::VectorXd& w, const DesignData& data) {
  if (data.n() == 0) throw InvalidInput("glm_loss: empty data");
  const Eigen::VectorXd eta = data.X * w;
  double total = 0.0;
  for (Eigen::Index t = 0; t < eta.size(); ++t) {
    total += link_eval(family, eta(t)).b - data.y(t) * eta(t);
  }
  return total / static_cast<double>(data.n());
}

Eigen::VectorXd glm_loss_gradient(const LinkFamily& family, const Eigen::VectorXd& w,
                                  const DesignData& data) {
  if (data.n() == 0) throw InvalidInput("glm_loss_gradient: empty data");
  Eigen::VectorXd residual = data.X * w;
  for (Eigen::Index t = 0; t < residual.size(); ++t) {
    residual(t) = link_mean(family, residual(t)) - data.y(t);
  }
  return data.X.transpose() * residual / static_cast<double>(data.n());
}

double glm_loss(const LinkFamily& family, const Tensor3& w, std::span<const Observation> data) {
  if (data.empty()) throw InvalidInput("glm_loss: empty data");
  double total = 0.0;
  for (const auto& obs : data) {
    const double eta = obs.arm.dot(w);
    total += link_eval(family, eta).b - obs.reward * eta;
  }
  return total / static_cast<double>(data.size());
}

Tensor3 glm_loss_gradient(const LinkFamily& family, const Tensor3& w,
                          std::span<const Observation> data) {
  if (data.empty()) throw InvalidInput("glm_loss_gradient: empty data");
  Tensor3 grad(w.dims());
  for (const auto& obs : data) {
    const double eta = obs.arm.dot(w);
    grad.vec() += (link_mean(family, eta) - obs.reward) * obs.arm.vec();
  }
  grad *= 1.0 / static_cast<double>(data.size());
  return grad;
}

}  // namespace tband
