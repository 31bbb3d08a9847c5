#ifndef WSGD_ENVIRONMENT_HPP
#define WSGD_ENVIRONMENT_HPP

#include <cmath>

#include "wsgd/gauss.hpp"
#include "wsgd/losses.hpp"
#include "wsgd/rng.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// Synthetic two-arm data generator with i.i.d. covariates X ~ N(mu, I_p).
///
/// linear:   Y = X.theta*_A + sigma * Z
/// quantile: Y = X.theta*_A + E,  E = sigma * Z + shift with P(E <= 0) = tau
/// logistic: Y in {-1, +1} with  P(Y = y) = 1 / (1 + exp(-y X.theta*_A))
template <typename T>
struct Environment {
  enum class Kind { linear, quantile, logistic };
  Kind kind = Kind::linear;
  Vec<T> mu;
  Params<T> theta_star;
  T sigma = T(0.1);        // reward noise sd (linear) or noise scale (quantile)
  T tau = T(0.75);         // quantile level (quantile only)
  T noise_shift = T(0);    // location shift putting the tau-quantile at zero

  static Environment linear(Vec<T> mu, Params<T> theta_star, T sigma) {
    if (sigma < T(0)) throw config_error("environment: sigma must be >= 0");
    Environment env;
    env.kind = Kind::linear;
    env.mu = std::move(mu);
    env.theta_star = std::move(theta_star);
    env.sigma = sigma;
    env.check_dims();
    return env;
  }

  /// The shift solves P(sigma Z + shift <= 0) = tau. The closed-form seed
  /// -sigma * Phi^{-1}(tau) is polished by Newton iterations on the quantile
  /// equation until |P(E<=0) - tau| <= 1e-12.
  static Environment quantile(Vec<T> mu, Params<T> theta_star, T sigma, T tau) {
    if (!(sigma > T(0))) throw config_error("environment: quantile noise scale must be > 0");
    if (!(tau > T(0) && tau < T(1))) throw config_error("environment: tau must lie in (0,1)");
    Environment env;
    env.kind = Kind::quantile;
    env.mu = std::move(mu);
    env.theta_star = std::move(theta_star);
    env.sigma = sigma;
    env.tau = tau;
    T s = -sigma * static_cast<T>(normal_quantile(static_cast<double>(tau)));
    for (int it = 0; it < 8; ++it) {
      const T f = static_cast<T>(normal_cdf(static_cast<double>(-s / sigma))) - tau;
      if (std::abs(f) <= T(1e-12)) break;
      const T fp = -static_cast<T>(normal_pdf(static_cast<double>(-s / sigma))) / sigma;
      s -= f / fp;
    }
    env.noise_shift = s;
    env.check_dims();
    return env;
  }

  static Environment logistic(Vec<T> mu, Params<T> theta_star) {
    Environment env;
    env.kind = Kind::logistic;
    env.mu = std::move(mu);
    env.theta_star = std::move(theta_star);
    env.check_dims();
    return env;
  }

  void check_dims() const {
    if (mu.size() != theta_star.arm_dim())
      throw config_error("environment: mu dimension does not match the per-arm dimension");
  }

  int dim() const { return static_cast<int>(mu.size()); }

  LossModel<T> loss() const {
    switch (kind) {
      case Kind::linear: return LossModel<T>::squared();
      case Kind::quantile: return LossModel<T>::pinball(tau);
      case Kind::logistic: return LossModel<T>::logistic();
    }
    throw std::logic_error("environment: unknown kind");
  }

  /// Noise density at zero (quantile environments), the curvature factor
  /// that stands in for the nonexistent pointwise Hessian in simulation.
  T density_at_zero() const {
    if (kind != Kind::quantile) throw config_error("density_at_zero: quantile environments only");
    return static_cast<T>(normal_pdf(static_cast<double>(noise_shift / sigma))) / sigma;
  }

  Vec<T> draw_x(StreamRng& rng) const {
    Vec<T> x(mu.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = mu[i] + static_cast<T>(rng.normal());
    return x;
  }

  T draw_y(StreamRng& rng, const Vec<T>& x, ArmIndex a) const {
    const T mean = x.dot(theta_star.arm(a));
    switch (kind) {
      case Kind::linear:
        return mean + sigma * static_cast<T>(rng.normal());
      case Kind::quantile:
        return mean + sigma * static_cast<T>(rng.normal()) + noise_shift;
      case Kind::logistic: {
        const T p_plus = T(1) / (T(1) + std::exp(-mean));
        return rng.bernoulli(static_cast<double>(p_plus)) ? T(1) : T(-1);
      }
    }
    throw std::logic_error("environment: unknown kind");
  }
};

}  // namespace wsgd

#endif  // WSGD_ENVIRONMENT_HPP
