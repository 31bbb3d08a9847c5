#ifndef WSGD_LOSSES_HPP
#define WSGD_LOSSES_HPP

#include <cmath>
#include <optional>

#include "wsgd/types.hpp"

namespace wsgd {

enum class LossKind { squared, logistic, pinball };

template <typename T>
struct LossModel {
  LossKind kind = LossKind::squared;
  T tau = T(0);  // quantile level, pinball only

  static LossModel squared() { return {LossKind::squared, T(0)}; }
  static LossModel logistic() { return {LossKind::logistic, T(0)}; }
  static LossModel pinball(T tau) {
    if (!(tau > T(0) && tau < T(1))) throw config_error("pinball: tau must lie in (0,1)");
    return {LossKind::pinball, tau};
  }

  bool smooth() const { return kind != LossKind::pinball; }
};

namespace detail {

template <typename T>
void check_finite(const Vec<T>& theta_arm, const Vec<T>& x, T y) {
  if (!theta_arm.allFinite() || !x.allFinite() || !std::isfinite(static_cast<double>(y)))
    throw std::invalid_argument("loss: non-finite input");
  if (theta_arm.size() != x.size())
    throw std::invalid_argument("loss: dimension mismatch");
}

// 1 / (1 + exp(m)) without overflow for large |m|.
template <typename T>
T stable_inv_logit(T m) {
  if (m >= T(0)) {
    const T e = std::exp(-m);
    return e / (T(1) + e);
  }
  return T(1) / (T(1) + std::exp(m));
}

}  // namespace detail

template <typename T>
T loss_value(const LossModel<T>& model, const Vec<T>& theta_arm, const Vec<T>& x, T y) {
  detail::check_finite(theta_arm, x, y);
  switch (model.kind) {
    case LossKind::squared: {
      const T r = y - x.dot(theta_arm);
      return T(0.5) * r * r;
    }
    case LossKind::logistic: {
      const T m = y * x.dot(theta_arm);
      // log(1 + exp(-m)) in the branch that never overflows
      return m >= T(0) ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    case LossKind::pinball: {
      const T u = y - x.dot(theta_arm);
      return u * (model.tau - (u < T(0) ? T(1) : T(0)));
    }
  }
  throw std::logic_error("loss_value: unknown kind");
}

/// Stochastic (sub)gradient of the loss restricted to the selected arm's
/// coordinates. Pinball uses the subgradient with factor tau on ties (the
/// residual-negative indicator is false at zero).
template <typename T>
Vec<T> loss_grad(const LossModel<T>& model, const Vec<T>& theta_arm, const Vec<T>& x, T y) {
  detail::check_finite(theta_arm, x, y);
  switch (model.kind) {
    case LossKind::squared:
      return (x * (x.dot(theta_arm) - y)).eval();
    case LossKind::logistic: {
      const T m = y * x.dot(theta_arm);
      return (-y * detail::stable_inv_logit(m) * x).eval();
    }
    case LossKind::pinball: {
      const T u = y - x.dot(theta_arm);
      const T factor = model.tau - (u < T(0) ? T(1) : T(0));
      return (-factor * x).eval();
    }
  }
  throw std::logic_error("loss_grad: unknown kind");
}

/// Pointwise Hessian where it exists; pinball has none (absent).
/// The logistic block uses sigma(m) * sigma(-m), which is y-free and does not
/// overflow for large |m|.
template <typename T>
std::optional<Mat<T>> loss_hess(const LossModel<T>& model, const Vec<T>& theta_arm,
                                const Vec<T>& x, T y) {
  detail::check_finite(theta_arm, x, y);
  switch (model.kind) {
    case LossKind::squared:
      return Mat<T>(x * x.transpose());
    case LossKind::logistic: {
      const T m = x.dot(theta_arm);
      const T s = detail::stable_inv_logit(m);
      return Mat<T>((s * (T(1) - s)) * (x * x.transpose()));
    }
    case LossKind::pinball:
      return std::nullopt;
  }
  throw std::logic_error("loss_hess: unknown kind");
}

}  // namespace wsgd

#endif  // WSGD_LOSSES_HPP
