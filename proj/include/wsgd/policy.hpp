#ifndef WSGD_POLICY_HPP
#define WSGD_POLICY_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "wsgd/rng.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// Deterministic exploration-rate sequence. The constant form keeps
/// epsilon fixed; the converging form emits clamp(eps_inf + c * t^(-beta)).
template <typename T>
struct EpsilonSchedule {
  enum class Kind { constant, converging };
  Kind kind = Kind::constant;
  T eps_inf = T(0.02);
  T c = T(0);
  T beta = T(1);
  T lo = T(1e-3);
  T hi = T(1) - T(1e-3);

  // eps = 1 (pure exploration) is admitted as the degenerate boundary case;
  // the emitted action probabilities stay inside (0,1) either way.
  static EpsilonSchedule constant(T eps) {
    if (!(eps > T(0) && eps <= T(1))) throw config_error("epsilon must lie in (0,1]");
    return {Kind::constant, eps, T(0), T(1), eps, eps};
  }

  static EpsilonSchedule converging(T eps_inf, T c, T beta, T lo = T(1e-3),
                                    T hi = T(1) - T(1e-3)) {
    if (!(eps_inf > T(0) && eps_inf < T(1))) throw config_error("eps_inf must lie in (0,1)");
    if (c < T(0)) throw config_error("epsilon schedule: c must be >= 0");
    if (!(beta > T(0))) throw config_error("epsilon schedule: beta must be > 0");
    if (!(lo > T(0) && lo <= hi && hi < T(1)))
      throw config_error("epsilon schedule: need 0 < lo <= hi < 1");
    return {Kind::converging, eps_inf, c, beta, lo, hi};
  }
};

template <typename T>
T epsilon_at(const EpsilonSchedule<T>& schedule, long long t) {
  if (schedule.kind == EpsilonSchedule<T>::Kind::constant) return schedule.eps_inf;
  const T raw = schedule.eps_inf + schedule.c * std::pow(static_cast<T>(t), -schedule.beta);
  return std::min(schedule.hi, std::max(schedule.lo, raw));
}

/// Warning when the schedule approaches its limit slower than t^(-alpha/2),
/// the rate the averaging theory needs from a drifting epsilon.
template <typename T>
std::optional<std::string> epsilon_rate_warning(const EpsilonSchedule<T>& schedule, T alpha) {
  if (schedule.kind == EpsilonSchedule<T>::Kind::converging && schedule.c > T(0) &&
      schedule.beta < alpha / T(2)) {
    return "epsilon schedule decays at rate t^(-" + std::to_string(static_cast<double>(schedule.beta)) +
           "), slower than the t^(-alpha/2) = t^(-" +
           std::to_string(static_cast<double>(alpha / T(2))) +
           ") required for the averaging normality to carry over";
  }
  return std::nullopt;
}

/// Gradient weight as a function of the realized action's probability.
/// ipw and sqrt_ipw carry the binary-action factor 2 of the uniform stable
/// policy; the power family is the bare p^gamma (constants cancel in the
/// sandwich covariance, so the efficiency ordering is unaffected).
template <typename T>
struct WeightScheme {
  enum class Kind { vanilla, ipw, sqrt_ipw, power };
  Kind kind = Kind::vanilla;
  T gamma = T(0);

  static WeightScheme vanilla() { return {Kind::vanilla, T(0)}; }
  static WeightScheme ipw() { return {Kind::ipw, T(-1)}; }
  static WeightScheme sqrt_ipw() { return {Kind::sqrt_ipw, T(-0.5)}; }
  static WeightScheme power(T gamma) { return {Kind::power, gamma}; }

  std::string name() const {
    switch (kind) {
      case Kind::vanilla: return "vanilla";
      case Kind::ipw: return "ipw";
      case Kind::sqrt_ipw: return "sqrt-ipw";
      case Kind::power: return "power:" + std::to_string(static_cast<double>(gamma));
    }
    return "?";
  }
};

template <typename T>
T weight(const WeightScheme<T>& scheme, T action_prob) {
  if (!(action_prob > T(0) && action_prob < T(1)))
    throw std::invalid_argument("weight: action probability must lie in (0,1)");
  switch (scheme.kind) {
    case WeightScheme<T>::Kind::vanilla: return T(1);
    case WeightScheme<T>::Kind::ipw: return T(1) / (T(2) * action_prob);
    case WeightScheme<T>::Kind::sqrt_ipw: return std::sqrt(T(1) / (T(2) * action_prob));
    case WeightScheme<T>::Kind::power: return std::pow(action_prob, scheme.gamma);
  }
  throw std::logic_error("weight: unknown scheme");
}

/// Epsilon-greedy probability of choosing arm 0 given the current estimate.
/// A tie in the greedy comparison sends the greedy mass to arm 1 (the strict
/// inequality is taken literally; the event has measure zero under
/// continuous covariates).
template <typename T>
T prob_arm0(const Vec<T>& x, const Params<T>& theta, T eps) {
  if (theta.arms() != 2) throw config_error("prob_arm0: policy is defined for 2 arms");
  if (!(eps > T(0) && eps <= T(1))) throw std::invalid_argument("prob_arm0: eps must lie in (0,1]");
  const T m0 = x.dot(theta.arm({0}));
  const T m1 = x.dot(theta.arm({1}));
  const T greedy0 = m0 > m1 ? T(1) : T(0);
  return (T(1) - eps) * greedy0 + eps / T(2);
}

/// Draws arm 0 with probability p0 and reports the probability of the arm
/// actually returned.
template <typename T>
std::pair<ArmIndex, T> sample_action(StreamRng& rng, T p0) {
  if (!(p0 > T(0) && p0 < T(1))) throw std::invalid_argument("sample_action: p0 must lie in (0,1)");
  if (rng.bernoulli(static_cast<double>(p0))) return {ArmIndex{0}, p0};
  return {ArmIndex{1}, T(1) - p0};
}

}  // namespace wsgd

#endif  // WSGD_POLICY_HPP
