#ifndef WSGD_ENGINE_HPP
#define WSGD_ENGINE_HPP

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "wsgd/inference.hpp"
#include "wsgd/losses.hpp"
#include "wsgd/policy.hpp"
#include "wsgd/rng.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// State of the weighted-SGD recursion together with the Polyak running sum.
/// theta_sum holds theta_0 + ... + theta_{t-1} (pre-update iterates), so
/// theta_bar() is the average the limit theory is stated for.
template <typename T>
struct SgdState {
  Params<T> theta;
  Vec<T> theta_sum;
  long long t = 0;
  StepSchedule<T> schedule;
  T min_weight = std::numeric_limits<T>::infinity();
  T max_weight = -std::numeric_limits<T>::infinity();

  SgdState() = default;
  SgdState(Params<T> theta0, StepSchedule<T> sched)
      : theta(std::move(theta0)), theta_sum(Vec<T>::Zero(theta.dim())), schedule(sched) {}

  Vec<T> theta_bar() const {
    if (t == 0) return theta.vec();
    return theta_sum / static_cast<T>(t);
  }
};

template <typename T>
struct TrajectoryEntry {
  long long t;
  Vec<T> theta;
  Vec<T> theta_bar;
  int action;
  T weight;
  T eta;
};

/// Append log of the recursion, thinned by `stride`. When `record_path` is
/// set the full iterate sequence and the raw observations are kept as well
/// (needed to decompose the estimation error after the fact).
template <typename T>
struct Trajectory {
  long long stride = 0;  // 0 disables logging
  bool record_path = false;

  std::vector<TrajectoryEntry<T>> entries;
  std::vector<Vec<T>> theta_path;        // theta_0, theta_1, ..., stride 1
  std::vector<Observation<T>> obs_path;  // zeta_1, zeta_2, ..., stride 1
  std::vector<T> weight_path;

  bool logging() const { return stride >= 1 || record_path; }
};

namespace detail {

template <typename T>
void check_iterate(const SgdState<T>& state) {
  if (!state.theta.vec().allFinite()) {
    double norm = 0;
    for (Eigen::Index i = 0; i < state.theta.vec().size(); ++i) {
      const double v = static_cast<double>(state.theta.vec()[i]);
      if (std::isfinite(v)) norm += v * v;
    }
    throw divergence_error(state.t, std::sqrt(norm));
  }
}

}  // namespace detail

/// Applies one recursion step with a caller-supplied weight and step size:
///   slice(A) <- slice(A) - eta * w * grad(model, slice(A), x, y).
/// Only the selected arm's slice moves; the Polyak sum absorbs the
/// pre-update iterate before the move. Returns the gradient of the arm
/// block (callers feed it to the plug-in accumulator).
template <typename T>
Vec<T> sgd_step_weighted(SgdState<T>& state, const Observation<T>& obs,
                         const LossModel<T>& model, T w, T eta) {
  state.theta.check_arm(obs.action);
  auto slice = state.theta.arm(obs.action);
  const Vec<T> g = loss_grad<T>(model, slice, obs.x, obs.reward);

  state.theta_sum += state.theta.vec();
  slice -= eta * w * g;
  state.t += 1;
  state.min_weight = std::min(state.min_weight, w);
  state.max_weight = std::max(state.max_weight, w);
  detail::check_iterate(state);
  return g;
}

/// One step of the weighted recursion with the schedule's step size and the
/// scheme's weight of the realized action probability.
template <typename T>
void sgd_step(SgdState<T>& state, const Observation<T>& obs, const LossModel<T>& model,
              const WeightScheme<T>& scheme) {
  const T w = weight(scheme, obs.action_prob);
  const T eta = state.schedule.step(state.t + 1);
  sgd_step_weighted(state, obs, model, w, eta);
}

/// How the plug-in accumulator obtains curvature blocks.
/// - native: the pointwise loss Hessian (squared, logistic)
/// - density_q0: q(0) * x x^T, the known-density surrogate used for pinball
///   runs in simulation, where the noise density at zero is known
/// - none: skip plug-in accumulation entirely
template <typename T>
struct PlugInPolicy {
  enum class Hessian { native, density_q0, none };
  Hessian source = Hessian::native;
  T q0 = T(0);

  static PlugInPolicy native() { return {Hessian::native, T(0)}; }
  static PlugInPolicy density(T q0) { return {Hessian::density_q0, q0}; }
  static PlugInPolicy none() { return {Hessian::none, T(0)}; }
};

template <typename T>
struct StepEvent {
  long long t;                 // step index just completed
  const Observation<T>& obs;
  T weight;
  T eta;
  const Vec<T>& grad_arm;      // gradient of the selected arm block
};

template <typename T>
struct RunResult {
  SgdState<T> state;
  PlugInAccumulator<T> accumulator;
  Trajectory<T> trajectory;
};

/// Full online loop: draw covariate, pick the epsilon-greedy action from the
/// pre-update iterate, observe the reward, take the weighted step and feed
/// the plug-in sums. Hooks observe and never mutate.
template <typename T, class Env>
RunResult<T> run_online(const Env& env, const LossModel<T>& model, const WeightScheme<T>& scheme,
                        const EpsilonSchedule<T>& eps_schedule, const StepSchedule<T>& schedule,
                        long long n_steps, StreamRng& rng, Params<T> theta0,
                        PlugInPolicy<T> plug_in = PlugInPolicy<T>::native(),
                        Trajectory<T> trajectory = {},
                        const std::function<void(const StepEvent<T>&)>& hook = nullptr) {
  if (n_steps < 1) throw config_error("run_online: n_steps must be >= 1");
  RunResult<T> result{SgdState<T>(std::move(theta0), schedule),
                      PlugInAccumulator<T>(0, 0), std::move(trajectory)};
  SgdState<T>& state = result.state;
  const int d = state.theta.dim();
  const int p = state.theta.arm_dim();
  result.accumulator = PlugInAccumulator<T>(d, state.theta.arms());

  if (result.trajectory.record_path) {
    result.trajectory.theta_path.reserve(n_steps + 1);
    result.trajectory.theta_path.push_back(state.theta.vec());
  }

  Vec<T> grad_full = Vec<T>::Zero(d);
  for (long long step = 1; step <= n_steps; ++step) {
    const T eps_t = epsilon_at(eps_schedule, step);
    const Vec<T> x = env.draw_x(rng);
    const T p0 = prob_arm0(x, state.theta, eps_t);
    const auto [action, action_prob] = sample_action(rng, p0);
    const T y = env.draw_y(rng, x, action);
    const Observation<T> obs{x, action, y, action_prob};

    const T w = weight(scheme, action_prob);
    const T eta = schedule.step(step);

    std::optional<Mat<T>> hess;
    switch (plug_in.source) {
      case PlugInPolicy<T>::Hessian::native:
        hess = loss_hess<T>(model, state.theta.arm(action), x, y);
        break;
      case PlugInPolicy<T>::Hessian::density_q0:
        hess = Mat<T>(plug_in.q0 * (x * x.transpose()));
        break;
      case PlugInPolicy<T>::Hessian::none:
        break;
    }

    const Vec<T> g = sgd_step_weighted(state, obs, model, w, eta);

    if (plug_in.source != PlugInPolicy<T>::Hessian::none) {
      grad_full.setZero();
      grad_full.segment(static_cast<Eigen::Index>(action.value) * p, p) = g;
      result.accumulator.accumulate(w, grad_full, hess, action, model.smooth());
    }

    if (result.trajectory.logging()) {
      if (result.trajectory.record_path) {
        result.trajectory.theta_path.push_back(state.theta.vec());
        result.trajectory.obs_path.push_back(obs);
        result.trajectory.weight_path.push_back(w);
      }
      if (result.trajectory.stride >= 1 && step % result.trajectory.stride == 0) {
        result.trajectory.entries.push_back(
            {step, state.theta.vec(), state.theta_bar(), action.value, w, eta});
      }
    }

    if (hook) hook(StepEvent<T>{step, obs, w, eta, g});
  }
  return result;
}

}  // namespace wsgd

#endif  // WSGD_ENGINE_HPP
