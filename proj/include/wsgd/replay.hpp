#ifndef WSGD_REPLAY_HPP
#define WSGD_REPLAY_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "wsgd/csv.hpp"
#include "wsgd/engine.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// One logged recommendation: which of the two configured articles was
/// shown, whether it was clicked, and the six raw user covariates (the first
/// five sum to one, the sixth is the constant 1).
struct ReplayRecord {
  long long timestamp = 0;
  long long article_id = 0;
  int click = 0;
  std::array<double, 6> features{};
};

struct ReplayConfig {
  long long article_arm0 = 109520;
  long long article_arm1 = 109510;
  Real eps = 0.2;
  WeightScheme<Real> scheme = WeightScheme<Real>::vanilla();
  StepSchedule<Real> schedule;
  double level = 0.95;
  SeedSpec seed{1, 0};
};

struct ReplayResult {
  InferenceReport inference;
  long long consumed = 0;
  long long skipped = 0;
  long long total = 0;
  SgdState<Real> state;
  PlugInAccumulator<Real> accumulator;
};

inline constexpr int kReplayFeatureDim = 5;  // intercept + raw covariates 2..5

/// x_1 = 1 intercept, x_2..x_5 = raw covariates 2..5.
inline VecX replay_design(const ReplayRecord& rec) {
  VecX x(kReplayFeatureDim);
  x[0] = 1.0;
  for (int j = 1; j < kReplayFeatureDim; ++j) x[j] = rec.features[j];
  return x;
}

/// Parses `timestamp,article_id,click,f1,...,f6` rows. A leading header line
/// is skipped; anything else that fails to parse raises a line-numbered
/// error.
inline std::vector<ReplayRecord> parse_replay_log(std::istream& in) {
  std::vector<ReplayRecord> records;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
    std::stringstream ss(line);
    ReplayRecord rec;
    char comma;
    ss >> rec.timestamp >> comma >> rec.article_id >> comma >> rec.click;
    for (auto& f : rec.features) ss >> comma >> f;
    if (ss.fail()) throw parse_error(line_no, "malformed replay record: " + line);
    if (rec.click != 0 && rec.click != 1) throw parse_error(line_no, "click must be 0 or 1");
    records.push_back(rec);
  }
  return records;
}

/// Offline evaluation by rejection matching: a logged row is consumed only
/// when the online epsilon-greedy draw (from the current iterate) happens to
/// pick the logged action; everything else is discarded without touching the
/// state. Weights use the online action probability of the matched action.
inline ReplayResult replay(const std::vector<ReplayRecord>& records, const ReplayConfig& cfg) {
  const auto model = LossModel<Real>::logistic();
  ReplayResult out;
  out.total = static_cast<long long>(records.size());
  out.state = SgdState<Real>(Params<Real>::Zero(kReplayFeatureDim, 2), cfg.schedule);
  out.accumulator = PlugInAccumulator<Real>(2 * kReplayFeatureDim, 2);
  StreamRng rng(cfg.seed);

  VecX grad_full = VecX::Zero(2 * kReplayFeatureDim);
  long long line_no = 0;
  for (const auto& rec : records) {
    ++line_no;
    int logged;
    if (rec.article_id == cfg.article_arm0) logged = 0;
    else if (rec.article_id == cfg.article_arm1) logged = 1;
    else throw parse_error(line_no, "unknown article id " + std::to_string(rec.article_id));

    const VecX x = replay_design(rec);
    const Real p0 = prob_arm0(x, out.state.theta, cfg.eps);
    const auto [action, action_prob] = sample_action(rng, p0);
    if (action.value != logged) {
      ++out.skipped;
      continue;
    }

    const Real y = rec.click == 1 ? Real(1) : Real(-1);
    const Observation<Real> obs{x, action, y, action_prob};
    const Real w = weight(cfg.scheme, action_prob);
    const Real eta = cfg.schedule.step(out.state.t + 1);
    const auto hess = loss_hess<Real>(model, out.state.theta.arm(action), x, y);
    const VecX g = sgd_step_weighted(out.state, obs, model, w, eta);
    grad_full.setZero();
    grad_full.segment(static_cast<Eigen::Index>(action.value) * kReplayFeatureDim,
                      kReplayFeatureDim) = g;
    out.accumulator.accumulate(w, grad_full, hess, action);
    ++out.consumed;
  }

  if (out.consumed == 0)
    throw config_error("replay: no logged action matched the online policy; empty run");
  out.inference = report(out.state.theta_bar(), out.accumulator, cfg.level);
  return out;
}

/// Synthetic click log with a planted logistic truth and a uniform logging
/// policy: f1..f5 are Dirichlet(1,..,1) (they sum to one), f6 = 1, and the
/// click is drawn from the planted model for the logged article.
inline std::string synthetic_replay_log(long long rows, const Params<Real>& theta_star,
                                        SeedSpec seed, long long article_arm0 = 109520,
                                        long long article_arm1 = 109510) {
  if (theta_star.arm_dim() != kReplayFeatureDim)
    throw config_error("synthetic log: planted theta must have per-arm dimension 5");
  StreamRng rng(seed);
  CsvWriter w("timestamp,article_id,click,f1,f2,f3,f4,f5,f6");
  std::vector<std::string> cells;
  for (long long i = 0; i < rows; ++i) {
    const int arm = rng.bernoulli(0.5) ? 1 : 0;
    std::array<double, 6> f{};
    double total = 0;
    for (int j = 0; j < 5; ++j) {
      f[j] = rng.exponential();
      total += f[j];
    }
    for (int j = 0; j < 5; ++j) f[j] /= total;
    f[5] = 1.0;

    ReplayRecord rec;
    rec.features = f;
    const VecX x = replay_design(rec);
    const Real m = x.dot(theta_star.arm({arm}));
    const double p_click = 1.0 / (1.0 + std::exp(-static_cast<double>(m)));
    const int click = rng.bernoulli(p_click) ? 1 : 0;

    cells.clear();
    cells.push_back(fmt(i));
    cells.push_back(fmt(arm == 0 ? article_arm0 : article_arm1));
    cells.push_back(fmt(click));
    for (int j = 0; j < 6; ++j) cells.push_back(fmt(f[j]));
    w.row(cells);
  }
  return w.str();
}

}  // namespace wsgd

#endif  // WSGD_REPLAY_HPP
