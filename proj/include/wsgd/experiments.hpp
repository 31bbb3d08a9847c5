#ifndef WSGD_EXPERIMENTS_HPP
#define WSGD_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsgd/csv.hpp"
#include "wsgd/engine.hpp"
#include "wsgd/environment.hpp"
#include "wsgd/oracle.hpp"
#include "wsgd/parallel.hpp"
#include "wsgd/stats.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

struct McConfig {
  Environment<Real> env;
  WeightScheme<Real> scheme = WeightScheme<Real>::vanilla();
  EpsilonSchedule<Real> eps = EpsilonSchedule<Real>::constant(0.02);
  StepSchedule<Real> schedule;
  long long n_steps = 80000;
  int n_reps = 1000;
  std::uint64_t master_seed = 1;
  double level = 0.95;
  bool warm_start = false;  // start at theta* instead of zero
  int parallelism = 1;
  bool record_weight_range = true;
};

/// One replication's contribution: the sqrt(t)-scaled deviation, the
/// sqrt(t)-scaled plug-in standard errors, and the coverage indicators.
struct McRep {
  VecX scaled_dev;
  VecX se_plugin;  // sqrt(t * sandwich_jj)
  std::vector<std::uint8_t> cover_plugin;
  std::vector<std::uint8_t> cover_oracle;
  double min_weight = 0, max_weight = 0;
  bool degenerate = false;
};

struct McSummary {
  int dim = 0;
  long long t = 0;
  int n_reps = 0;
  double level = 0.95;
  VecX mean_dev, sd_dev;          // moments of sqrt(t)(theta_bar - theta*)
  VecX coverage_plugin;           // per-coordinate rates
  VecX coverage_oracle;
  VecX mean_len_plugin;           // sqrt(t)-scaled mean CI length
  VecX len_oracle;                // sqrt(t)-scaled oracle length
  std::vector<std::uint8_t> degenerate;
  bool has_oracle = false;
  double min_weight = 0, max_weight = 0;
  std::string fingerprint;
};

struct McResult {
  McSummary summary;
  std::vector<McRep> reps;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_fingerprint(const McConfig& cfg) {
  std::string s;
  s += "kind=" + std::to_string(static_cast<int>(cfg.env.kind));
  s += ";p=" + std::to_string(cfg.env.dim());
  s += ";sigma=" + fmt(cfg.env.sigma);
  s += ";tau=" + fmt(cfg.env.tau);
  for (Eigen::Index i = 0; i < cfg.env.mu.size(); ++i) s += "," + fmt(cfg.env.mu[i]);
  for (Eigen::Index i = 0; i < cfg.env.theta_star.vec().size(); ++i)
    s += "," + fmt(cfg.env.theta_star.vec()[i]);
  s += ";scheme=" + cfg.scheme.name();
  s += ";eps=" + fmt(cfg.eps.eps_inf) + "," + fmt(cfg.eps.c) + "," + fmt(cfg.eps.beta);
  s += ";eta0=" + fmt(cfg.schedule.eta0) + ";alpha=" + fmt(cfg.schedule.alpha) +
       ";t0=" + std::to_string(cfg.schedule.meltdown);
  s += ";steps=" + std::to_string(cfg.n_steps) + ";reps=" + std::to_string(cfg.n_reps);
  s += ";seed=" + std::to_string(cfg.master_seed) + ";level=" + fmt(cfg.level);
  s += ";warm=" + std::to_string(cfg.warm_start ? 1 : 0);
  return fnv1a_hex(s);
}

/// Closed-form covariance for environments that have one.
inline std::optional<OracleCovariance<Real>> oracle_for(const McConfig& cfg) {
  const auto& env = cfg.env;
  if (env.kind == Environment<Real>::Kind::logistic) return std::nullopt;
  if (!(env.sigma > 0)) return std::nullopt;  // degenerate zero-noise setup
  LinearGaussianSpec<Real> spec{env.mu, env.theta_star, env.sigma, epsilon_at(cfg.eps, cfg.n_steps),
                                cfg.scheme};
  if (env.kind == Environment<Real>::Kind::linear) return oracle_cov(spec);
  return oracle_cov_quantile(spec, env.tau, env.density_at_zero());
}

}  // namespace detail

/// Independent replications of the online loop with per-replication random
/// streams keyed by (master_seed, rep). Results are merged in stream order,
/// so the output is identical at any parallelism degree.
inline McResult run_mc(const McConfig& cfg) {
  const int d = cfg.env.theta_star.dim();
  const auto model = cfg.env.loss();
  const double z = z_for_level(cfg.level);

  const auto oracle = detail::oracle_for(cfg);
  VecX oracle_len = VecX::Zero(d);
  if (oracle)
    for (int j = 0; j < d; ++j) oracle_len[j] = ci_length_sqrt_t(oracle->sigma_cov(j, j), cfg.level);

  PlugInPolicy<Real> plug = PlugInPolicy<Real>::native();
  if (cfg.env.kind == Environment<Real>::Kind::quantile)
    plug = PlugInPolicy<Real>::density(cfg.env.density_at_zero());

  const Real sqrt_t = std::sqrt(static_cast<Real>(cfg.n_steps));
  std::vector<McRep> reps(cfg.n_reps);

  parallel_for(cfg.n_reps, cfg.parallelism, [&](int r) {
    StreamRng rng(cfg.master_seed, static_cast<std::uint64_t>(r));
    Params<Real> theta0 = cfg.warm_start ? cfg.env.theta_star
                                         : Params<Real>::Zero(cfg.env.dim(), 2);
    RunResult<Real> run;
    try {
      run = run_online<Real>(cfg.env, model, cfg.scheme, cfg.eps, cfg.schedule, cfg.n_steps, rng,
                             std::move(theta0), plug);
    } catch (const divergence_error& e) {
      throw divergence_error(e.step, e.theta_norm, static_cast<long long>(r));
    }

    McRep rep;
    rep.scaled_dev = sqrt_t * (run.state.theta_bar() - cfg.env.theta_star.vec());
    const MatX cov = sandwich(run.accumulator);
    rep.se_plugin.resize(d);
    rep.cover_plugin.resize(d);
    rep.cover_oracle.assign(d, 0);
    for (int j = 0; j < d; ++j) {
      rep.se_plugin[j] = sqrt_t * std::sqrt(cov(j, j));
      rep.cover_plugin[j] = std::abs(rep.scaled_dev[j]) <= z * rep.se_plugin[j] ? 1 : 0;
      if (oracle)
        rep.cover_oracle[j] =
            std::abs(rep.scaled_dev[j]) <= z * std::sqrt(oracle->sigma_cov(j, j)) ? 1 : 0;
      if (!(rep.se_plugin[j] > 0)) rep.degenerate = true;
    }
    rep.min_weight = run.state.min_weight;
    rep.max_weight = run.state.max_weight;
    reps[r] = std::move(rep);
  });

  McSummary sum;
  sum.dim = d;
  sum.t = cfg.n_steps;
  sum.n_reps = cfg.n_reps;
  sum.level = cfg.level;
  sum.has_oracle = oracle.has_value();
  sum.len_oracle = oracle_len;
  sum.fingerprint = detail::config_fingerprint(cfg);
  sum.mean_dev.resize(d);
  sum.sd_dev.resize(d);
  sum.coverage_plugin.resize(d);
  sum.coverage_oracle = VecX::Zero(d);
  sum.mean_len_plugin.resize(d);
  sum.degenerate.assign(d, 0);
  sum.min_weight = std::numeric_limits<double>::infinity();
  sum.max_weight = -std::numeric_limits<double>::infinity();

  std::vector<double> col(cfg.n_reps);
  for (int j = 0; j < d; ++j) {
    for (int r = 0; r < cfg.n_reps; ++r) col[r] = reps[r].scaled_dev[j];
    sum.mean_dev[j] = mean(col);
    sum.sd_dev[j] = cfg.n_reps > 1 ? sample_sd(col) : 0.0;
    double cp = 0, co = 0, len = 0;
    for (int r = 0; r < cfg.n_reps; ++r) {
      cp += reps[r].cover_plugin[j];
      co += reps[r].cover_oracle[j];
      len += 2.0 * z * reps[r].se_plugin[j];
    }
    sum.coverage_plugin[j] = cp / cfg.n_reps;
    sum.coverage_oracle[j] = co / cfg.n_reps;
    sum.mean_len_plugin[j] = len / cfg.n_reps;
    if (!(sum.sd_dev[j] > 1e-12)) sum.degenerate[j] = 1;
  }
  for (const auto& rep : reps) {
    sum.min_weight = std::min(sum.min_weight, rep.min_weight);
    sum.max_weight = std::max(sum.max_weight, rep.max_weight);
    if (rep.degenerate)
      for (auto& flag : sum.degenerate) flag = 1;
  }
  return {std::move(sum), std::move(reps)};
}

/// Table layout of the coverage study: one row per (scheme, arm, sample
/// size). Coverage and length are first averaged over the arm's coordinates
/// within each replication; the mean and sd columns summarize those per-rep
/// arm averages across replications.
struct CoverageRow {
  std::string scheme;
  int arm;
  long long n;
  double plugin_cov, plugin_cov_sd;
  double oracle_cov, oracle_cov_sd;
  double plugin_len, plugin_len_sd;
  double oracle_len;
};

inline std::vector<CoverageRow> coverage_rows_from(const McResult& mc, const std::string& scheme) {
  const int d = mc.summary.dim;
  const int p = d / 2;
  const double z = z_for_level(mc.summary.level);
  std::vector<CoverageRow> rows;
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<double> cov_frac, orc_frac, len_avg;
    cov_frac.reserve(mc.reps.size());
    for (const auto& rep : mc.reps) {
      double cp = 0, co = 0, len = 0;
      for (int j = arm * p; j < (arm + 1) * p; ++j) {
        cp += rep.cover_plugin[j];
        co += rep.cover_oracle[j];
        len += 2.0 * z * rep.se_plugin[j];
      }
      cov_frac.push_back(cp / p);
      orc_frac.push_back(co / p);
      len_avg.push_back(len / p);
    }
    CoverageRow row;
    row.scheme = scheme;
    row.arm = arm;
    row.n = mc.summary.t;
    row.plugin_cov = mean(cov_frac);
    row.plugin_cov_sd = cov_frac.size() > 1 ? sample_sd(cov_frac) : 0.0;
    row.oracle_cov = mean(orc_frac);
    row.oracle_cov_sd = orc_frac.size() > 1 ? sample_sd(orc_frac) : 0.0;
    row.plugin_len = mean(len_avg);
    row.plugin_len_sd = len_avg.size() > 1 ? sample_sd(len_avg) : 0.0;
    double orc_len = 0;
    for (int j = arm * p; j < (arm + 1) * p; ++j) orc_len += mc.summary.len_oracle[j];
    row.oracle_len = orc_len / p;
    rows.push_back(row);
  }
  return rows;
}

inline std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  CsvWriter w(
      "scheme,arm,n,plugin_cov,plugin_cov_sd,oracle_cov,oracle_cov_sd,plugin_len,plugin_len_sd,"
      "oracle_len");
  for (const auto& r : rows) {
    w.row({r.scheme, fmt(r.arm), fmt(r.n), fmt(r.plugin_cov), fmt(r.plugin_cov_sd),
           fmt(r.oracle_cov), fmt(r.oracle_cov_sd), fmt(r.plugin_len), fmt(r.plugin_len_sd),
           fmt(r.oracle_len)});
  }
  return w.str();
}

inline std::string mc_summary_csv(const McSummary& s) {
  CsvWriter w(
      "coordinate,mean_dev,sd_dev,coverage_plugin,coverage_oracle,mean_len_plugin,oracle_len,"
      "degenerate");
  for (int j = 0; j < s.dim; ++j) {
    w.row({fmt(j), fmt(s.mean_dev[j]), fmt(s.sd_dev[j]), fmt(s.coverage_plugin[j]),
           fmt(s.coverage_oracle[j]), fmt(s.mean_len_plugin[j]), fmt(s.len_oracle[j]),
           fmt(static_cast<int>(s.degenerate[j]))});
  }
  return w.str();
}

inline std::string mc_raw_csv(const McResult& mc) {
  std::string header = "stream_id";
  for (int j = 0; j < mc.summary.dim; ++j) header += ",dev_" + std::to_string(j);
  for (int j = 0; j < mc.summary.dim; ++j) header += ",se_plugin_" + std::to_string(j);
  CsvWriter w(header);
  std::vector<std::string> cells;
  for (size_t r = 0; r < mc.reps.size(); ++r) {
    cells.clear();
    cells.push_back(fmt(static_cast<long long>(r)));
    for (int j = 0; j < mc.summary.dim; ++j) cells.push_back(fmt(mc.reps[r].scaled_dev[j]));
    for (int j = 0; j < mc.summary.dim; ++j) cells.push_back(fmt(mc.reps[r].se_plugin[j]));
    w.row(cells);
  }
  return w.str();
}

}  // namespace wsgd

#endif  // WSGD_EXPERIMENTS_HPP
