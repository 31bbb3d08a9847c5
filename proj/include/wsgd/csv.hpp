#ifndef WSGD_CSV_HPP
#define WSGD_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wsgd/engine.hpp"
#include "wsgd/inference.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// Shortest-exact decimal rendering; fixed format keeps every emitted file
/// byte-stable across reruns and parallelism degrees.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string fmt(long long x) { return std::to_string(x); }
inline std::string fmt(int x) { return std::to_string(x); }

class CsvWriter {
 public:
  explicit CsvWriter(std::string header) { out_ = std::move(header) + "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path.string() + " for writing");
  f << contents;
  if (!f) throw io_error("failed writing " + path.string());
}

/// Trajectory export: t, theta[0..d), theta_bar[0..d), action, weight, eta.
template <typename T>
std::string trajectory_csv(const Trajectory<T>& traj, int dim) {
  std::string header = "t";
  for (int j = 0; j < dim; ++j) header += ",theta_" + std::to_string(j);
  for (int j = 0; j < dim; ++j) header += ",theta_bar_" + std::to_string(j);
  header += ",action,weight,eta";
  CsvWriter w(header);
  std::vector<std::string> cells;
  for (const auto& e : traj.entries) {
    cells.clear();
    cells.push_back(fmt(e.t));
    for (int j = 0; j < dim; ++j) cells.push_back(fmt(static_cast<double>(e.theta[j])));
    for (int j = 0; j < dim; ++j) cells.push_back(fmt(static_cast<double>(e.theta_bar[j])));
    cells.push_back(fmt(e.action));
    cells.push_back(fmt(static_cast<double>(e.weight)));
    cells.push_back(fmt(static_cast<double>(e.eta)));
    w.row(cells);
  }
  return w.str();
}

/// Inference report in the estimate / s.e. / bounds / t / p column layout.
inline std::string report_csv(const InferenceReport& rep) {
  CsvWriter w("parameter,estimate,se,lb,ub,t_value,p_value");
  for (const auto& r : rep.rows) {
    w.row({"theta_" + std::to_string(r.parameter + 1), fmt(r.estimate), fmt(r.std_error),
           fmt(r.ci_low), fmt(r.ci_high), fmt(r.t_value), fmt(r.p_value)});
  }
  return w.str();
}

}  // namespace wsgd

#endif  // WSGD_CSV_HPP
