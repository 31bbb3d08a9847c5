#ifndef WSGD_STATS_HPP
#define WSGD_STATS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wsgd/gauss.hpp"

namespace wsgd {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_sd: need at least 2 points");
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (v[mid - 1] + hi);
}

inline double skewness(const std::vector<double>& v) {
  const double m = mean(v);
  double m2 = 0, m3 = 0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(v.size());
  m3 /= static_cast<double>(v.size());
  return m3 / std::pow(m2, 1.5);
}

inline double excess_kurtosis(const std::vector<double>& v) {
  const double m = mean(v);
  double m2 = 0, m4 = 0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(v.size());
  m4 /= static_cast<double>(v.size());
  return m4 / (m2 * m2) - 3.0;
}

/// Kolmogorov-Smirnov distance between the sample and a reference CDF.
inline double ks_statistic(std::vector<double> v, const std::function<double(double)>& cdf) {
  if (v.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double ks = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return ks;
}

/// KS distance to the zero-mean normal matching the sample's second moment.
inline double ks_vs_matched_normal(const std::vector<double>& v) {
  double m2 = 0;
  for (double x : v) m2 += x * x;
  m2 /= static_cast<double>(v.size());
  const double sd = std::sqrt(m2);
  return ks_statistic(v, [sd](double x) { return normal_cdf(x / sd); });
}

}  // namespace wsgd

#endif  // WSGD_STATS_HPP
