#ifndef WSGD_INFERENCE_HPP
#define WSGD_INFERENCE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wsgd/gauss.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

/// Running sums behind the online plug-in estimates
///   S_hat = (1/n) sum w^2 g g^T,   H_hat = (1/n) sum w hess,
/// with g the full-dimension gradient (zero outside the selected arm's
/// slice) and hess embedded in that arm's diagonal block. Accumulators over
/// disjoint step ranges merge by summation.
template <typename T>
class PlugInAccumulator {
 public:
  PlugInAccumulator() = default;
  PlugInAccumulator(int dim, int arms)
      : s_sum_(Mat<T>::Zero(dim, dim)), h_sum_(Mat<T>::Zero(dim, dim)), arms_(arms) {}

  int dim() const { return static_cast<int>(s_sum_.rows()); }
  int arms() const { return arms_; }
  int arm_dim() const { return dim() / arms_; }
  long long count() const { return n_; }
  long long missing_hessians() const { return missing_hess_; }

  /// smooth_model: a missing Hessian block is a wiring bug for smooth losses,
  /// so it throws; for pinball runs without a density surrogate the H side is
  /// simply recorded as incomplete.
  void accumulate(T w, const Vec<T>& grad_full, const std::optional<Mat<T>>& hess_block,
                  ArmIndex arm, bool smooth_model = true) {
    const int p = arm_dim();
    const Eigen::Index off = static_cast<Eigen::Index>(arm.value) * p;
    const auto g = grad_full.segment(off, p);
    s_sum_.block(off, off, p, p).noalias() += (w * w) * (g * g.transpose());
    if (hess_block) {
      h_sum_.block(off, off, p, p) += w * (*hess_block);
    } else if (smooth_model) {
      throw std::logic_error("plug-in: Hessian absent for a smooth loss model");
    } else {
      ++missing_hess_;
    }
    ++n_;
  }

  void merge(const PlugInAccumulator& other) {
    s_sum_ += other.s_sum_;
    h_sum_ += other.h_sum_;
    n_ += other.n_;
    missing_hess_ += other.missing_hess_;
  }

  Mat<T> s_hat() const { return s_sum_ / static_cast<T>(n_); }
  Mat<T> h_hat() const { return h_sum_ / static_cast<T>(n_); }

  const Mat<T>& s_sum() const { return s_sum_; }
  const Mat<T>& h_sum() const { return h_sum_; }

 private:
  Mat<T> s_sum_;
  Mat<T> h_sum_;
  int arms_ = 2;
  long long n_ = 0;
  long long missing_hess_ = 0;
};

namespace detail {

/// Inverts one symmetric per-arm curvature block, naming the arm on failure.
template <typename T>
Mat<T> invert_arm_block(const Mat<T>& block, int arm) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(block);
  const auto& ev = es.eigenvalues();
  const T scale = std::max<T>(ev.cwiseAbs().maxCoeff(), T(1e-300));
  if (ev.minCoeff() <= scale * T(1e-12)) throw rank_error(arm);
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Covariance estimate of theta_bar itself (not the sqrt(n)-scaled error):
/// (1/n) H_hat^{-1} S_hat H_hat^{-1}. H_hat and S_hat are block-diagonal by
/// construction, so the sandwich is assembled arm block by arm block.
template <typename T>
Mat<T> sandwich(const PlugInAccumulator<T>& acc) {
  if (acc.count() < 1) throw config_error("sandwich: empty accumulator");
  const int p = acc.arm_dim();
  const Mat<T> h = acc.h_hat();
  const Mat<T> s = acc.s_hat();
  Mat<T> out = Mat<T>::Zero(acc.dim(), acc.dim());
  for (int a = 0; a < acc.arms(); ++a) {
    const Eigen::Index off = static_cast<Eigen::Index>(a) * p;
    const Mat<T> hinv = detail::invert_arm_block<T>(h.block(off, off, p, p), a);
    Mat<T> blk = hinv * s.block(off, off, p, p) * hinv / static_cast<T>(acc.count());
    out.block(off, off, p, p) = T(0.5) * (blk + blk.transpose());
  }
  return out;
}

struct InferenceRow {
  int parameter;  // coordinate index into the concatenated vector
  double estimate;
  double std_error;
  double ci_low;
  double ci_high;
  double t_value;
  double p_value;
};

struct InferenceReport {
  std::vector<InferenceRow> rows;
  long long n = 0;
  double level = 0.95;
};

template <typename T>
InferenceReport report(const Vec<T>& theta_bar, const PlugInAccumulator<T>& acc, double level) {
  const Mat<T> cov = sandwich(acc);
  const double z = z_for_level(level);
  InferenceReport rep;
  rep.n = acc.count();
  rep.level = level;
  rep.rows.reserve(theta_bar.size());
  for (Eigen::Index j = 0; j < theta_bar.size(); ++j) {
    InferenceRow row;
    row.parameter = static_cast<int>(j);
    row.estimate = static_cast<double>(theta_bar[j]);
    row.std_error = std::sqrt(static_cast<double>(cov(j, j)));
    row.ci_low = row.estimate - z * row.std_error;
    row.ci_high = row.estimate + z * row.std_error;
    if (row.std_error > 0) {
      row.t_value = row.estimate / row.std_error;
    } else {
      row.t_value = row.estimate == 0 ? 0.0
                    : std::copysign(std::numeric_limits<double>::infinity(), row.estimate);
    }
    row.p_value = two_sided_p(row.t_value);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace wsgd

#endif  // WSGD_INFERENCE_HPP
