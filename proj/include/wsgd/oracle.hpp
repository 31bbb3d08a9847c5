#ifndef WSGD_ORACLE_HPP
#define WSGD_ORACLE_HPP

#include <array>
#include <cmath>

#include "wsgd/engine.hpp"
#include "wsgd/gauss.hpp"
#include "wsgd/losses.hpp"
#include "wsgd/policy.hpp"
#include "wsgd/rng.hpp"
#include "wsgd/types.hpp"

namespace wsgd {

enum class Side { pos, neg };

/// Which closed form of the half-space second moments to use.
///
/// `analytic` is the Gaussian-moment derivation of E[X X^T 1{±X.nu > 0}] for
/// X ~ N(mu, I); it is the form the Monte-Carlo arbiter confirms and the one
/// every oracle here is built on. `paper_literal` reproduces the published
/// expression Phi(a) I + a e^{a^2/2} / sqrt(2 pi) nu nu^T with
/// a = m / sqrt(1 + m^2); it disagrees with the sampled moments whenever
/// mu != 0 and is kept only for side-by-side documentation. The two coincide
/// at mu = 0, the regime of all headline numbers.
enum class GForm { analytic, paper_literal };

/// E[X X^T 1{X.nu > 0}] (side = pos) or its complement for X ~ N(mu, I_p).
///
/// Decompose X = z nu + X_perp with z = X.nu ~ N(m, 1), m = mu.nu, and
/// X_perp independent with mean mu_perp = mu - m nu. One-dimensional
/// truncated moments of z then give
///   G = P (I - nu nu^T + mu_perp mu_perp^T) + M2 nu nu^T
///       + M1 (nu mu_perp^T + mu_perp nu^T),
/// with P = E[1], M1 = E[z 1], M2 = E[z^2 1] over the half line.
template <typename T>
Mat<T> truncated_second_moment(const Vec<T>& mu, const Vec<T>& nu, Side side,
                               GForm form = GForm::analytic) {
  if (std::abs(nu.norm() - T(1)) > T(1e-10))
    throw std::invalid_argument("truncated_second_moment: nu must be a unit vector");
  const Eigen::Index p = mu.size();
  const T m = mu.dot(nu);
  const Mat<T> eye = Mat<T>::Identity(p, p);

  if (form == GForm::paper_literal) {
    const T a = m / std::sqrt(T(1) + m * m);
    const T density_term = a * std::exp(a * a / T(2)) / std::sqrt(T(2) * M_PI);
    const T sign = side == Side::pos ? T(1) : T(-1);
    const T head = side == Side::pos ? normal_cdf(a) : T(1) - normal_cdf(a);
    return head * eye + sign * density_term * (nu * nu.transpose());
  }

  const Vec<T> mu_perp = mu - m * nu;
  T prob, m1, m2;
  if (side == Side::pos) {
    prob = normal_cdf(m);
    m1 = m * normal_cdf(m) + normal_pdf(m);
    m2 = (T(1) + m * m) * normal_cdf(m) + m * normal_pdf(m);
  } else {
    prob = normal_cdf(-m);
    m1 = m * normal_cdf(-m) - normal_pdf(m);
    m2 = (T(1) + m * m) * normal_cdf(-m) - m * normal_pdf(m);
  }
  Mat<T> g = prob * (eye - nu * nu.transpose() + mu_perp * mu_perp.transpose());
  g.noalias() += m2 * (nu * nu.transpose());
  g.noalias() += m1 * (nu * mu_perp.transpose() + mu_perp * nu.transpose());
  return T(0.5) * (g + g.transpose());
}

/// Brute-force Monte-Carlo estimate of the half-space second moments with
/// elementwise standard errors. This is the arbiter the closed form above is
/// validated against before it is wired into any oracle.
struct McMoments {
  MatX g1, g2;
  MatX se1, se2;
  long long n = 0;

  MatX total() const { return g1 + g2; }
};

inline McMoments mc_g(const VecX& mu, const VecX& nu, long long n_samples, SeedSpec seed) {
  if (n_samples < 10000) throw config_error("mc_g: need at least 1e4 samples");
  const Eigen::Index p = mu.size();
  StreamRng rng(seed);
  MatX sum1 = MatX::Zero(p, p), sum2 = MatX::Zero(p, p);
  MatX sq1 = MatX::Zero(p, p), sq2 = MatX::Zero(p, p);
  VecX x(p);
  for (long long i = 0; i < n_samples; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x[j] = mu[j] + rng.normal();
    const MatX outer = x * x.transpose();
    if (x.dot(nu) > 0) {
      sum1 += outer;
      sq1 += outer.cwiseProduct(outer);
    } else {
      sum2 += outer;
      sq2 += outer.cwiseProduct(outer);
    }
  }
  const double n = static_cast<double>(n_samples);
  McMoments out;
  out.n = n_samples;
  out.g1 = sum1 / n;
  out.g2 = sum2 / n;
  out.se1 = ((sq1 / n - out.g1.cwiseProduct(out.g1)).cwiseMax(0.0) / n).cwiseSqrt();
  out.se2 = ((sq2 / n - out.g2.cwiseProduct(out.g2)).cwiseMax(0.0) / n).cwiseSqrt();
  return out;
}

/// Two-arm linear-Gaussian setting: X ~ N(mu, I_p), reward noise sd sigma,
/// constant-epsilon greedy policy, and a weight scheme phi applied to the
/// realized action probability.
template <typename T>
struct LinearGaussianSpec {
  Vec<T> mu;
  Params<T> theta_star;
  T sigma = T(0.1);
  T eps = T(0.02);
  WeightScheme<T> scheme = WeightScheme<T>::vanilla();

  Vec<T> margin_direction() const {
    const Vec<T> delta = theta_star.arm({0}) - theta_star.arm({1});
    const T norm = delta.norm();
    if (!(norm > T(0))) throw config_error("degenerate theta_star: the two arms coincide");
    return delta / norm;
  }

  void validate() const {
    if (theta_star.arms() != 2) throw config_error("oracle: exactly 2 arms");
    if (mu.size() != theta_star.arm_dim()) throw config_error("oracle: mu dimension mismatch");
    if (!(sigma > T(0))) throw config_error("oracle: sigma must be > 0");
    if (!(eps > T(0) && eps < T(1))) throw config_error("oracle: eps must lie in (0,1)");
    (void)margin_direction();
  }
};

/// Closed-form pieces of the asymptotic law sqrt(t)(theta_bar - theta*)
/// -> N(0, H^{-1} S H^{-1}): block-diagonal H and S, the assembled sandwich,
/// the half-space moments G1/G2 they are built from, and the margin data.
template <typename T>
struct OracleCovariance {
  Mat<T> h, s, sigma_cov;
  Mat<T> g1, g2;
  Vec<T> nu;
  T m = T(0);        // mu . nu
  T a_paper = T(0);  // m / sqrt(1 + m^2), the published reparametrization
};

namespace detail {

/// Assembles H and S from half-space moments with pluggable scalar factors:
/// the linear model has s_noise = sigma^2 and h_curv = 1; the quantile model
/// at a known noise density substitutes s_noise = tau(1-tau), h_curv = q(0).
template <typename T>
OracleCovariance<T> assemble_oracle(const Vec<T>& mu, const Vec<T>& nu, T eps,
                                    const WeightScheme<T>& scheme, T s_noise, T h_curv,
                                    GForm form) {
  const Eigen::Index p = mu.size();
  const T e1 = T(1) - eps / T(2);
  const T e2 = eps / T(2);
  const T w1 = weight(scheme, e1);
  const T w2 = weight(scheme, e2);

  OracleCovariance<T> oc;
  oc.nu = nu;
  oc.m = mu.dot(nu);
  oc.a_paper = oc.m / std::sqrt(T(1) + oc.m * oc.m);
  oc.g1 = truncated_second_moment<T>(mu, nu, Side::pos, form);
  oc.g2 = truncated_second_moment<T>(mu, nu, Side::neg, form);

  const Mat<T> h1 = h_curv * (e1 * w1 * oc.g1 + e2 * w2 * oc.g2);
  const Mat<T> h2 = h_curv * (e2 * w2 * oc.g1 + e1 * w1 * oc.g2);
  const Mat<T> s1 = s_noise * (e1 * w1 * w1 * oc.g1 + e2 * w2 * w2 * oc.g2);
  const Mat<T> s2 = s_noise * (e2 * w2 * w2 * oc.g1 + e1 * w1 * w1 * oc.g2);

  oc.h = Mat<T>::Zero(2 * p, 2 * p);
  oc.s = Mat<T>::Zero(2 * p, 2 * p);
  oc.h.topLeftCorner(p, p) = h1;
  oc.h.bottomRightCorner(p, p) = h2;
  oc.s.topLeftCorner(p, p) = s1;
  oc.s.bottomRightCorner(p, p) = s2;

  oc.sigma_cov = Mat<T>::Zero(2 * p, 2 * p);
  for (int arm = 0; arm < 2; ++arm) {
    const Eigen::Index off = arm * p;
    const Mat<T> hinv = detail::invert_arm_block<T>(Mat<T>(oc.h.block(off, off, p, p)), arm);
    Mat<T> blk = hinv * oc.s.block(off, off, p, p) * hinv;
    oc.sigma_cov.block(off, off, p, p) = T(0.5) * (blk + blk.transpose());
  }
  return oc;
}

}  // namespace detail

template <typename T>
OracleCovariance<T> oracle_cov(const LinearGaussianSpec<T>& spec, GForm form = GForm::analytic) {
  spec.validate();
  return detail::assemble_oracle<T>(spec.mu, spec.margin_direction(), spec.eps, spec.scheme,
                                    spec.sigma * spec.sigma, T(1), form);
}

/// Quantile-loss analogue at a known noise density: the score factor is
/// tau(1-tau) and the curvature carries q(0).
template <typename T>
OracleCovariance<T> oracle_cov_quantile(const LinearGaussianSpec<T>& spec, T tau, T q0,
                                        GForm form = GForm::analytic) {
  spec.validate();
  if (!(tau > T(0) && tau < T(1))) throw config_error("oracle: tau must lie in (0,1)");
  if (!(q0 > T(0))) throw config_error("oracle: q(0) must be > 0");
  return detail::assemble_oracle<T>(spec.mu, spec.margin_direction(), spec.eps, spec.scheme,
                                    tau * (T(1) - tau), q0, form);
}

/// sqrt(t)-scaled two-sided 95% interval length for one coordinate variance.
template <typename T>
T ci_length_sqrt_t(T variance, double level = 0.95) {
  return T(2) * static_cast<T>(z_for_level(level)) * std::sqrt(variance);
}

/// Eigenvalue profile of the sandwich under the power weights p^gamma:
///   g(gamma) = [A^{1+2g} b + B^{1+2g} (1-b)] / [A^{1+g} b + B^{1+g} (1-b)]^2
/// with A = 1 - eps/2, B = eps/2. Minimized over gamma at 0 for every
/// b in (0,1); b is an explicit argument here because different eigenvalues
/// of the same covariance realize different b values.
template <typename T>
T g_curve(T gamma, T eps, T b) {
  if (!(eps > T(0) && eps < T(1))) throw std::invalid_argument("g_curve: eps must lie in (0,1)");
  if (!(b > T(0) && b < T(1))) throw std::invalid_argument("g_curve: b must lie in (0,1)");
  const T A = T(1) - eps / T(2);
  const T B = eps / T(2);
  const T num = std::pow(A, T(1) + T(2) * gamma) * b + std::pow(B, T(1) + T(2) * gamma) * (T(1) - b);
  const T den = std::pow(A, T(1) + gamma) * b + std::pow(B, T(1) + gamma) * (T(1) - b);
  return num / (den * den);
}

/// The four eigenvalue coefficients of Sigma / s_noise for a power-weighted
/// spec: the spectrum is {c1 (mult p-1), c1+c2, c3 (mult p-1), c3+c4}.
///
/// In the analytic convention the profile follows from the exact half-space
/// moments. Writing m = mu.nu, the directions orthogonal to nu see
/// b = Phi(m), while the nu direction sees b = Phi(m) + m phi(m) / (1+m^2)
/// together with an overall 1/(1+m^2) scale (the variance of X.nu relative
/// to... the second moment of the z component). This matches a dense
/// eigendecomposition of the assembled covariance whenever mu is parallel to
/// nu (including mu = 0). The paper_literal convention evaluates the
/// published c-formulas with a = m/sqrt(1+m^2) verbatim.
template <typename T>
std::array<T, 4> eigen_c(const LinearGaussianSpec<T>& spec, GForm form = GForm::analytic) {
  spec.validate();
  if (spec.scheme.kind != WeightScheme<T>::Kind::power)
    throw config_error("eigen_c: defined for the power weight scheme");
  const T gamma = spec.scheme.gamma;
  const T m = spec.mu.dot(spec.margin_direction());

  T b_perp, b_nu, nu_scale;
  if (form == GForm::paper_literal) {
    const T a = m / std::sqrt(T(1) + m * m);
    const T density_term = a * std::exp(a * a / T(2)) / std::sqrt(T(2) * M_PI);
    b_perp = normal_cdf(a);
    b_nu = normal_cdf(a) + density_term;
    nu_scale = T(1);
  } else {
    b_perp = normal_cdf(m);
    b_nu = normal_cdf(m) + m * normal_pdf(m) / (T(1) + m * m);
    nu_scale = T(1) / (T(1) + m * m);
  }

  const T c1 = g_curve(gamma, spec.eps, b_perp);
  const T c2 = nu_scale * g_curve(gamma, spec.eps, b_nu) - c1;
  const T c3 = g_curve(gamma, spec.eps, T(1) - b_perp);
  const T c4 = nu_scale * g_curve(gamma, spec.eps, T(1) - b_nu) - c3;
  return {c1, c2, c3, c4};
}

/// Pieces of the error decomposition
///   sqrt(t) Sigma^{-1/2} (theta_bar_t - theta*) = W + R2 + R3 + residual,
/// where W is the normalized martingale transform of the weighted gradient
/// noise at theta*, R2 the initial-condition term, R3 the curvature
/// linearization term, and the residual collects what remains (the policy
/// adaptation and covariance-mismatch terms).
template <typename T>
struct BahadurParts {
  Vec<T> w, r2, r3, residual;
};

namespace detail {

template <typename T>
Mat<T> inverse_sqrt_psd(const Mat<T>& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(m);
  const auto& ev = es.eigenvalues();
  const T scale = std::max<T>(ev.cwiseAbs().maxCoeff(), T(1e-300));
  if (ev.minCoeff() <= scale * T(1e-12))
    throw std::runtime_error(std::string(what) + ": matrix is not positive definite");
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

/// Decomposes the scaled estimation error at time t from a stride-1
/// trajectory. The matrix products Q_i^t = eta_i sum_j prod_k (I - eta_k H)
/// collapse to scalars per H-eigenvalue via the backward recurrence
/// T_i = 1 + (1 - eta_{i+1} lambda) T_{i+1}, so everything runs in O(t d^2).
template <typename T>
BahadurParts<T> bahadur_decompose(const Trajectory<T>& traj, const LinearGaussianSpec<T>& spec,
                                  const OracleCovariance<T>& oc, const LossModel<T>& model,
                                  const StepSchedule<T>& sched, long long t,
                                  GForm form = GForm::analytic) {
  if (!traj.record_path || traj.stride > 1)
    throw config_error("bahadur_decompose: needs a stride-1 trajectory with the iterate path");
  if (t < 2 || static_cast<long long>(traj.theta_path.size()) < t ||
      static_cast<long long>(traj.obs_path.size()) < t - 1)
    throw config_error("bahadur_decompose: trajectory shorter than requested t");

  const Eigen::Index d = oc.h.rows();
  const Eigen::Index p = d / 2;
  const Vec<T>& theta_star = spec.theta_star.vec();

  Eigen::SelfAdjointEigenSolver<Mat<T>> hes(oc.h);
  const Mat<T> u = hes.eigenvectors();
  const Vec<T> lam = hes.eigenvalues();
  const Mat<T> s_tilde = u.transpose() * oc.s * u;
  const Mat<T> sigma_inv_sqrt = detail::inverse_sqrt_psd(oc.sigma_cov, "bahadur: Sigma");

  // Backward pass for the Q_i^t diagonal coefficients (rows i = 0..t-1).
  Mat<T> q(t, d);
  Vec<T> tcoef = Vec<T>::Ones(d);
  q.row(t - 1) = sched.step(t - 1) * tcoef.transpose();
  for (long long i = t - 2; i >= 0; --i) {
    const T eta_next = sched.step(i + 1);
    for (Eigen::Index r = 0; r < d; ++r) tcoef[r] = T(1) + (T(1) - eta_next * lam[r]) * tcoef[r];
    // Row 0 keeps the bare sum (its eta_0 cancels against the 1/eta_0 in R2).
    if (i == 0)
      q.row(i) = tcoef.transpose();
    else
      q.row(i) = sched.step(i) * tcoef.transpose();
  }

  const bool centered = spec.mu.isZero(0);
  Vec<T> xi = Vec<T>::Zero(d);
  Vec<T> acc_w = Vec<T>::Zero(d);
  Vec<T> acc_r3 = Vec<T>::Zero(d);
  Mat<T> qq = Mat<T>::Zero(d, d);
  Vec<T> theta_sum = traj.theta_path[0];

  for (long long i = 1; i <= t - 1; ++i) {
    const Observation<T>& obs = traj.obs_path[i - 1];
    const T w = traj.weight_path[i - 1];
    xi.setZero();
    xi.segment(static_cast<Eigen::Index>(obs.action.value) * p, p) =
        w * loss_grad<T>(model, Vec<T>(theta_star.segment(
                                    static_cast<Eigen::Index>(obs.action.value) * p, p)),
                         obs.x, obs.reward);
    const Vec<T> xi_t = u.transpose() * xi;
    acc_w += q.row(i).transpose().cwiseProduct(xi_t);
    qq.noalias() += q.row(i).transpose() * q.row(i);

    const Vec<T>& theta_i = traj.theta_path[i];
    theta_sum += theta_i;
    if (!centered) {
      // Population-gradient curvature at the iterate's own margin direction.
      const Vec<T> delta = theta_i.head(p) - theta_i.tail(p);
      const T dn = delta.norm();
      if (dn > T(0)) {
        const Vec<T> nu_i = delta / dn;
        const Mat<T> g1 = truncated_second_moment<T>(spec.mu, nu_i, Side::pos, form);
        const Mat<T> g2 = truncated_second_moment<T>(spec.mu, nu_i, Side::neg, form);
        const T e1 = T(1) - spec.eps / T(2);
        const T e2 = spec.eps / T(2);
        const T w1 = weight(spec.scheme, e1);
        const T w2 = weight(spec.scheme, e2);
        Vec<T> r3_i(d);
        r3_i.head(p) = (e1 * w1 * g1 + e2 * w2 * g2 - oc.h.topLeftCorner(p, p)) *
                       (theta_i.head(p) - theta_star.head(p));
        r3_i.tail(p) = (e2 * w2 * g1 + e1 * w1 * g2 - oc.h.bottomRightCorner(p, p)) *
                       (theta_i.tail(p) - theta_star.tail(p));
        acc_r3 += q.row(i).transpose().cwiseProduct(u.transpose() * r3_i);
      }
    }
  }

  const T sqrt_t = std::sqrt(static_cast<T>(t));
  const Mat<T> sigma_t = u * (qq.cwiseProduct(s_tilde) / static_cast<T>(t)) * u.transpose();
  const Mat<T> sigma_t_inv_sqrt = detail::inverse_sqrt_psd(sigma_t, "bahadur: Sigma_t");

  BahadurParts<T> parts;
  parts.w = sigma_t_inv_sqrt * (u * acc_w) / sqrt_t;
  parts.r2 = sigma_inv_sqrt *
             (u * q.row(0).transpose().cwiseProduct(u.transpose() * (traj.theta_path[0] - theta_star))) /
             sqrt_t;
  parts.r3 = sigma_inv_sqrt * (u * acc_r3) / sqrt_t;
  const Vec<T> theta_bar = theta_sum / static_cast<T>(t);
  parts.residual =
      sqrt_t * (sigma_inv_sqrt * (theta_bar - theta_star)) - parts.w - parts.r2 - parts.r3;
  return parts;
}

}  // namespace wsgd

#endif  // WSGD_ORACLE_HPP
