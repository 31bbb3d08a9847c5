#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wsgd/policy.hpp"

using namespace wsgd;

namespace {

Params<double> make_theta(double a0, double a1, double b0, double b1) {
  VecX v(4);
  v << a0, a1, b0, b1;
  return Params<double>(v, 2);
}

}  // namespace

TEST_CASE("epsilon-greedy arm-0 probability") {
  VecX x(2);
  x << 1, 0;

  // pure exploration
  CHECK(prob_arm0(x, make_theta(3, 0, -1, 0), 1.0) == doctest::Approx(0.5));

  // greedy margin 2 > 1
  CHECK(prob_arm0(x, make_theta(2, 0, 1, 0), 0.02) == doctest::Approx(0.99));

  // tie sends the greedy mass to arm 1
  CHECK(prob_arm0(x, make_theta(1, 5, 1, -7), 0.02) == doctest::Approx(0.01));
}

TEST_CASE("prob_arm0 stays inside [eps/2, 1 - eps/2] and is scale invariant") {
  StreamRng rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const VecX x = rng.normal_vec(3);
    Params<double> theta(rng.normal_vec(6), 2);
    const double eps = 0.001 + 0.998 * rng.uniform();
    const double p = prob_arm0(x, theta, eps);
    CHECK(p >= eps / 2 - 1e-15);
    CHECK(p <= 1 - eps / 2 + 1e-15);

    const double c = 0.01 + 10 * rng.uniform();
    Params<double> scaled(VecX(c * theta.vec()), 2);
    CHECK(prob_arm0(x, scaled, eps) == doctest::Approx(p));
  }
}

TEST_CASE("weights per scheme") {
  CHECK(weight(WeightScheme<double>::vanilla(), 0.123) == doctest::Approx(1.0));
  CHECK(weight(WeightScheme<double>::ipw(), 0.5) == doctest::Approx(1.0));
  CHECK(weight(WeightScheme<double>::ipw(), 0.01) == doctest::Approx(50.0));
  CHECK(weight(WeightScheme<double>::sqrt_ipw(), 0.005) == doctest::Approx(10.0));
  CHECK(weight(WeightScheme<double>::power(-1.0), 0.01) == doctest::Approx(100.0));
  CHECK(weight(WeightScheme<double>::power(0.0), 0.77) == doctest::Approx(1.0));
  CHECK_THROWS_AS(weight(WeightScheme<double>::ipw(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(weight(WeightScheme<double>::ipw(), 1.0), std::invalid_argument);
}

TEST_CASE("ipw weight unbiases to the uniform stable policy") {
  // E[w 1{A=a} | X] over the two-point action distribution equals 1/2 exactly
  const auto ipw = WeightScheme<double>::ipw();
  for (double p0 : {0.01, 0.2, 0.5, 0.93}) {
    CHECK(p0 * weight(ipw, p0) == doctest::Approx(0.5));
    CHECK((1 - p0) * weight(ipw, 1 - p0) == doctest::Approx(0.5));
  }
}

TEST_CASE("weights are bounded when eps is bounded away from 0 and 1") {
  const double eps = 0.02;
  const double lo = eps / 2, hi = 1 - eps / 2;
  for (const auto& scheme : {WeightScheme<double>::vanilla(), WeightScheme<double>::ipw(),
                             WeightScheme<double>::sqrt_ipw(), WeightScheme<double>::power(0.7)}) {
    const double w_lo = weight(scheme, lo);
    const double w_hi = weight(scheme, hi);
    const double w_min = std::min(w_lo, w_hi), w_max = std::max(w_lo, w_hi);
    StreamRng rng(23, 0);
    for (int i = 0; i < 100; ++i) {
      const double p = rng.bernoulli(0.5) ? lo : hi;
      const double w = weight(scheme, p);
      CHECK(w >= w_min - 1e-15);
      CHECK(w <= w_max + 1e-15);
    }
  }
}

TEST_CASE("epsilon schedules") {
  const auto c = EpsilonSchedule<double>::constant(0.02);
  CHECK(epsilon_at(c, 1) == doctest::Approx(0.02));
  CHECK(epsilon_at(c, 1000000) == doctest::Approx(0.02));

  const auto conv = EpsilonSchedule<double>::converging(0.02, 0.5, 0.5);
  CHECK(epsilon_at(conv, 10000) == doctest::Approx(0.025));
  CHECK(epsilon_at(conv, 1) == doctest::Approx(0.52));

  // c = 0 degenerates to the constant schedule
  const auto degen = EpsilonSchedule<double>::converging(0.13, 0.0, 2.0);
  for (long long t : {1LL, 7LL, 400LL}) CHECK(epsilon_at(degen, t) == doctest::Approx(0.13));

  // every emitted value stays inside (0,1) thanks to the clamp
  const auto big = EpsilonSchedule<double>::converging(0.9, 50.0, 0.25);
  for (long long t = 1; t < 2000; t += 7) {
    const double e = epsilon_at(big, t);
    CHECK(e > 0);
    CHECK(e < 1);
  }

  CHECK_THROWS_AS(EpsilonSchedule<double>::constant(0.0), config_error);
  CHECK_THROWS_AS(EpsilonSchedule<double>::converging(0.02, -1.0, 0.5), config_error);
}

TEST_CASE("slow epsilon schedules trigger the rate warning") {
  const double alpha = 0.8;
  CHECK(epsilon_rate_warning(EpsilonSchedule<double>::converging(0.02, 0.5, 0.3), alpha).has_value());
  CHECK(!epsilon_rate_warning(EpsilonSchedule<double>::converging(0.02, 0.5, 0.5), alpha).has_value());
  CHECK(!epsilon_rate_warning(EpsilonSchedule<double>::constant(0.02), alpha).has_value());
  // zero amplitude never drifts, no warning regardless of beta
  CHECK(!epsilon_rate_warning(EpsilonSchedule<double>::converging(0.02, 0.0, 0.1), alpha).has_value());
}

TEST_CASE("sample_action reports the probability of the arm it returns") {
  StreamRng rng(5, 5);
  int seen0 = 0, seen1 = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [arm, prob] = sample_action(rng, 0.3);
    if (arm.value == 0) {
      CHECK(prob == doctest::Approx(0.3));
      ++seen0;
    } else {
      CHECK(prob == doctest::Approx(0.7));
      ++seen1;
    }
  }
  CHECK(seen0 > 0);
  CHECK(seen1 > 0);

  const auto [arm, prob] = sample_action(rng, 0.5);
  CHECK(prob == doctest::Approx(0.5));
}

TEST_CASE("sample_action frequency sits in the 3-sigma binomial band") {
  // near-degenerate p0 = 1 - delta
  const double delta = 1e-3;
  const double p0 = 1.0 - delta;
  const long long n = 1000000;
  StreamRng rng(7, 0);
  long long hits = 0;
  for (long long i = 0; i < n; ++i) hits += sample_action(rng, p0).first.value == 0;
  const double freq = static_cast<double>(hits) / static_cast<double>(n);
  const double band = 3.0 * std::sqrt(p0 * delta / static_cast<double>(n));
  CHECK(std::abs(freq - p0) <= band);
}

TEST_CASE("fixed stream replays an identical action sequence") {
  StreamRng a(99, 3), b(99, 3);
  for (int i = 0; i < 500; ++i)
    CHECK(sample_action(a, 0.3).first.value == sample_action(b, 0.3).first.value);
}
