#include <doctest.h>

#include <cmath>
#include <random>

#include "eitsim/error.hpp"
#include "eitsim/fit.hpp"

using namespace eitsim;

TEST_CASE("exact exponential is recovered exactly") {
  std::vector<DecayPoint> p;
  for (double t : {0.3, 0.6, 1.0, 1.5, 2.0, 3.0, 4.0}) p.push_back({t, 0.08 * std::exp(-t / 2.3)});
  const auto f = fit_exponential_decay(p);
  CHECK(f.tau == doctest::Approx(2.3).epsilon(1e-10).scale(0.0));
  CHECK(f.amplitude == doctest::Approx(0.08).epsilon(1e-10).scale(0.0));
  CHECK(f.tau_low <= f.tau);
  CHECK(f.tau_high >= f.tau);
}

TEST_CASE("two points give tau analytically") {
  const auto f = fit_exponential_decay({{0.0, 1.0}, {1.0, std::exp(-1.0)}});
  CHECK(f.tau == doctest::Approx(1.0).epsilon(1e-12).scale(0.0));
  CHECK(f.amplitude == doctest::Approx(1.0).epsilon(1e-12).scale(0.0));
}

TEST_CASE("tau is invariant under amplitude rescaling") {
  std::mt19937_64 g(1);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<DecayPoint> p, q;
  for (int i = 0; i < 8; ++i) {
    const double t = 0.5 * i;
    const double y = std::exp(-t / 1.6) * (1.0 + noise(g));
    p.push_back({t, y, 0.05 * y});
    q.push_back({t, 37.0 * y, 37.0 * 0.05 * y});
  }
  const auto a = fit_exponential_decay(p);
  const auto b = fit_exponential_decay(q);
  CHECK(a.tau == doctest::Approx(b.tau).epsilon(1e-12).scale(0.0));
  CHECK(b.amplitude == doctest::Approx(37.0 * a.amplitude).epsilon(1e-12).scale(0.0));
}

TEST_CASE("5% noise over 100 seeds stays within 10%") {
  for (double tau : {2.3, 1.6}) {
    CAPTURE(tau);
    int bad = 0;
    double pull_sum = 0.0, pull_sq = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 g(seed);
      std::normal_distribution<double> noise(0.0, 0.05);
      std::vector<DecayPoint> p;
      // Eight points spread over three lifetimes.
      for (int i = 0; i < 8; ++i) {
        const double t = 3.0 * tau * i / 7.0;
        const double y = std::exp(-t / tau) * (1.0 + noise(g));
        p.push_back({t, y, 0.05 * std::exp(-t / tau)});
      }
      const auto f = fit_exponential_decay(p);
      if (std::abs(f.tau / tau - 1.0) > 0.10) ++bad;
      const double pull = (f.tau - tau) / f.tau_error;
      pull_sum += pull;
      pull_sq += pull * pull;
    }
    CHECK(bad == 0);
    // Reported errors match the scatter: pulls have mean 0 and unit rms.
    CHECK(std::abs(pull_sum / 100.0) < 0.35);
    CHECK(std::sqrt(pull_sq / 100.0) == doctest::Approx(1.0).epsilon(0.2).scale(0.0));
  }
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_exponential_decay({{0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(fit_exponential_decay({{0.0, 1.0}, {1.0, 0.0}, {2.0, 0.5}}), DomainError);
  CHECK_THROWS_AS(fit_exponential_decay({{1.0, 1.0}, {1.0, 0.5}, {1.0, 0.2}}), FitError);
  // Rising data has no decay time.
  CHECK_THROWS_AS(fit_exponential_decay({{0.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}}), FitError);
}
