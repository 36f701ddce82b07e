#include <doctest.h>

#include <chrono>
#include <cmath>
#include <complex>

#include "eitsim/error.hpp"
#include "eitsim/medium.hpp"
#include "eitsim/units.hpp"

using namespace eitsim;

namespace {

const double kGca = hz_to_rad(3.1e6);

// Half-maximum width of |H|² around Δ = 0 found by bisection, independent of
// the library's grid-based search.
double bisect_fwhm_hz(const MediumParams& m) {
  const double half = 0.5 * intensity_transmission(0.0, m);
  auto edge = [&](double sign) {
    // Walk out from line centre to the first point below half, then bisect.
    const double step = sign * hz_to_rad(0.05e6);
    double lo = 0.0, hi = step;
    while (intensity_transmission(hi, m) > half) {
      lo = hi;
      hi += step;
    }
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (intensity_transmission(mid, m) > half ? lo : hi) = mid;
    }
    return lo;
  };
  return rad_to_hz(edge(1.0) - edge(-1.0));
}

}  // namespace

TEST_CASE("empty medium is transparent") {
  const MediumParams m(0.0, kGca, hz_to_rad(1e6), hz_to_rad(10e6));
  for (double d : {-1e9, 0.0, 3e7}) {
    CHECK(std::abs(transfer_function(d, m) - std::complex<double>(1.0, 0.0)) < 1e-15);
  }
}

TEST_CASE("without control the line is a Lorentzian absorber") {
  const MediumParams m(6.0, kGca, hz_to_rad(0.8e6), 0.0);
  for (double f : {0.0, 1e6, 3.1e6, 20e6}) {
    const double d = hz_to_rad(f);
    // With Ωc = 0 the ground-state coherence drops out.
    const double expected = std::exp(-6.0 * kGca * kGca / (d * d + kGca * kGca));
    CHECK(intensity_transmission(d, m) == doctest::Approx(expected).epsilon(1e-12).scale(0.0));
  }
  CHECK(intensity_transmission(0.0, m) == doctest::Approx(std::exp(-6.0)).epsilon(1e-12).scale(0.0));
}

TEST_CASE("ideal transparency: unit peak and delay 2dγ/Ωc²") {
  const double oc = hz_to_rad(15e6);
  const MediumParams m(6.0, kGca, 0.0, oc);
  CHECK(intensity_transmission(0.0, m) == doctest::Approx(1.0).scale(0.0));
  CHECK(group_delay(0.0, m) == doctest::Approx(2.0 * 6.0 * kGca / (oc * oc)).epsilon(1e-4).scale(0.0));
}

TEST_CASE("transmission never exceeds one") {
  const MediumParams m(6.0, kGca, hz_to_rad(0.8e6), hz_to_rad(15e6));
  const auto grid = uniform_grid(hz_to_rad(200e6), 4001);
  for (double d : grid) CHECK(intensity_transmission(d, m) <= 1.0);
}

TEST_CASE("spectrum FWHM agrees with bisection") {
  const MediumParams m(6.0, kGca, hz_to_rad(0.816e6), hz_to_rad(14.93e6));
  const auto s = transmission_spectrum(m, uniform_grid(hz_to_rad(50e6), 2001));
  REQUIRE(s.fwhm_hz);
  REQUIRE(s.peak);
  CHECK(*s.fwhm_hz == doctest::Approx(bisect_fwhm_hz(m)).epsilon(2e-3).scale(0.0));
  CHECK(*s.peak == doctest::Approx(intensity_transmission(0.0, m)).epsilon(1e-9).scale(0.0));
  CHECK(m.eit_fwhm_hz());
  CHECK(*m.eit_fwhm_hz() == doctest::Approx(bisect_fwhm_hz(m)).epsilon(1e-6).scale(0.0));
}

TEST_CASE("calibration reaches the targets and agrees with a brute-force grid") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = calibrate({}, 6.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  CHECK(std::abs(r.peak_transmission - 0.77) <= 0.01);
  CHECK(std::abs(r.fwhm_hz - 8.3e6) <= 0.2e6);
  CHECK(std::abs(r.delay_s - 25e-9) <= 2e-9);

  // Grid search on (Ωc, γbc) minimizing the normalized peak/FWHM mismatch.
  double best = 1e300, best_oc = 0.0, best_g = 0.0;
  for (double oc = 12e6; oc <= 18e6; oc += 0.05e6) {
    for (double g = 0.5e6; g <= 1.2e6; g += 0.01e6) {
      const MediumParams m(6.0, kGca, hz_to_rad(g), hz_to_rad(oc));
      const double ep = (intensity_transmission(0.0, m) - 0.77) / 0.01;
      const double ef = (bisect_fwhm_hz(m) - 8.3e6) / 0.2e6;
      const double e = ep * ep + ef * ef;
      if (e < best) {
        best = e;
        best_oc = oc;
        best_g = g;
      }
    }
  }
  CHECK(rad_to_hz(r.params.omega_c()) == doctest::Approx(best_oc).epsilon(0.01).scale(0.0));
  CHECK(rad_to_hz(r.params.gamma_bc()) == doctest::Approx(best_g).epsilon(0.03).scale(0.0));
}

TEST_CASE("calibration errors") {
  CHECK_THROWS_AS(calibrate({}, 0.0), CalibrationError);
  CHECK_THROWS_AS(calibrate({1.5, 8.3e6, 25e-9}, 6.0), DomainError);
  // An optical depth too small to give 25 ns of delay cannot meet all targets.
  try {
    calibrate({}, 0.5);
    FAIL("expected CalibrationError");
  } catch (const CalibrationError& e) {
    CHECK(e.residuals().size() == 3);
  }
}

TEST_CASE("regions around the calibrated window") {
  const auto m = calibrate({}, 6.0).params;
  CHECK(region_letter(classify_region(0.0, m)) == 'A');
  CHECK(region_letter(classify_region(hz_to_rad(10e6), m)) == 'B');
  CHECK(region_letter(classify_region(hz_to_rad(100e6), m)) == 'C');
  CHECK(region_letter(classify_region(hz_to_rad(-100e6), m)) == 'C');
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(MediumParams(-1.0, kGca, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(MediumParams(1.0, 0.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(uniform_grid(1.0, 1), DomainError);
  const MediumParams m(6.0, kGca, hz_to_rad(0.8e6), hz_to_rad(15e6));
  CHECK_THROWS_AS(intensity_transmission(std::nan(""), m), DomainError);
  // Coarse grid cannot resolve an 8 MHz window.
  CHECK_THROWS_AS(transmission_spectrum(m, uniform_grid(hz_to_rad(50e6), 5)), ResolutionError);
}
