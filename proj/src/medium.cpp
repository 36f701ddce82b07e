#include "eitsim/medium.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "eitsim/error.hpp"

namespace eitsim {

namespace {

using cd = std::complex<double>;

std::optional<double> find_fwhm_hz(const MediumParams& m) {
  if (m.optical_depth() <= 0.0 || m.omega_c() <= 0.0) return std::nullopt;
  const double peak = intensity_transmission(0.0, m);
  const double half = 0.5 * peak;
  // Walk outward while the transmission falls; a local minimum above half
  // maximum means there is no resolvable window.
  const double step = std::max(m.omega_c(), m.gamma_ca()) / 200.0;
  const double limit = 4.0 * (m.omega_c() + m.gamma_ca() + m.gamma_bc());
  double prev = 0.0;
  double prev_t = peak;
  for (double x = step; x <= limit; x += step) {
    const double t = intensity_transmission(x, m);
    if (t >= prev_t) return std::nullopt;
    if (t < half) {
      double lo = prev, hi = x;
      for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (intensity_transmission(mid, m) < half ? hi : lo) = mid;
      }
      return 2.0 * rad_to_hz(0.5 * (lo + hi));
    }
    prev = x;
    prev_t = t;
  }
  return std::nullopt;
}

}  // namespace

MediumParams::MediumParams(double optical_depth, double gamma_ca, double gamma_bc, double omega_c)
    : optical_depth_(optical_depth), gamma_ca_(gamma_ca), gamma_bc_(gamma_bc), omega_c_(omega_c) {
  const std::array<double, 4> all{optical_depth, gamma_ca, gamma_bc, omega_c};
  for (double v : all) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("medium parameters must be finite and non-negative");
  }
  if (gamma_ca <= 0.0) throw DomainError("gamma_ca must be positive");
  eit_fwhm_cache_ = find_fwhm_hz(*this);
}

std::complex<double> transfer_function(double delta, const MediumParams& m) {
  if (!std::isfinite(delta)) throw DomainError("detuning must be finite");
  const double d = m.optical_depth();
  if (d == 0.0) return {1.0, 0.0};
  const cd i{0.0, 1.0};
  const cd x{delta, m.gamma_bc()};
  const cd y{delta, m.gamma_ca()};
  cd response;
  if (m.omega_c() == 0.0) {
    // Two-level limit; the common factor (Δ + iγ_bc) cancels.
    response = -1.0 / y;
  } else {
    response = x / (0.25 * m.omega_c() * m.omega_c() - x * y);
  }
  return std::exp(i * (0.5 * d * m.gamma_ca()) * response);
}

double intensity_transmission(double delta, const MediumParams& m) {
  return std::norm(transfer_function(delta, m));
}

std::vector<double> uniform_grid(double span, std::size_t points) {
  if (points < 2 || !(span > 0.0)) throw DomainError("grid needs span > 0 and at least two points");
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = -span + 2.0 * span * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return g;
}

Spectrum transmission_spectrum(const MediumParams& m, std::span<const double> grid) {
  if (grid.size() < 3) throw DomainError("spectrum grid needs at least three points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw DomainError("spectrum grid must be finite");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw DomainError("spectrum grid must be strictly increasing");
  }
  Spectrum s;
  s.detuning.assign(grid.begin(), grid.end());
  s.transmission.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) s.transmission[k] = intensity_transmission(grid[k], m);

  const auto centre_it = std::min_element(grid.begin(), grid.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
  const auto c = static_cast<std::size_t>(centre_it - grid.begin());
  if (c == 0 || c + 1 == grid.size() || !m.eit_fwhm_hz()) return s;
  const auto& t = s.transmission;
  if (!(t[c] > t[c - 1] && t[c] > t[c + 1])) {
    throw ResolutionError("spectrum grid too coarse to resolve the transparency window");
  }

  const double half = 0.5 * t[c];
  std::size_t r = c;
  while (r + 1 < t.size() && t[r + 1] >= half) ++r;
  std::size_t l = c;
  while (l > 0 && t[l - 1] >= half) --l;
  if (r + 1 == t.size() || l == 0) throw ResolutionError("spectrum grid does not bracket the half-maximum points");
  if (r - l + 1 < 5) throw ResolutionError("spectrum grid too coarse to resolve the transparency window");

  auto cross = [&](std::size_t inside, std::size_t outside) {
    const double f = (t[inside] - half) / (t[inside] - t[outside]);
    return grid[inside] + f * (grid[outside] - grid[inside]);
  };
  const double right = cross(r, r + 1);
  const double left = cross(l, l - 1);
  s.peak = t[c];
  s.fwhm_hz = rad_to_hz(right - left);
  return s;
}

double group_delay(double delta, const MediumParams& m) {
  constexpr double h = kTwoPi * 1e3;
  const cd ratio = transfer_function(delta + h, m) / transfer_function(delta - h, m);
  return std::arg(ratio) / (2.0 * h);
}

namespace {

struct Residuals {
  double peak, fwhm_hz, delay_s;
  double cost;
  bool has_window;
};

Residuals evaluate(const CalibrationTargets& target, const CalibrationTolerances& tol, double d,
                   double gamma_ca, double omega_c, double gamma_bc) {
  const MediumParams m(d, gamma_ca, gamma_bc, omega_c);
  Residuals r{};
  r.peak = intensity_transmission(0.0, m) - target.peak_transmission;
  r.delay_s = group_delay(0.0, m) - target.delay_s;
  const auto fwhm = m.eit_fwhm_hz();
  r.has_window = fwhm.has_value();
  // Without a window the width residual is the full target width.
  r.fwhm_hz = fwhm ? *fwhm - target.fwhm_hz : -target.fwhm_hz;
  const double a = r.peak / tol.peak_transmission;
  const double b = r.fwhm_hz / tol.fwhm_hz;
  const double c = r.delay_s / tol.delay_s;
  r.cost = a * a + b * b + c * c;
  return r;
}

struct SimplexContext {
  const CalibrationTargets* target;
  const CalibrationTolerances* tol;
  double d;
  double gamma_ca;
};

double simplex_cost(const gsl_vector* x, void* params) {
  const auto* ctx = static_cast<const SimplexContext*>(params);
  const double omega_c = std::exp(gsl_vector_get(x, 0));
  const double gamma_bc = std::exp(gsl_vector_get(x, 1));
  if (!std::isfinite(omega_c) || !std::isfinite(gamma_bc)) return 1e300;
  return evaluate(*ctx->target, *ctx->tol, ctx->d, ctx->gamma_ca, omega_c, gamma_bc).cost;
}

bool within(const Residuals& r, const CalibrationTolerances& tol) {
  return r.has_window && std::abs(r.peak) <= tol.peak_transmission && std::abs(r.fwhm_hz) <= tol.fwhm_hz &&
         std::abs(r.delay_s) <= tol.delay_s;
}

}  // namespace

CalibrationResult calibrate(const CalibrationTargets& target, double optical_depth, double gamma_ca,
                            const CalibrationTolerances& tol) {
  if (!(target.peak_transmission > 0.0 && target.peak_transmission < 1.0)) {
    throw DomainError("target peak transmission must lie in (0, 1)");
  }
  if (!(target.fwhm_hz > 0.0)) throw DomainError("target FWHM must be positive");
  if (!std::isfinite(target.delay_s)) throw DomainError("target delay must be finite");
  if (!(optical_depth >= 0.0) || !std::isfinite(optical_depth)) throw DomainError("optical depth must be >= 0");
  if (optical_depth == 0.0) {
    throw CalibrationError("empty medium (d = 0) has unit transmission; no transparency window to fit",
                           {1.0 - target.peak_transmission, -target.fwhm_hz, -target.delay_s});
  }

  // Coarse scan; gamma_bc ascending so strict improvement breaks ties toward smaller gamma_bc.
  constexpr int kOmegaPoints = 60;
  constexpr int kGammaPoints = 48;
  const double w_lo = std::log(hz_to_rad(0.1e6)), w_hi = std::log(hz_to_rad(50e6));
  const double g_lo = std::log(hz_to_rad(1e-3 * 1e6)), g_hi = std::log(hz_to_rad(5e6));
  double best_cost = std::numeric_limits<double>::infinity();
  double best_w = 0.0, best_g = 0.0;
  for (int j = 0; j < kGammaPoints; ++j) {
    const double lg = g_lo + (g_hi - g_lo) * j / (kGammaPoints - 1);
    for (int i = 0; i < kOmegaPoints; ++i) {
      const double lw = w_lo + (w_hi - w_lo) * i / (kOmegaPoints - 1);
      const double cost = evaluate(target, tol, optical_depth, gamma_ca, std::exp(lw), std::exp(lg)).cost;
      if (cost < best_cost) {
        best_cost = cost;
        best_w = lw;
        best_g = lg;
      }
    }
  }

  gsl_set_error_handler_off();
  SimplexContext ctx{&target, &tol, optical_depth, gamma_ca};
  gsl_multimin_function fn{&simplex_cost, 2, &ctx};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, best_w);
  gsl_vector_set(x, 1, best_g);
  gsl_vector_set_all(step, 0.1);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int iter = 0; iter < 2000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) break;
  }
  const double lw = gsl_vector_get(s->x, 0);
  const double lg = gsl_vector_get(s->x, 1);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);

  const double omega_c = std::exp(lw);
  const double gamma_bc = std::exp(lg);
  const Residuals r = evaluate(target, tol, optical_depth, gamma_ca, omega_c, gamma_bc);
  if (!within(r, tol)) {
    std::ostringstream msg;
    msg << "calibration infeasible: best residuals peak=" << r.peak << " fwhm_hz=" << r.fwhm_hz
        << " delay_s=" << r.delay_s;
    throw CalibrationError(msg.str(), {r.peak, r.fwhm_hz, r.delay_s});
  }
  MediumParams m(optical_depth, gamma_ca, gamma_bc, omega_c);
  return {m, r.peak + target.peak_transmission, r.fwhm_hz + target.fwhm_hz, r.delay_s + target.delay_s};
}

Region classify_region(double delta, const MediumParams& m, const RegionThresholds& th) {
  const double a = std::abs(delta);
  if (const auto fwhm = m.eit_fwhm_hz(); fwhm && a <= th.transparent_fraction * kPi * *fwhm) {
    return Region::Transparent;
  }
  if (a >= th.off_resonant_factor * m.gamma_ca()) return Region::OffResonant;
  return Region::Absorption;
}

char region_letter(Region r) noexcept {
  switch (r) {
    case Region::Transparent: return 'A';
    case Region::Absorption: return 'B';
    case Region::OffResonant: return 'C';
  }
  return '?';
}

}  // namespace eitsim
