#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "eitsim/units.hpp"

namespace eitsim {

/// Optical response parameters of the Λ-type ensemble (weak-probe limit).
///
/// All rates are angular (rad/s). gamma_ca is the excited-state coherence
/// decay rate, i.e. the half linewidth Γ/2 of the probe transition.
/// The transparency FWHM is derived once at construction.
class MediumParams {
 public:
  static constexpr double kDefaultGammaCa = hz_to_rad(3.1e6);

  MediumParams() : MediumParams(0.0, kDefaultGammaCa, 0.0, 0.0) {}
  MediumParams(double optical_depth, double gamma_ca, double gamma_bc, double omega_c);

  double optical_depth() const noexcept { return optical_depth_; }
  double gamma_ca() const noexcept { return gamma_ca_; }
  double gamma_bc() const noexcept { return gamma_bc_; }
  double omega_c() const noexcept { return omega_c_; }

  /// Transparency-window FWHM in Hz; empty when no window exists.
  std::optional<double> eit_fwhm_hz() const noexcept { return eit_fwhm_cache_; }

  MediumParams with_optical_depth(double d) const { return {d, gamma_ca_, gamma_bc_, omega_c_}; }
  MediumParams with_omega_c(double w) const { return {optical_depth_, gamma_ca_, gamma_bc_, w}; }
  MediumParams with_gamma_bc(double g) const { return {optical_depth_, gamma_ca_, g, omega_c_}; }

 private:
  double optical_depth_;
  double gamma_ca_;
  double gamma_bc_;
  double omega_c_;
  std::optional<double> eit_fwhm_cache_;
};

/// Complex amplitude transmission H(Δ) of the full medium.
std::complex<double> transfer_function(double delta, const MediumParams& m);

/// |H(Δ)|².
double intensity_transmission(double delta, const MediumParams& m);

struct Spectrum {
  std::vector<double> detuning;      // rad/s
  std::vector<double> transmission;  // |H|²
  std::optional<double> peak;        // transparency-peak transmission
  std::optional<double> fwhm_hz;     // transparency-window FWHM
};

/// Evaluates |H|² on a finite, strictly monotone detuning grid and extracts
/// the transparency peak and FWHM by linear interpolation. Throws
/// ResolutionError when a peak exists but the grid cannot bracket its
/// half-maximum points.
Spectrum transmission_spectrum(const MediumParams& m, std::span<const double> grid);

/// Uniform grid of `points` detunings over [-span, span] (rad/s).
std::vector<double> uniform_grid(double span, std::size_t points);

/// d(arg H)/dΔ by central difference; positive means delay.
double group_delay(double delta, const MediumParams& m);

struct CalibrationTargets {
  double peak_transmission = 0.77;
  double fwhm_hz = 8.3e6;
  double delay_s = 25e-9;
};

struct CalibrationTolerances {
  double peak_transmission = 0.01;
  double fwhm_hz = 0.2e6;
  double delay_s = 2e-9;
};

struct CalibrationResult {
  MediumParams params;
  double peak_transmission;
  double fwhm_hz;
  double delay_s;
};

/// Fits (omega_c, gamma_bc) at fixed optical depth and gamma_ca.
/// Deterministic: coarse log grid then simplex refinement.
CalibrationResult calibrate(const CalibrationTargets& targets, double optical_depth,
                            double gamma_ca = MediumParams::kDefaultGammaCa,
                            const CalibrationTolerances& tol = {});

enum class Region { Transparent, Absorption, OffResonant };

struct RegionThresholds {
  /// A: |Δ| ≤ transparent_fraction · (FWHM/2).
  double transparent_fraction = 1.0;
  /// C: |Δ| ≥ off_resonant_factor · gamma_ca.
  double off_resonant_factor = 10.0;
};

Region classify_region(double delta, const MediumParams& m, const RegionThresholds& th = {});

char region_letter(Region r) noexcept;

}  // namespace eitsim
