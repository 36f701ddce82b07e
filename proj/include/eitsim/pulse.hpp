#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

namespace eitsim {

/// Complex slowly-varying field envelope on a uniform time grid.
///
/// Samples are square roots of intensity (arbitrary units). The carrier is
/// detuned from the probe resonance by `carrier_detuning` (rad/s); a
/// spectral component e^{-iνt} of the envelope sits at total detuning
/// carrier_detuning + ν.
struct PulseEnvelope {
  double t0 = 0.0;
  double dt = 1e-9;
  std::vector<std::complex<double>> samples;
  double carrier_detuning = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double time(std::size_t k) const noexcept { return t0 + dt * static_cast<double>(k); }
  double t_end() const noexcept { return time(samples.empty() ? 0 : samples.size() - 1); }

  /// Σ|samples|²·dt.
  double energy() const noexcept;
  std::vector<double> intensity() const;

  /// Linear interpolation of the complex amplitude; zero outside the grid.
  std::complex<double> at(double t) const noexcept;

  /// Throws DomainError when dt ≤ 0, fewer than two samples, or non-finite energy.
  void validate() const;
};

/// Gaussian envelope with the given intensity FWHM, unit peak amplitude.
PulseEnvelope gaussian_pulse(double t_start, double t_end, double dt, double centre, double intensity_fwhm,
                             double carrier_detuning = 0.0);

/// Flat-top envelope (unit amplitude inside [rise_start, fall_end]).
PulseEnvelope flat_pulse(double t_start, double t_end, double dt, double on_start, double on_end,
                         double carrier_detuning = 0.0);

/// Piecewise-linear relative control intensity in [0, 1]; held constant
/// before the first and after the last breakpoint.
class ControlSchedule {
 public:
  ControlSchedule() = default;
  explicit ControlSchedule(std::vector<std::pair<double, double>> breakpoints);

  static ControlSchedule constant(double level = 1.0);
  /// Full control, ramped to zero over [off_start, off_end], dark, then ramped
  /// back to full over [on_start, on_end].
  static ControlSchedule storage(double off_start, double off_end, double on_start, double on_end);

  double intensity(double t) const noexcept;
  const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return points_; }

  /// Duration of the first transition, or 0 for a constant schedule.
  double ramp_duration() const noexcept;
  /// First time the intensity reaches zero, if it ever does.
  std::optional<double> dark_start() const noexcept;
  /// First time after the dark period at which the intensity starts rising.
  std::optional<double> reactivation() const noexcept;

 private:
  std::vector<std::pair<double, double>> points_{{0.0, 1.0}};
};

}  // namespace eitsim
