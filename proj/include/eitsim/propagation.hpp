#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "eitsim/medium.hpp"
#include "eitsim/pulse.hpp"

namespace eitsim {

/// Frequency-domain propagation through the medium at constant control:
/// output spectrum = input spectrum × H(carrier + ν). Zero-padded so the
/// delayed tail does not wrap. Throws AliasingError when the input has more
/// than 1e-6 of its energy in the outer fifth of the sampled band.
PulseEnvelope propagate_static(const PulseEnvelope& pulse, const MediumParams& m);

/// Ground-state coherence along the medium (z normalized to [0, 1]).
struct SpinWave {
  double time = 0.0;
  std::vector<double> z;
  std::vector<std::complex<double>> coherence;

  /// ∫|S|² dz (same units as pulse energy).
  double energy() const noexcept;
};

/// Fractions of the input pulse energy. `absorbed` includes the storage-decay
/// loss, which is also reported on its own.
struct EnergyLedger {
  double input_energy = 0.0;
  double transmitted = 0.0;
  double absorbed = 0.0;
  double stored = 0.0;
  double retrieved = 0.0;
  double storage_decay_loss = 0.0;
  double stored_at_dark = 0.0;

  double closure() const noexcept { return transmitted + absorbed + stored + retrieved; }
};

struct DynamicOptions {
  std::size_t z_slices = 64;
  /// Integrator steps per input sample.
  std::size_t substeps = 1;
  /// 1/e storage time applied to the spin wave across the dark period.
  std::optional<double> storage_tau;
  /// Allowed |closure − 1| before the integration is rejected.
  double ledger_tolerance = 0.01;
};

struct DynamicResult {
  PulseEnvelope output;
  /// Spin wave at the start of the dark period and at control re-activation.
  std::vector<SpinWave> snapshots;
  EnergyLedger ledger;
  /// Output at t ≥ this time counts as retrieved.
  std::optional<double> retrieval_start;
};

/// Method-of-lines integration of the weak-probe Maxwell–Bloch equations in
/// the co-moving frame (RK4 in time, trapezoidal field integration in z).
/// Ground-state dephasing scales with the relative control intensity.
DynamicResult propagate_dynamic(const PulseEnvelope& pulse, const MediumParams& m, const ControlSchedule& schedule,
                                const DynamicOptions& options = {});

double apply_storage_decay(double stored_energy, double storage_time, double tau);

/// Share of a broadband input that survives storage-based filtering:
/// (eit_fwhm / input_bandwidth) · retrieval efficiency.
double filtered_fraction(double eit_fwhm_hz, double input_bandwidth_hz, double retrieval_eff);

// Trace analysis.

/// Time of maximum intensity, refined by a parabola through the peak sample.
double peak_time(const PulseEnvelope& pulse);

/// Copy with samples outside [t_from, t_to] set to zero.
PulseEnvelope window(const PulseEnvelope& pulse, double t_from, double t_to);

/// FWHM (Hz) of the intensity spectrum |FT(pulse)|².
double spectral_fwhm_hz(const PulseEnvelope& pulse);

/// FWHM (s) of the normalized first-order coherence |g1(τ)|² of stationary
/// light filtered by the given impulse response.
double coherence_fwhm_s(const PulseEnvelope& impulse_response);

}  // namespace eitsim
