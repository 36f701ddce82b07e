#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eitsim/counting.hpp"
#include "eitsim/fit.hpp"
#include "eitsim/medium.hpp"
#include "eitsim/propagation.hpp"
#include "eitsim/sources.hpp"

namespace eitsim {

struct MediumSettings {
  double optical_depth = 6.0;
  double gamma_ca = MediumParams::kDefaultGammaCa;
  bool calibrate = true;
  CalibrationTargets targets;
  CalibrationTolerances tolerances;
  /// Used when calibrate is false.
  double omega_c = 0.0;
  double gamma_bc = 0.0;
  RegionThresholds thresholds;
  double spectrum_span = hz_to_rad(50e6);
  std::size_t spectrum_points = 2001;
};

struct PulseSettings {
  /// "gaussian" or "flat".
  std::string shape = "gaussian";
  double fwhm = 130e-9;
  double centre = 270e-9;
  double t_start = 0.0;
  double t_end = 1000e-9;
  double dt = 0.5e-9;
  /// Carrier detunings (rad/s) of the pulse scenarios.
  std::vector<double> detunings{0.0, hz_to_rad(10e6), hz_to_rad(100e6)};
};

struct ScheduleSettings {
  double off_start = 300e-9;
  double off_end = 350e-9;
  double on_start = 650e-9;
  double on_end = 700e-9;

  ControlSchedule storage() const { return ControlSchedule::storage(off_start, off_end, on_start, on_end); }
};

struct SourceSettings {
  double squeeze_r = 0.17;
  double coherence_fwhm = 0.2e-9;
  double bandwidth_hz = 600e6;
  Placement placement = Placement::Gaussian;
  double tiling_step = 1e-12;
  /// Flat-top pump duration of the input correlation measurement.
  double input_pump = 200e-9;
  /// Lognormal spread of r between trials; zero disables.
  double r_jitter = 0.0;
  /// Mean coherent photons inside the gate for the retrieved-coherent panel.
  double retrieved_coherent_photons = 2.0;
  /// Residual control background relative to the retrieved pdc intensity.
  double background_ratio = 1.0;
  /// Broadband pulse used to measure the storage filter's impulse response.
  double impulse_fwhm = 4e-9;
};

struct CountingSettings {
  DetectorSettings detector;
  CorrelatorMode correlator = CorrelatorMode::AllPairs;
  double period = 1000e-9;
  double bin = 1.6e-9;
  double range = 400e-9;
  double g2_window = 2.3e-9;
  double fine_bin = 0.1e-9;
  double fine_range = 10e-9;
  double gate_start = 675e-9;
  double gate_end = 745e-9;
  double retrieved_bin = 1.6e-9;
  double retrieved_range = 60e-9;
  std::size_t retrieved_rebin = 3;
  std::size_t reference_shifts = 8;
  /// Largest acceptable relative error of a reported g²(0).
  double max_rel_error = 0.1;
};

struct ExperimentSettings {
  std::uint64_t trials = 3390;
  std::uint64_t retrieved_trials = 2000000;
  std::uint64_t throughput_trials = 50000;
  std::uint64_t decay_trials = 100000;
  std::uint64_t seed = 1;
  std::vector<double> storage_times{0.3e-6, 0.6e-6, 1.0e-6, 1.5e-6, 2.0e-6, 3.0e-6, 4.0e-6};
  double tau_coherent = 2.3e-6;
  double tau_pdc = 1.6e-6;
  /// Coherent probe photons per pulse for the decay measurement.
  double coherent_photons = 1e5;
  double broadband_bin = 5e-9;
  /// Draw shot noise on decay signals; off gives the noiseless curve.
  bool decay_noise = true;
};

struct IntegratorSettings {
  std::size_t z_slices = 64;
  std::size_t substeps = 1;
  double ledger_tolerance = 0.01;
};

struct Scenario {
  std::string name = "default";
  MediumSettings medium;
  PulseSettings pulse;
  ScheduleSettings schedule;
  IntegratorSettings integrator;
  SourceSettings source;
  CountingSettings counting;
  ExperimentSettings experiment;

  /// Throws DomainError on any violated invariant.
  void validate() const;
};

/// Calibrated or explicit medium of a scenario.
MediumParams resolve_medium(const Scenario& sc);

PulseEnvelope probe_pulse(const Scenario& sc, double carrier_detuning);

// --- spectrum ---------------------------------------------------------------

struct SpectrumResult {
  MediumParams medium;
  Spectrum spectrum;
  std::vector<double> control_off;
  std::vector<char> region;
  double delay_s = 0.0;
};

SpectrumResult run_eit_spectrum(const Scenario& sc);

// --- pulses -----------------------------------------------------------------

struct PulseTraces {
  double detuning = 0.0;
  char region = '?';
  std::vector<double> time;
  std::vector<double> reference;
  std::vector<double> slow;
  std::vector<double> storage;  // empty when storage was not run
  double slow_shift = 0.0;
  double slow_energy_ratio = 0.0;
  std::optional<EnergyLedger> ledger;
  /// Output intensity integrated over the control-off interval (storage vs slow).
  double dark_output_storage = 0.0;
  double dark_output_slow = 0.0;
};

struct BroadbandResult {
  std::vector<double> time;
  std::vector<double> reference_counts;
  std::vector<double> storage_counts;
  std::uint64_t incident = 0;
  std::uint64_t retrieved = 0;
  double fraction = 0.0;
  double fraction_error = 0.0;
  double expected = 0.0;
  double eit_fwhm_hz = 0.0;
  double retrieval_efficiency = 0.0;
};

struct PulseScenarioResult {
  MediumParams medium;
  std::vector<PulseTraces> traces;
  std::optional<BroadbandResult> broadband;
};

struct PulseRunOptions {
  bool storage = true;
  bool broadband = true;
};

PulseScenarioResult run_pulse_scenarios(const Scenario& sc, const PulseRunOptions& options = {});

/// Retrieved coherent output of the Δ = 0 storage run (fraction and trace).
DynamicResult run_storage(const Scenario& sc, const MediumParams& m, double carrier_detuning,
                          std::optional<double> storage_tau = std::nullopt, std::optional<double> reactivation = {});

BroadbandResult run_broadband_throughput(const Scenario& sc, const MediumParams& m, const DynamicResult& coherent);

// --- correlations -----------------------------------------------------------

struct CorrelationPanel {
  std::string name;
  CoincidenceHistogram histogram;
  G2Curve g2;
  G2Estimate g2_zero{};
  std::optional<double> coherence_fwhm;
  /// Analytic expectation of g2_zero where one exists.
  std::optional<double> expected_g2_zero;
  std::uint64_t trials = 0;
};

struct CorrelationResult {
  std::vector<CorrelationPanel> panels;
  double retrieved_coherence_fwhm = 0.0;  // from the storage filter
  double reference_mixture_g2 = 11.0;
};

CorrelationResult run_correlation_experiment(const Scenario& sc);

/// One pulsed correlation measurement: per trial, sample the source over
/// [t_start, t_end) shifted by trial·period, beamsplit, detect both arms.
std::pair<DetectionRecord, DetectionRecord> acquire(const SourceModel& model, double t_start, double t_end,
                                                    const CountingSettings& counting, std::uint64_t trials,
                                                    std::uint64_t seed, double r_jitter = 0.0);

// --- decay ------------------------------------------------------------------

struct DecayCurve {
  std::string source;
  std::vector<DecayPoint> points;
  double injected_tau = 0.0;
  DecayFit fit{};
};

struct DecayResult {
  DecayCurve coherent;
  DecayCurve pdc;
};

DecayResult run_storage_decay(const Scenario& sc);

}  // namespace eitsim
