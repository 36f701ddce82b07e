#include "eitsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eitsim/error.hpp"
#include "eitsim/rng.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

namespace {

// RNG stream ids; see derive_seed.
enum Stream : std::uint64_t {
  kSource = 1,
  kSplit = 2,
  kDetectA = 3,
  kDetectB = 4,
  kJitterR = 5,
  kPairFrequency = 6,
  kBroadbandPath = 7,
  kDecayCoherent = 8,
  kDecayPdc = 9,
};

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

double trace_integral(const PulseEnvelope& p, double from, double to) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double t = p.time(k);
    if (t >= from && t < to) acc += std::norm(p.samples[k]) * p.dt;
  }
  return acc;
}

}  // namespace

void Scenario::validate() const {
  require(medium.optical_depth >= 0.0 && std::isfinite(medium.optical_depth), "optical depth must be >= 0");
  require(medium.gamma_ca > 0.0, "gamma_ca must be positive");
  require(medium.spectrum_span > 0.0 && medium.spectrum_points >= 3, "spectrum grid invalid");
  require(pulse.shape == "gaussian" || pulse.shape == "flat", "pulse shape must be gaussian or flat");
  require(pulse.fwhm > 0.0 && pulse.dt > 0.0 && pulse.t_end > pulse.t_start, "pulse timing invalid");
  require(schedule.off_start < schedule.off_end && schedule.off_end < schedule.on_start &&
              schedule.on_start < schedule.on_end,
          "schedule breakpoints must increase strictly");
  require(integrator.z_slices >= 1 && integrator.substeps >= 1, "integrator grid invalid");
  require(source.squeeze_r > 0.0 && source.coherence_fwhm > 0.0 && source.bandwidth_hz > 0.0, "source invalid");
  require(counting.period > 0.0 && counting.bin > 0.0 && counting.fine_bin > 0.0 && counting.g2_window > 0.0,
          "counting bins must be positive");
  require(counting.gate_start < counting.gate_end, "gate must have positive width");
  require(experiment.trials >= 2, "trials must be >= 2");
  require(experiment.storage_times.size() >= 2, "decay needs at least two storage times");
  require(std::is_sorted(experiment.storage_times.begin(), experiment.storage_times.end()) &&
              std::adjacent_find(experiment.storage_times.begin(), experiment.storage_times.end()) ==
                  experiment.storage_times.end(),
          "storage times must increase strictly");
  require(experiment.tau_coherent > 0.0 && experiment.tau_pdc > 0.0, "decay times must be positive");
}

MediumParams resolve_medium(const Scenario& sc) {
  const auto& m = sc.medium;
  if (m.calibrate) return calibrate(m.targets, m.optical_depth, m.gamma_ca, m.tolerances).params;
  return MediumParams(m.optical_depth, m.gamma_ca, m.gamma_bc, m.omega_c);
}

PulseEnvelope probe_pulse(const Scenario& sc, double carrier_detuning) {
  const auto& p = sc.pulse;
  if (p.shape == "flat") {
    return flat_pulse(p.t_start, p.t_end, p.dt, p.centre - 0.5 * p.fwhm, p.centre + 0.5 * p.fwhm, carrier_detuning);
  }
  return gaussian_pulse(p.t_start, p.t_end, p.dt, p.centre, p.fwhm, carrier_detuning);
}

SpectrumResult run_eit_spectrum(const Scenario& sc) {
  sc.validate();
  SpectrumResult r{resolve_medium(sc), {}, {}, {}, 0.0};
  const auto grid = uniform_grid(sc.medium.spectrum_span, sc.medium.spectrum_points);
  r.spectrum = transmission_spectrum(r.medium, grid);
  const MediumParams dark = r.medium.with_omega_c(0.0);
  r.control_off.resize(grid.size());
  r.region.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    r.control_off[k] = intensity_transmission(grid[k], dark);
    r.region[k] = region_letter(classify_region(grid[k], r.medium, sc.medium.thresholds));
  }
  r.delay_s = group_delay(0.0, r.medium);
  return r;
}

DynamicResult run_storage(const Scenario& sc, const MediumParams& m, double carrier_detuning,
                          std::optional<double> storage_tau, std::optional<double> reactivation) {
  auto s = sc.schedule;
  Scenario local = sc;
  if (reactivation) {
    const double ramp = s.on_end - s.on_start;
    const double tail = sc.pulse.t_end - s.on_end;
    s.on_start = *reactivation;
    s.on_end = *reactivation + ramp;
    local.pulse.t_end = s.on_end + tail;
  }
  DynamicOptions o;
  o.z_slices = sc.integrator.z_slices;
  o.substeps = sc.integrator.substeps;
  o.ledger_tolerance = sc.integrator.ledger_tolerance;
  o.storage_tau = storage_tau;
  return propagate_dynamic(probe_pulse(local, carrier_detuning), m, s.storage(), o);
}

PulseScenarioResult run_pulse_scenarios(const Scenario& sc, const PulseRunOptions& options) {
  sc.validate();
  PulseScenarioResult out{resolve_medium(sc), {}, {}};
  const auto& m = out.medium;
  std::optional<DynamicResult> resonant;
  for (double det : sc.pulse.detunings) {
    const auto input = probe_pulse(sc, det);
    PulseTraces tr;
    tr.detuning = det;
    tr.region = region_letter(classify_region(det, m, sc.medium.thresholds));
    tr.time.resize(input.size());
    for (std::size_t k = 0; k < input.size(); ++k) tr.time[k] = input.time(k);
    tr.reference = input.intensity();
    const auto slow = propagate_static(input, m);
    tr.slow = slow.intensity();
    tr.slow_shift = peak_time(slow) - peak_time(input);
    tr.slow_energy_ratio = slow.energy() / input.energy();
    tr.dark_output_slow = trace_integral(slow, sc.schedule.off_end, sc.schedule.on_start);
    if (options.storage) {
      auto dyn = run_storage(sc, m, det);
      tr.storage = dyn.output.intensity();
      tr.ledger = dyn.ledger;
      tr.dark_output_storage = trace_integral(dyn.output, sc.schedule.off_end, sc.schedule.on_start);
      if (det == 0.0) resonant = std::move(dyn);
    }
    out.traces.push_back(std::move(tr));
  }
  if (options.broadband) {
    if (!resonant) resonant = run_storage(sc, m, 0.0);
    out.broadband = run_broadband_throughput(sc, m, *resonant);
  }
  return out;
}

BroadbandResult run_broadband_throughput(const Scenario& sc, const MediumParams& m, const DynamicResult& coherent) {
  const auto fwhm = m.eit_fwhm_hz();
  if (!fwhm) throw DomainError("medium has no transparency window to store into");
  const double react = *coherent.retrieval_start;
  BroadbandResult r;
  r.eit_fwhm_hz = *fwhm;
  r.retrieval_efficiency = coherent.ledger.retrieved;
  r.expected = filtered_fraction(*fwhm, sc.source.bandwidth_hz, r.retrieval_efficiency);

  // Emission-time distribution of retrieved light.
  std::vector<double> cdf;
  std::vector<double> cell_start;
  double acc = 0.0;
  for (std::size_t k = 0; k < coherent.output.size(); ++k) {
    const double t = coherent.output.time(k);
    if (t < react) continue;
    acc += std::norm(coherent.output.samples[k]);
    cdf.push_back(acc);
    cell_start.push_back(t);
  }
  if (!(acc > 0.0)) throw DomainError("no retrieved light to sample from");
  for (auto& c : cdf) c /= acc;

  auto model = SourceModel::pdc(probe_pulse(sc, 0.0), sc.source.squeeze_r, sc.source.coherence_fwhm);
  model.placement = sc.source.placement;
  model.tiling_step = sc.source.tiling_step;
  model.bandwidth_hz = sc.source.bandwidth_hz;
  const PhotonSampler sampler(model, sc.pulse.t_start, sc.pulse.t_end);

  const double bin = sc.experiment.broadband_bin;
  const auto nbins = static_cast<std::size_t>(std::ceil((sc.pulse.t_end - sc.pulse.t_start) / bin));
  r.time.resize(nbins);
  for (std::size_t k = 0; k < nbins; ++k) r.time[k] = sc.pulse.t_start + bin * static_cast<double>(k);
  r.reference_counts.assign(nbins, 0.0);
  r.storage_counts.assign(nbins, 0.0);
  auto add = [&](std::vector<double>& h, double t) {
    const auto k = static_cast<std::ptrdiff_t>(std::floor((t - sc.pulse.t_start) / bin));
    if (k >= 0 && static_cast<std::size_t>(k) < nbins) h[static_cast<std::size_t>(k)] += 1.0;
  };

  const double eff = sc.counting.detector.efficiency;
  const double half_window = 0.5 * *fwhm;
  const double band = sc.source.bandwidth_hz;
  const std::uint64_t seed = sc.experiment.seed;
  Emissions e;
  for (std::uint64_t trial = 0; trial < sc.experiment.throughput_trials; ++trial) {
    Rng src(derive_seed(seed, kSource, trial));
    Rng freq(derive_seed(seed, kPairFrequency, trial));
    Rng path(derive_seed(seed, kBroadbandPath, trial));
    e.times.clear();
    e.mode.clear();
    sampler.sample_into(src, e);
    std::int64_t mode = -2;
    std::size_t in_mode = 0;
    double nu = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e.mode[i] != mode) {
        mode = e.mode[i];
        in_mode = 0;
      }
      // Both photons of a pair share |ν| about the degenerate frequency.
      if (in_mode++ % 2 == 0) nu = band * (uniform01(freq) - 0.5);
      const double t = e.times[i];
      if (uniform01(path) < eff) {
        ++r.incident;
        add(r.reference_counts, t);
      }
      double t_out;
      if (std::abs(nu) <= half_window) {
        if (!(uniform01(path) < r.retrieval_efficiency)) continue;
        const double u = uniform01(path);
        const auto k = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), cdf.size() - 1);
        t_out = cell_start[k] + coherent.output.dt * uniform01(path);
      } else {
        if (!(uniform01(path) < intensity_transmission(hz_to_rad(nu), m))) continue;
        t_out = t;
      }
      if (!(uniform01(path) < eff)) continue;
      add(r.storage_counts, t_out);
      if (t_out >= react) ++r.retrieved;
    }
  }
  if (r.incident > 0) {
    r.fraction = static_cast<double>(r.retrieved) / static_cast<double>(r.incident);
    r.fraction_error = std::sqrt(static_cast<double>(std::max<std::uint64_t>(r.retrieved, 1))) /
                       static_cast<double>(r.incident);
  }
  return r;
}

std::pair<DetectionRecord, DetectionRecord> acquire(const SourceModel& model, double t_start, double t_end,
                                                    const CountingSettings& counting, std::uint64_t trials,
                                                    std::uint64_t seed, double r_jitter) {
  DetectionRecord a, b;
  a.label = "start";
  b.label = "stop";
  a.efficiency = b.efficiency = counting.detector.efficiency;
  a.jitter_sigma = b.jitter_sigma = counting.detector.jitter_sigma;
  std::optional<PhotonSampler> fixed;
  if (r_jitter <= 0.0) fixed.emplace(model, t_start, t_end);
  Emissions e;
  std::vector<double> arm_a, arm_b;
  for (std::uint64_t k = 0; k < trials; ++k) {
    const double shift = counting.period * static_cast<double>(k);
    Rng src(derive_seed(seed, kSource, k));
    e.times.clear();
    e.mode.clear();
    if (fixed) {
      fixed->sample_into(src, e, shift);
    } else {
      Rng jr(derive_seed(seed, kJitterR, k));
      std::normal_distribution<double> gauss;
      SourceModel local = model;
      const double f = std::exp(r_jitter * gauss(jr) - 0.5 * r_jitter * r_jitter);
      if (local.kind == SourceKind::Mixture) {
        for (auto& [c, w] : local.components) c.squeeze_r *= f;
      } else {
        local.squeeze_r *= f;
      }
      PhotonSampler(local, t_start, t_end).sample_into(src, e, shift);
    }
    Rng split(derive_seed(seed, kSplit, k));
    arm_a.clear();
    arm_b.clear();
    beamsplit(e.times, split, arm_a, arm_b);
    Rng da(derive_seed(seed, kDetectA, k));
    Rng db(derive_seed(seed, kDetectB, k));
    detect_into(arm_a, counting.detector, da, a.times);
    detect_into(arm_b, counting.detector, db, b.times);
  }
  // Jitter can carry a tag across a trial boundary.
  std::sort(a.times.begin(), a.times.end());
  std::sort(b.times.begin(), b.times.end());
  return {std::move(a), std::move(b)};
}

namespace {

HistogramOptions pulsed_options(const CountingSettings& c, double bin, double range, std::uint64_t trials) {
  HistogramOptions o;
  o.bin_s = bin;
  o.range_s = range;
  o.mode = c.correlator;
  o.period = c.period;
  o.trials = trials;
  o.reference_shifts = std::min<std::size_t>(c.reference_shifts, trials - 1);
  return o;
}

CorrelationPanel make_panel(std::string name, CoincidenceHistogram h, std::uint64_t trials) {
  CorrelationPanel p;
  p.name = std::move(name);
  p.g2 = normalize_g2(h);
  p.g2_zero = estimate_g2_zero(p.g2);
  p.histogram = std::move(h);
  p.trials = trials;
  return p;
}

void check_precision(const CorrelationPanel& p, double max_rel) {
  const double rel = p.g2_zero.error / std::abs(p.g2_zero.value);
  if (std::isfinite(rel) && rel <= max_rel) return;
  const double factor = std::isfinite(rel) ? (rel / max_rel) * (rel / max_rel) : 100.0;
  const auto required = static_cast<long long>(std::ceil(static_cast<double>(p.trials) * factor));
  std::ostringstream msg;
  msg << "panel '" << p.name << "': g2(0) relative error " << rel << " exceeds " << max_rel << "; about "
      << required << " trials needed";
  throw StatisticsError(msg.str(), required);
}

// Closed form of the windowed g² for Gaussian bunching broadened by two
// detector jitters: area of the excess is preserved. A flat pump of length
// `pump` gives a triangular accidental pedestal whose mean over the window
// is 1 - window/(4·pump) of its peak.
double broadened_windowed_g2(double g2_zero, double coherence, double jitter_sigma, double window, double pump) {
  const double fwhm_jitter = 2.0 * std::sqrt(2.0 * kLn2) * jitter_sigma;
  const double c_eff = std::sqrt(coherence * coherence + 2.0 * fwhm_jitter * fwhm_jitter);
  const double peak = 1.0 + (g2_zero - 1.0) * coherence / c_eff;
  const double pedestal = 1.0 - window / (4.0 * pump);
  return 1.0 + (g2_time_averaged(peak, c_eff, window) - 1.0) / pedestal;
}

}  // namespace

CorrelationResult run_correlation_experiment(const Scenario& sc) {
  sc.validate();
  const auto& cs = sc.counting;
  const auto& src = sc.source;
  const std::uint64_t seed = sc.experiment.seed;
  const double period = cs.period;
  CorrelationResult result;

  // Input light: flat-top pump centred in the period.
  {
    const double on = 0.5 * (period - src.input_pump);
    auto model = SourceModel::pdc(flat_pulse(0.0, period, 1e-9, on, on + src.input_pump), src.squeeze_r,
                                  src.coherence_fwhm);
    model.placement = src.placement;
    model.tiling_step = src.tiling_step;
    model.random_phase = true;
    const std::uint64_t trials = sc.experiment.trials;
    const auto [a, b] = acquire(model, on, on + src.input_pump, cs, trials, derive_seed(seed, 100), src.r_jitter);
    const double g2_sv = g2_squeezed_vacuum(src.squeeze_r);

    auto display = make_panel("input", coincidence_histogram(a, b, pulsed_options(cs, cs.bin, cs.range, trials)),
                              trials);
    const auto window_opts = pulsed_options(cs, cs.g2_window, 15.0 * cs.g2_window, trials);
    auto windowed = make_panel("input", coincidence_histogram(a, b, window_opts), trials);
    display.g2_zero = windowed.g2_zero;
    display.expected_g2_zero =
        broadened_windowed_g2(g2_sv, src.coherence_fwhm, cs.detector.jitter_sigma, cs.g2_window, src.input_pump);
    check_precision(display, cs.max_rel_error);

    auto fine = make_panel("input_fine",
                           coincidence_histogram(a, b, pulsed_options(cs, cs.fine_bin, cs.fine_range, trials)), trials);
    fine.coherence_fwhm = coherence_time_fwhm(fine.g2);
    fine.expected_g2_zero = broadened_windowed_g2(g2_sv, src.coherence_fwhm, cs.detector.jitter_sigma, cs.fine_bin, src.input_pump);
    check_precision(fine, cs.max_rel_error);
    result.panels.push_back(std::move(display));
    result.panels.push_back(std::move(fine));
  }

  Gate gate{cs.gate_start, cs.gate_end, period};
  const std::uint64_t rtrials = sc.experiment.retrieved_trials;
  auto gated_options = [&](std::uint64_t trials) {
    auto o = pulsed_options(cs, cs.retrieved_bin, cs.retrieved_range, trials);
    o.gate = gate;
    return o;
  };

  // Retrieved coherent light: flat within the gate.
  {
    const double margin = 10.0 * cs.detector.jitter_sigma;
    const double from = cs.gate_start - margin;
    const double to = cs.gate_end + margin;
    const double mean = src.retrieved_coherent_photons * (to - from) / (cs.gate_end - cs.gate_start);
    const auto model = SourceModel::coherent(flat_pulse(0.0, period, 1e-9, 0.0, period), mean * period / (to - from));
    const auto [a, b] = acquire(model, from, to, cs, rtrials, derive_seed(seed, 200));
    auto p = make_panel("retrieved_coherent", coincidence_histogram(a, b, gated_options(rtrials)), rtrials);
    p.expected_g2_zero = 1.0;
    check_precision(p, cs.max_rel_error);
    result.panels.push_back(std::move(p));
  }

  // Retrieved parametric fluorescence plus residual control background.
  {
    const MediumParams m = resolve_medium(sc);
    Scenario impulse = sc;
    impulse.pulse.shape = "gaussian";
    impulse.pulse.fwhm = src.impulse_fwhm;
    const auto dyn = run_storage(impulse, m, 0.0);
    result.retrieved_coherence_fwhm = coherence_fwhm_s(window(dyn.output, *dyn.retrieval_start, dyn.output.t_end()));
    const double c_ret = result.retrieved_coherence_fwhm;

    const auto flat = flat_pulse(0.0, period, 1e-9, 0.0, period);
    auto pdc = SourceModel::pdc(flat, src.squeeze_r, c_ret);
    pdc.placement = src.placement;
    pdc.tiling_step = src.tiling_step;
    pdc.random_phase = true;
    auto background = SourceModel::coherent(flat, 1.0);
    const auto model = SourceModel::mixture({{pdc, 1.0}, {background, src.background_ratio}}, true);
    const double from = std::max(0.0, cs.gate_start - 2.0 * c_ret);
    const double to = std::min(period, cs.gate_end + 2.0 * c_ret);
    const auto [a, b] = acquire(model, from, to, cs, rtrials, derive_seed(seed, 300), src.r_jitter);
    auto p = make_panel("retrieved_pdc", coincidence_histogram(a, b, gated_options(rtrials)), rtrials);
    p.expected_g2_zero = g2_mixture({{1.0, g2_squeezed_vacuum(src.squeeze_r)}, {src.background_ratio, 1.0}}, true);
    check_precision(p, cs.max_rel_error);
    const auto coarse = normalize_g2(rebin(p.histogram, cs.retrieved_rebin));
    p.coherence_fwhm = coherence_time_fwhm(coarse);
    result.panels.push_back(std::move(p));
  }
  return result;
}

DecayResult run_storage_decay(const Scenario& sc) {
  sc.validate();
  if (sc.experiment.storage_times.size() < 4) throw DomainError("decay measurement needs at least 4 storage times");
  const MediumParams m = resolve_medium(sc);
  const auto& ex = sc.experiment;
  const double eff = sc.counting.detector.efficiency;

  auto model = SourceModel::pdc(probe_pulse(sc, 0.0), sc.source.squeeze_r, sc.source.coherence_fwhm);
  model.tiling_step = sc.source.tiling_step;
  const double pdc_photons = PhotonSampler(model, sc.pulse.t_start, sc.pulse.t_end).expected_photons();
  const auto fwhm = m.eit_fwhm_hz();
  if (!fwhm) throw DomainError("medium has no transparency window to store into");

  DecayResult r;
  r.coherent.source = "coherent";
  r.coherent.injected_tau = ex.tau_coherent;
  r.pdc.source = "pdc";
  r.pdc.injected_tau = ex.tau_pdc;
  const double eta0 = run_storage(sc, m, 0.0).ledger.retrieved;
  for (std::size_t i = 0; i < ex.storage_times.size(); ++i) {
    const double T = ex.storage_times[i];
    const double eta_c = apply_storage_decay(eta0, T, ex.tau_coherent);
    const double eta_p = apply_storage_decay(eta0, T, ex.tau_pdc);

    // Coherent: integrated retrieved intensity over `trials` pulses.
    const double nc = static_cast<double>(ex.trials) * ex.coherent_photons * eff;
    // PDC: retrieved photon counts per pulse over `decay_trials` pulses.
    const double np = static_cast<double>(ex.decay_trials) * pdc_photons * eff;
    const double mean_c = nc * eta_c;
    const double mean_p = np * (*fwhm / sc.source.bandwidth_hz) * eta_p;
    double counts_c = mean_c, counts_p = mean_p;
    if (ex.decay_noise) {
      Rng rc(derive_seed(ex.seed, kDecayCoherent, i));
      Rng rp(derive_seed(ex.seed, kDecayPdc, i));
      counts_c = static_cast<double>(std::poisson_distribution<long long>(mean_c)(rc));
      counts_p = static_cast<double>(std::poisson_distribution<long long>(mean_p)(rp));
    }
    if (!(counts_c > 0.0) || !(counts_p > 0.0)) {
      throw FitError("retrieved signal vanished at storage time " + std::to_string(T) + " s");
    }
    const double norm_p = static_cast<double>(ex.decay_trials);
    r.coherent.points.push_back({T, counts_c / nc, ex.decay_noise ? std::sqrt(counts_c) / nc : 0.0});
    r.pdc.points.push_back({T, counts_p / norm_p, ex.decay_noise ? std::sqrt(counts_p) / norm_p : 0.0});
  }
  r.coherent.fit = fit_exponential_decay(r.coherent.points);
  r.pdc.fit = fit_exponential_decay(r.pdc.points);
  return r;
}

}  // namespace eitsim
