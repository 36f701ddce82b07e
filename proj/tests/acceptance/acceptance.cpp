#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eitsim/cli.hpp"
#include "eitsim/config.hpp"
#include "eitsim/experiments.hpp"
#include "eitsim/fit.hpp"
#include "eitsim/rng.hpp"
#include "eitsim/units.hpp"

using namespace eitsim;

namespace {

namespace fs = std::filesystem;

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario default_scenario() { return load_config("default").scenario; }

bool within(double x, double centre, double tol) { return std::abs(x - centre) <= tol; }

void criterion_1() {
  const Scenario sc = default_scenario();
  SpectrumResult r;
  const double secs = timed([&] { r = run_eit_spectrum(sc); });
  const double peak = r.spectrum.peak.value_or(NAN);
  const double fwhm = r.spectrum.fwhm_hz.value_or(NAN) / 1e6;
  const bool ok = within(peak, 0.77, 0.01) && within(fwhm, 8.3, 0.2) && secs < 1.0;
  report(1, ok, "EIT spectrum", fmt("peak %.4f (0.77 +/- 0.01), FWHM %.3f MHz (8.3 +/- 0.2), %.3f s (< 1 s)", peak, fwhm, secs));
}

void criterion_2() {
  const Scenario sc = default_scenario();
  PulseScenarioResult r;
  const double secs = timed([&] { r = run_pulse_scenarios(sc, {false, false}); });
  std::map<long, const PulseTraces*> by_mhz;
  for (const auto& t : r.traces) by_mhz[std::lround(rad_to_hz(t.detuning) / 1e6)] = &t;
  if (!by_mhz.count(0) || !by_mhz.count(10) || !by_mhz.count(100)) {
    report(2, false, "slow light", "default scenario lacks the 0, 10 and 100 MHz runs");
    return;
  }
  const double d0 = by_mhz[0]->slow_shift * 1e9;
  const double d10 = by_mhz[10]->slow_shift * 1e9;
  const double d100 = by_mhz[100]->slow_shift * 1e9;
  const double e100 = by_mhz[100]->slow_energy_ratio;
  const bool ok = within(d0, 25.0, 3.0) && within(d10, -10.0, 4.0) && std::abs(d100) < 2.0 &&
                  std::abs(e100 - 1.0) < 0.02 && secs < 10.0;
  report(2, ok, "slow light",
         fmt("delay %.2f ns (25 +/- 3), 10 MHz shift %.2f ns (-10 +/- 4), 100 MHz shift %.3f ns (< 2) with energy "
             "change %.2f%% (< 2%%), %.2f s (< 10 s)",
             d0, d10, d100, 100.0 * std::abs(e100 - 1.0), secs));
}

void criterion_3() {
  const Scenario sc = default_scenario();
  const MediumParams m = resolve_medium(sc);
  const auto r = run_storage(sc, m, 0.0);
  const double reactivation = sc.schedule.on_start;
  // Same run with a control that never comes back: anything the storage run
  // emits beyond it is released by the re-activation.
  const auto sealed = propagate_dynamic(probe_pulse(sc, 0.0), m,
                                        ControlSchedule({{sc.schedule.off_start, 1.0}, {sc.schedule.off_end, 0.0}}));
  const auto& out = r.output;
  double early = 0.0, released = 0.0, peak = 0.0, peak_t = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = out.time(k);
    const double d = (std::norm(out.samples[k]) - std::norm(sealed.output.samples[k])) * out.dt;
    if (t < reactivation) {
      early = std::max(early, std::abs(d));
    } else {
      released += d;
      if (d > peak) {
        peak = d;
        peak_t = t;
      }
    }
  }
  released /= r.ledger.input_energy;
  // Grid convergence of the same run.
  DynamicOptions fine;
  fine.z_slices = 2 * sc.integrator.z_slices;
  fine.substeps = 2 * sc.integrator.substeps;
  const auto rf = propagate_dynamic(probe_pulse(sc, 0.0), m, sc.schedule.storage(), fine);
  const double conv = std::abs(rf.ledger.retrieved / r.ledger.retrieved - 1.0);

  const double eff = r.ledger.retrieved;
  const double closure = r.ledger.closure();
  const bool only_after = r.retrieval_start && std::abs(*r.retrieval_start - reactivation) < 1e-12 && early == 0.0 &&
                          peak_t > reactivation && std::abs(released / eff - 1.0) < 0.01;
  const bool ok = within(eff, 0.08, 0.02) && only_after && within(closure, 1.0, 0.01) && conv < 0.01;
  report(3, ok, "storage and retrieval",
         fmt("retrieved %.2f%% (8 +/- 2%%); output identical to a never-reactivated run before %.0f ns (max diff %.1e), "
             "released %.2f%% after it, peaking at %.1f ns; ledger closure %.5f (1 +/- 0.01); dt/dz halving changes "
             "retrieval by %.3f%% (< 1%%)",
             100.0 * eff, reactivation * 1e9, early, 100.0 * released, peak_t * 1e9, closure, 100.0 * conv));
}

void criterion_4() {
  const Scenario sc = default_scenario();
  const auto r = run_pulse_scenarios(sc, {true, true});
  if (!r.broadband) {
    report(4, false, "filtered throughput", "no broadband result");
    return;
  }
  const auto& b = *r.broadband;
  const double closed = (b.eit_fwhm_hz / sc.source.bandwidth_hz) * b.retrieval_efficiency;
  const double pull = (b.fraction - closed) / b.fraction_error;
  const double nominal = 8.3 / 600.0 * 0.08;
  const bool ok = std::abs(pull) <= 3.0 && std::abs(b.fraction / 1.2e-3 - 1.0) <= 0.2 &&
                  std::abs(closed / 1.2e-3 - 1.0) <= 0.2;
  report(4, ok, "filtered throughput",
         fmt("fraction %.4e +/- %.1e vs closed form %.4e (pull %+.2f sigma; nominal (8.3/600)*0.08 = %.4e), "
             "%.1f%% from 1.2e-3 (within 20%%)",
             b.fraction, b.fraction_error, closed, pull, nominal, 100.0 * (b.fraction / 1.2e-3 - 1.0)));
}

void criterion_5() {
  const double sv = g2_squeezed_vacuum(0.17);
  const double sh = std::sinh(0.17);
  const double direct = 3.0 + 1.0 / (sh * sh);
  const double mix = g2_mixture({{1.0, sv}, {1.0, 1.0}}, true);
  const double avg = g2_time_averaged(sv, 0.2e-9, 2.3e-9);
  const bool ok = std::abs(sv / 37.3 - 1.0) <= 0.01 && std::abs(sv - direct) < 1e-12 && within(mix, 10.6, 0.1) &&
                  avg >= 4.0 && avg <= 4.6;
  report(5, ok, "analytic g2 anchors",
         fmt("squeezed vacuum %.3f (37.3 within 1%%), beat-resolved mixture %.3f (10.6 +/- 0.1; reported value 11), "
             "time-averaged %.3f (in [4.0, 4.6]; measured 4.4 +/- 0.2)",
             sv, mix, avg));
}

struct Closure {
  double value = 0.0;
  double error = 0.0;
  double poisson_error = 0.0;
  double expected = 0.0;
  double seconds = 0.0;
  std::uint64_t modes = 0;
  double pull() const { return (value - expected) / error; }
};

// Full chain on a flat 800 ns pump: sample, split, detect, histogram, normalize.
// The modes are split over independent batches; the value comes from the
// merged histogram and the error from the scatter between batches, because
// pairs from one multi-photon mode make the counts overdispersed.
Closure closure(double r, double window, double jitter, double efficiency, std::uint64_t min_modes,
                std::uint64_t seed) {
  constexpr double c = 0.2e-9, pump = 800e-9, period = 2000e-9, on = 600e-9;
  constexpr std::uint64_t batches = 40;
  Closure out;
  out.seconds = timed([&] {
    auto model = SourceModel::pdc(flat_pulse(0.0, period, 1e-9, on, on + pump), r, c);
    model.random_phase = true;
    const std::uint64_t per_trial = PhotonSampler(model, on, on + pump).modes();
    const std::uint64_t trials =
        std::max<std::uint64_t>(10, (min_modes + batches * per_trial - 1) / (batches * per_trial));
    out.modes = batches * trials * per_trial;
    CountingSettings cs;
    cs.period = period;
    cs.detector = {efficiency, jitter, 0.0};
    HistogramOptions o;
    o.bin_s = window;
    o.range_s = 15.0 * window;
    o.period = period;
    o.trials = trials;
    o.reference_shifts = 8;
    std::optional<CoincidenceHistogram> all;
    std::vector<double> counts, reference;
    for (std::uint64_t k = 0; k < batches; ++k) {
      const auto [a, b] = acquire(model, on, on + pump, cs, trials, derive_seed(seed, k));
      const auto h = coincidence_histogram(a, b, o);
      counts.push_back(static_cast<double>(h.counts[h.zero_bin()]));
      reference.push_back(static_cast<double>(h.accidental[h.zero_bin()]) * h.accidental_scale());
      all = all ? merge(*all, h) : h;
    }
    const auto g = estimate_g2_zero(normalize_g2(*all));
    out.value = g.value;
    out.poisson_error = g.error;
    // Ratio-estimator variance from the batch residuals C_k - g A_k.
    const double total = std::accumulate(reference.begin(), reference.end(), 0.0);
    double ss = 0.0;
    for (std::uint64_t k = 0; k < batches; ++k) ss += std::pow(counts[k] - g.value * reference[k], 2);
    const auto n = static_cast<double>(batches);
    out.error = std::sqrt(n / (n - 1.0) * ss) / total;
  });
  // Closed form: two jitters broaden the Gaussian excess at fixed area; the
  // flat pump's triangular pedestal averages to 1 - W/(4L) over the window.
  const double fj = 2.0 * std::sqrt(2.0 * kLn2) * jitter;
  const double c_eff = std::sqrt(c * c + 2.0 * fj * fj);
  const double peak = 1.0 + (g2_squeezed_vacuum(r) - 1.0) * c / c_eff;
  out.expected = 1.0 + (g2_time_averaged(peak, c_eff, window) - 1.0) / (1.0 - window / (4.0 * pump));
  return out;
}

void criterion_6() {
  bool ok = true;
  std::ostringstream detail;
  double slowest = 0.0;
  double worst = 0.0;
  std::uint64_t fewest = ~std::uint64_t{0};
  struct Res {
    double window, jitter;
  };
  const std::vector<Res> resolutions{{0.5e-9, 0.0}, {2.3e-9, 0.0}, {2.3e-9, 0.35e-9}};
  std::ostringstream cells;
  std::uint64_t seed = 600;
  for (double r : {0.1, 0.17, 0.3}) {
    for (const auto& res : resolutions) {
      const auto c = closure(r, res.window, res.jitter, 1.0, 1000000, ++seed);
      slowest = std::max(slowest, c.seconds);
      fewest = std::min(fewest, c.modes);
      worst = std::max(worst, std::abs(c.pull()));
      ok = ok && std::abs(c.pull()) <= 3.0 && c.seconds < 120.0;
      cells << fmt("(%.2f, %.1f ns%s) %.3f +/- %.3f (Poisson %.3f) vs %.3f; ", r, res.window * 1e9,
                   res.jitter > 0 ? " + jitter" : "", c.value, c.error, c.poisson_error, c.expected);
    }
  }
  detail << fmt("3x3 grid r in {0.1, 0.17, 0.3} x resolution {0.5 ns, 2.3 ns, 2.3 ns + 0.35 ns jitter}: worst pull %.2f sigma, "
                ">= %llu modes each; ",
                worst, static_cast<unsigned long long>(fewest))
         << cells.str();
  for (double eff : {0.1, 0.62, 1.0}) {
    const auto c = closure(0.17, 2.3e-9, 0.35e-9, eff, 4000000, ++seed);
    slowest = std::max(slowest, c.seconds);
    ok = ok && std::abs(c.pull()) <= 3.0 && c.seconds < 120.0;
    detail << fmt("efficiency %.2f: %.3f +/- %.3f (Poisson %.3f) vs %.3f (%+.2f sigma); ", eff, c.value, c.error,
                  c.poisson_error, c.expected, c.pull());
  }
  detail << fmt("slowest setting %.1f s (< 120 s)", slowest);
  report(6, ok, "Monte Carlo closure", detail.str());
}

void criterion_7() {
  const Scenario sc = default_scenario();
  CorrelationResult r;
  const double secs = timed([&] { r = run_correlation_experiment(sc); });
  const CorrelationPanel* fine = nullptr;
  const CorrelationPanel* retrieved = nullptr;
  for (const auto& p : r.panels) {
    if (p.name == "input_fine") fine = &p;
    if (p.name == "retrieved_pdc") retrieved = &p;
  }
  if (!fine || !retrieved || !fine->coherence_fwhm || !retrieved->coherence_fwhm) {
    report(7, false, "coherence-time growth", "missing panels");
    return;
  }
  const double in_ns = *fine->coherence_fwhm * 1e9;
  const double out_ns = *retrieved->coherence_fwhm * 1e9;
  const bool setup = std::abs(sc.counting.detector.jitter_sigma - 0.35e-9) < 1e-15 &&
                     std::abs(sc.counting.fine_bin - 0.1e-9) < 1e-15;
  const bool ok = setup && in_ns >= 1.0 && in_ns <= 1.4 && out_ns >= 15.0 && out_ns >= 35.0 / 2.0 && out_ns <= 35.0 * 2.0;
  report(7, ok, "coherence-time growth",
         fmt("input FWHM %.3f ns (in [1.0, 1.4]; 0.35 ns jitter, 0.1 ns bins), retrieved FWHM %.1f ns (>= 15, within x2 of "
             "35), retrieved g2(0) %.2f +/- %.2f, %.1f s",
             in_ns, out_ns, retrieved->g2_zero.value, retrieved->g2_zero.error, secs));
}

void criterion_8() {
  Scenario sc = default_scenario();
  const auto noisy = run_storage_decay(sc);
  const double ec = noisy.coherent.fit.tau / noisy.coherent.injected_tau - 1.0;
  const double ep = noisy.pdc.fit.tau / noisy.pdc.injected_tau - 1.0;
  sc.experiment.decay_noise = false;
  const auto clean = run_storage_decay(sc);
  const double zc = std::abs(clean.coherent.fit.tau / clean.coherent.injected_tau - 1.0);
  const double zp = std::abs(clean.pdc.fit.tau / clean.pdc.injected_tau - 1.0);
  // Synthetic curve straight into the fitter.
  std::vector<DecayPoint> pts;
  for (double t : sc.experiment.storage_times) pts.push_back({t, 0.08 * std::exp(-t / 2.3e-6), 1e-3});
  const double zs = std::abs(fit_exponential_decay(pts).tau / 2.3e-6 - 1.0);
  const bool ok = std::abs(ec) <= 0.05 && std::abs(ep) <= 0.10 && zc <= 1e-6 && zp <= 1e-6 && zs <= 1e-6;
  report(8, ok, "decay fits",
         fmt("coherent %.4f us (2.3, %+.2f%%, within 5%%), pdc %.4f us (1.6, %+.2f%%, within 10%%), zero-noise relative "
             "errors %.1e / %.1e / synthetic %.1e (<= 1e-6)",
             noisy.coherent.fit.tau * 1e6, 100.0 * ec, noisy.pdc.fit.tau * 1e6, 100.0 * ep, zc, zp, zs));
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

void criterion_9() {
  const fs::path root = fs::temp_directory_path() / "eitsim-acceptance-determinism";
  fs::remove_all(root);
  bool ok = true;
  std::ostringstream detail;
  std::size_t total = 0;
  for (const std::string sub : {"spectrum", "calibrate", "propagate", "store", "correlate", "decay"}) {
    const std::string config = sub == "correlate" ? "quick" : "default";
    const std::vector<std::string> args{sub, "--config", config, "--seed", "7", "--out-dir", root.string()};
    std::ostringstream out, err;
    const int first = dispatch(args, out, err);
    const auto a = snapshot(root / sub);
    const int second = dispatch(args, out, err);
    const auto b = snapshot(root / sub);
    const bool same = first == 0 && second == 0 && !a.empty() && a == b;
    ok = ok && same;
    total += a.size();
    detail << sub << (same ? " identical" : " DIFFERS") << " (" << a.size() << " files); ";
  }
  fs::remove_all(root);
  detail << total << " files compared byte for byte";
  report(9, ok, "determinism", detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                    criterion_6, criterion_7, criterion_8, criterion_9};
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n >= 1 && n <= static_cast<int>(criteria.size())) selected[n - 1] = true;
  }
  std::size_t ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    ++ran;
    try {
      criteria[k]();
    } catch (const std::exception& e) {
      report(static_cast<int>(k + 1), false, "exception", e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
