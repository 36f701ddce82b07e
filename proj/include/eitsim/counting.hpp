#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eitsim/rng.hpp"

namespace eitsim {

struct DetectionRecord {
  std::vector<double> times;  // sorted, seconds
  std::string label;
  double efficiency = 1.0;
  double jitter_sigma = 0.0;
};

struct DetectorSettings {
  double efficiency = 0.62;
  double jitter_sigma = 0.35e-9;
  double dead_time = 0.0;
};

/// 50:50 beamsplitter; each photon independently goes to A or B.
std::pair<DetectionRecord, DetectionRecord> beamsplit(std::span<const double> times, std::uint64_t seed);
void beamsplit(std::span<const double> times, Rng& rng, std::vector<double>& a, std::vector<double>& b);

/// Bernoulli thinning, Gaussian timing jitter, re-sort, then optional
/// non-paralyzable dead time. Tags pushed below t = 0 by jitter are dropped.
DetectionRecord detect(std::span<const double> times, const DetectorSettings& settings, std::uint64_t seed,
                       std::string label = {});
void detect_into(std::span<const double> times, const DetectorSettings& settings, Rng& rng,
                 std::vector<double>& out);

/// Periodic acceptance window [from, to] (times modulo period); a zero
/// period gates absolute time.
struct Gate {
  double from = 0.0;
  double to = 0.0;
  double period = 0.0;

  bool accepts(double t) const noexcept;
};

enum class CorrelatorMode { AllPairs, StartStop };

struct HistogramOptions {
  double bin_s = 1.6e-9;
  /// Half-range; the histogram covers |τ| ≤ range with an odd bin count
  /// centred on τ = 0.
  double range_s = 400e-9;
  std::optional<Gate> gate;
  CorrelatorMode mode = CorrelatorMode::AllPairs;
  /// Pulsed acquisition: records hold `trials` consecutive pulses spaced by
  /// `period`. Enables the neighbouring-pulse accidental reference.
  double period = 0.0;
  std::uint64_t trials = 0;
  /// Number of later pulses (k+1 … k+shifts) pooled into the reference.
  std::size_t reference_shifts = 1;
};

struct CoincidenceHistogram {
  double bin_width = 0.0;
  std::size_t half_bins = 0;
  std::vector<std::uint64_t> counts;
  /// Coincidences between different pulses (pulsed mode), raw counts;
  /// empty otherwise.
  std::vector<std::uint64_t> accidental;
  std::uint64_t trials = 0;
  /// Pulse pairs that contributed to `accidental`.
  std::uint64_t reference_pairs = 0;
  std::uint64_t start_counts = 0;
  std::uint64_t stop_counts = 0;
  double duration = 0.0;
  std::optional<Gate> gate;

  std::size_t bins() const noexcept { return counts.size(); }
  /// Factor turning `accidental` into the expected uncorrelated counts.
  double accidental_scale() const noexcept {
    return reference_pairs > 0 ? static_cast<double>(trials) / static_cast<double>(reference_pairs) : 1.0;
  }
  std::size_t zero_bin() const noexcept { return half_bins; }
  double delay(std::size_t k) const noexcept {
    return bin_width * (static_cast<double>(k) - static_cast<double>(half_bins));
  }
};

CoincidenceHistogram coincidence_histogram(const DetectionRecord& starts, const DetectionRecord& stops,
                                           const HistogramOptions& options);

/// Bin-wise sum of histograms with identical geometry.
CoincidenceHistogram merge(const CoincidenceHistogram& a, const CoincidenceHistogram& b);

/// Combines `factor` (odd) adjacent bins, keeping τ = 0 centred; edge bins
/// that do not fill a group are dropped.
CoincidenceHistogram rebin(const CoincidenceHistogram& h, std::size_t factor);

struct G2Curve {
  std::vector<double> delay;
  std::vector<double> g2;
  std::vector<double> error;
  double bin_width = 0.0;
  std::size_t zero_bin = 0;
};

/// Pulsed histograms are divided bin by bin by the scaled accidental
/// reference; stationary ones by the mean of the outer quarter of bins on
/// each side. Poisson errors.
G2Curve normalize_g2(const CoincidenceHistogram& h);

struct G2Estimate {
  double value;
  double error;
};

G2Estimate estimate_g2_zero(const G2Curve& curve);

/// FWHM of the τ = 0 bunching feature above the unit baseline.
double coherence_time_fwhm(const G2Curve& curve);

}  // namespace eitsim
