#include "eitsim/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eitsim/error.hpp"

namespace eitsim {

void beamsplit(std::span<const double> times, Rng& rng, std::vector<double>& a, std::vector<double>& b) {
  for (double t : times) {
    // One random bit per photon, from the top of the word.
    ((rng() >> 63) ? b : a).push_back(t);
  }
}

std::pair<DetectionRecord, DetectionRecord> beamsplit(std::span<const double> times, std::uint64_t seed) {
  Rng rng(seed);
  DetectionRecord a, b;
  a.label = "A";
  b.label = "B";
  beamsplit(times, rng, a.times, b.times);
  return {std::move(a), std::move(b)};
}

void detect_into(std::span<const double> times, const DetectorSettings& s, Rng& rng, std::vector<double>& out) {
  if (!(s.efficiency >= 0.0 && s.efficiency <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  if (!(s.jitter_sigma >= 0.0) || !(s.dead_time >= 0.0)) throw DomainError("jitter and dead time must be >= 0");
  const std::size_t first = out.size();
  std::normal_distribution<double> jitter(0.0, s.jitter_sigma > 0.0 ? s.jitter_sigma : 1.0);
  for (double t : times) {
    if (s.efficiency < 1.0 && !(uniform01(rng) < s.efficiency)) continue;
    const double x = s.jitter_sigma > 0.0 ? t + jitter(rng) : t;
    if (x >= 0.0) out.push_back(x);
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
  if (s.dead_time > 0.0 && out.size() > first) {
    std::size_t w = first + 1;
    double last = out[first];
    for (std::size_t r = first + 1; r < out.size(); ++r) {
      if (out[r] - last >= s.dead_time) {
        last = out[r];
        out[w++] = out[r];
      }
    }
    out.resize(w);
  }
}

DetectionRecord detect(std::span<const double> times, const DetectorSettings& settings, std::uint64_t seed,
                       std::string label) {
  Rng rng(seed);
  DetectionRecord rec;
  rec.label = std::move(label);
  rec.efficiency = settings.efficiency;
  rec.jitter_sigma = settings.jitter_sigma;
  detect_into(times, settings, rng, rec.times);
  return rec;
}

bool Gate::accepts(double t) const noexcept {
  const double x = period > 0.0 ? t - period * std::floor(t / period) : t;
  return x >= from && x <= to;
}

namespace {

std::vector<double> gated(const std::vector<double>& t, const std::optional<Gate>& gate) {
  if (!gate) return t;
  std::vector<double> out;
  out.reserve(t.size());
  for (double x : t) {
    if (gate->accepts(x)) out.push_back(x);
  }
  return out;
}

void accumulate(const std::vector<double>& starts, const std::vector<double>& stops, double shift,
                CorrelatorMode mode, double bin, std::size_t half, std::vector<std::uint64_t>& counts) {
  const double lo = -(static_cast<double>(half) + 0.5) * bin;
  const double hi = -lo;
  const std::size_t nbins = counts.size();
  std::size_t first = 0;
  for (double s : starts) {
    while (first < stops.size() && stops[first] - shift - s < lo) ++first;
    for (std::size_t j = first; j < stops.size(); ++j) {
      const double d = stops[j] - shift - s;
      if (d >= hi) break;
      const auto k = static_cast<std::size_t>(std::floor((d - lo) / bin));
      if (k < nbins) ++counts[k];
      if (mode == CorrelatorMode::StartStop) break;
    }
  }
}

}  // namespace

CoincidenceHistogram coincidence_histogram(const DetectionRecord& starts, const DetectionRecord& stops,
                                           const HistogramOptions& o) {
  if (!(o.bin_s > 0.0) || !std::isfinite(o.bin_s)) throw DomainError("bin width must be positive");
  const auto half = static_cast<std::size_t>(std::llround(o.range_s / o.bin_s));
  if (2 * half + 1 < 20) throw DomainError("histogram range must cover at least 20 bins");
  const bool pulsed = o.period > 0.0;
  if (pulsed && o.trials < 2) throw DomainError("pulsed histogram needs at least two trials");
  if (pulsed && !(o.range_s < 0.5 * o.period)) throw DomainError("histogram range must be below half the period");
  if (pulsed && (o.reference_shifts < 1 || o.reference_shifts >= o.trials)) {
    throw DomainError("reference shifts must lie in [1, trials)");
  }

  CoincidenceHistogram h;
  h.bin_width = o.bin_s;
  h.half_bins = half;
  h.counts.assign(2 * half + 1, 0);
  h.gate = o.gate;
  const auto a = gated(starts.times, o.gate);
  const auto b = gated(stops.times, o.gate);
  h.start_counts = a.size();
  h.stop_counts = b.size();
  if (pulsed) {
    h.duration = o.period * static_cast<double>(o.trials);
  } else {
    const double ta = a.empty() ? 0.0 : a.back();
    const double tb = b.empty() ? 0.0 : b.back();
    h.duration = std::max(ta, tb);
  }
  accumulate(a, b, 0.0, o.mode, o.bin_s, half, h.counts);
  if (pulsed) {
    h.accidental.assign(h.counts.size(), 0);
    h.trials = o.trials;
    for (std::size_t j = 1; j <= o.reference_shifts; ++j) {
      accumulate(a, b, o.period * static_cast<double>(j), o.mode, o.bin_s, half, h.accidental);
      h.reference_pairs += o.trials - j;
    }
  }
  return h;
}

namespace {

bool same_geometry(const CoincidenceHistogram& a, const CoincidenceHistogram& b) {
  return a.bin_width == b.bin_width && a.half_bins == b.half_bins && a.accidental.size() == b.accidental.size();
}

}  // namespace

CoincidenceHistogram merge(const CoincidenceHistogram& a, const CoincidenceHistogram& b) {
  if (!same_geometry(a, b)) throw DomainError("cannot merge histograms with different geometry");
  CoincidenceHistogram m = a;
  for (std::size_t k = 0; k < m.counts.size(); ++k) m.counts[k] += b.counts[k];
  for (std::size_t k = 0; k < m.accidental.size(); ++k) m.accidental[k] += b.accidental[k];
  m.start_counts += b.start_counts;
  m.stop_counts += b.stop_counts;
  m.duration += b.duration;
  m.trials += b.trials;
  m.reference_pairs += b.reference_pairs;
  return m;
}

CoincidenceHistogram rebin(const CoincidenceHistogram& h, std::size_t factor) {
  if (factor == 0 || factor % 2 == 0) throw DomainError("rebin factor must be odd");
  const std::size_t side = factor / 2;
  const std::size_t new_half = (h.half_bins - side) / factor;
  CoincidenceHistogram r = h;
  r.bin_width = h.bin_width * static_cast<double>(factor);
  r.half_bins = new_half;
  const auto fold = [&](const std::vector<std::uint64_t>& src) {
    std::vector<std::uint64_t> out(2 * new_half + 1, 0);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto centre = static_cast<std::ptrdiff_t>(h.half_bins) +
                          (static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(new_half)) *
                              static_cast<std::ptrdiff_t>(factor);
      for (std::ptrdiff_t j = -static_cast<std::ptrdiff_t>(side); j <= static_cast<std::ptrdiff_t>(side); ++j) {
        out[k] += src[static_cast<std::size_t>(centre + j)];
      }
    }
    return out;
  };
  r.counts = fold(h.counts);
  if (!h.accidental.empty()) r.accidental = fold(h.accidental);
  return r;
}

G2Curve normalize_g2(const CoincidenceHistogram& h) {
  G2Curve c;
  c.bin_width = h.bin_width;
  c.zero_bin = h.zero_bin();
  const std::size_t n = h.bins();
  c.delay.resize(n);
  c.g2.resize(n);
  c.error.resize(n);
  for (std::size_t k = 0; k < n; ++k) c.delay[k] = h.delay(k);

  if (!h.accidental.empty()) {
    std::uint64_t total = 0;
    for (auto a : h.accidental) total += a;
    if (total == 0) throw NormalizationError("accidental reference is empty; no coincidences to normalize by");
    for (std::size_t k = 0; k < n; ++k) {
      const auto C = static_cast<double>(h.counts[k]);
      const auto A = static_cast<double>(h.accidental[k]);
      if (A == 0.0) {
        c.g2[k] = std::numeric_limits<double>::quiet_NaN();
        c.error[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double base = A * h.accidental_scale();
      c.g2[k] = C / base;
      c.error[k] = C > 0.0 ? c.g2[k] * std::sqrt(1.0 / C + 1.0 / A) : 1.0 / base;
    }
    return c;
  }

  const std::size_t side = n / 4;
  if (2 * side < 10) throw NormalizationError("need at least 10 far-delay bins for the baseline");
  double sum = 0.0;
  for (std::size_t k = 0; k < side; ++k) sum += static_cast<double>(h.counts[k] + h.counts[n - 1 - k]);
  const double m = static_cast<double>(2 * side);
  const double base = sum / m;
  if (!(base > 0.0)) throw NormalizationError("far-delay baseline is zero");
  const double base_rel = 1.0 / std::sqrt(sum);
  for (std::size_t k = 0; k < n; ++k) {
    const auto C = static_cast<double>(h.counts[k]);
    c.g2[k] = C / base;
    const double stat = C > 0.0 ? std::sqrt(C) / base : 1.0 / base;
    c.error[k] = std::hypot(stat, c.g2[k] * base_rel);
  }
  return c;
}

G2Estimate estimate_g2_zero(const G2Curve& curve) {
  if (curve.zero_bin >= curve.g2.size()) throw DomainError("curve has no tau = 0 bin");
  return {curve.g2[curve.zero_bin], curve.error[curve.zero_bin]};
}

double coherence_time_fwhm(const G2Curve& curve) {
  const auto [peak, err] = estimate_g2_zero(curve);
  if (!std::isfinite(peak) || !(peak - 1.0 >= 5.0 * err)) {
    std::ostringstream msg;
    msg << "no significant bunching peak at tau = 0 (g2 = " << peak << " +/- " << err << ")";
    throw NoPeakError(msg.str());
  }
  const double half = 1.0 + 0.5 * (peak - 1.0);
  const auto& g = curve.g2;
  const std::size_t z = curve.zero_bin;
  auto crossing = [&](int dir) {
    std::size_t k = z;
    while (true) {
      const bool at_edge = dir > 0 ? k + 1 >= g.size() : k == 0;
      if (at_edge) throw NoPeakError("bunching feature not bounded within the histogram range");
      const std::size_t next = dir > 0 ? k + 1 : k - 1;
      if (!(g[next] >= half)) {
        const double f = std::isfinite(g[next]) ? (g[k] - half) / (g[k] - g[next]) : 0.0;
        return curve.delay[k] + f * (curve.delay[next] - curve.delay[k]);
      }
      k = next;
    }
  };
  return crossing(+1) - crossing(-1);
}

}  // namespace eitsim
