#include "eitsim/sources.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "eitsim/error.hpp"
#include "eitsim/fock.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

std::string_view to_string(SourceKind k) noexcept {
  switch (k) {
    case SourceKind::Coherent: return "coherent";
    case SourceKind::Pdc: return "pdc";
    case SourceKind::Mixture: return "mixture";
  }
  return "?";
}

std::string_view to_string(Placement p) noexcept {
  switch (p) {
    case Placement::Gaussian: return "gaussian";
    case Placement::Uniform: return "uniform";
    case Placement::Centre: return "centre";
  }
  return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) noexcept {
  if (s == "coherent") return SourceKind::Coherent;
  if (s == "pdc") return SourceKind::Pdc;
  if (s == "mixture") return SourceKind::Mixture;
  return std::nullopt;
}

std::optional<Placement> parse_placement(std::string_view s) noexcept {
  if (s == "gaussian") return Placement::Gaussian;
  if (s == "uniform") return Placement::Uniform;
  if (s == "centre" || s == "center") return Placement::Centre;
  return std::nullopt;
}

SourceModel SourceModel::coherent(PulseEnvelope envelope, double mean_photons) {
  SourceModel m;
  m.kind = SourceKind::Coherent;
  m.envelope = std::move(envelope);
  m.mean_photons = mean_photons;
  return m;
}

SourceModel SourceModel::pdc(PulseEnvelope envelope, double squeeze_r, double coherence_fwhm) {
  SourceModel m;
  m.kind = SourceKind::Pdc;
  m.envelope = std::move(envelope);
  m.squeeze_r = squeeze_r;
  m.coherence_fwhm = coherence_fwhm;
  return m;
}

SourceModel SourceModel::mixture(std::vector<std::pair<SourceModel, double>> components, bool beat_resolved) {
  SourceModel m;
  m.kind = SourceKind::Mixture;
  m.components = std::move(components);
  m.beat_resolved = beat_resolved;
  if (!m.components.empty()) m.envelope = m.components.front().first.envelope;
  return m;
}

double SourceModel::pair_amplitude() const noexcept { return std::tanh(squeeze_r) / std::sqrt(2.0); }

void SourceModel::validate() const {
  switch (kind) {
    case SourceKind::Coherent:
      envelope.validate();
      if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) throw DomainError("mean_photons must be >= 0");
      break;
    case SourceKind::Pdc:
      envelope.validate();
      if (!(squeeze_r >= 0.0) || !std::isfinite(squeeze_r)) throw DomainError("squeeze_r must be >= 0");
      if (!(coherence_fwhm > 0.0)) throw DomainError("coherence_fwhm must be positive");
      if (!(tiling_step > 0.0)) throw DomainError("tiling_step must be positive");
      break;
    case SourceKind::Mixture: {
      if (components.empty()) throw DomainError("mixture needs at least one component");
      bool positive = false;
      int pdc_count = 0;
      for (const auto& [c, w] : components) {
        if (c.kind == SourceKind::Mixture) throw DomainError("nested mixtures are not supported");
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("mixture weights must be >= 0");
        positive = positive || w > 0.0;
        if (c.kind == SourceKind::Pdc) ++pdc_count;
        c.validate();
      }
      if (!positive) throw DomainError("mixture needs a positive weight");
      if (pdc_count > 1) throw DomainError("mixture supports at most one pdc component");
      if (beat_resolved && pdc_count != 1) throw DomainError("beat-resolved sampling needs exactly one pdc component");
      break;
    }
  }
}

double g2_squeezed_vacuum(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("g2 of squeezed vacuum needs finite r > 0");
  const double s = std::sinh(r);
  return 3.0 + 1.0 / (s * s);
}

double g2_mixture(const std::vector<G2Component>& components, bool beat_resolved) {
  if (components.empty()) throw DomainError("g2_mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.intensity >= 0.0) || !std::isfinite(c.intensity)) throw DomainError("intensities must be >= 0");
    if (!std::isfinite(c.g2)) throw DomainError("component g2 must be finite");
    total += c.intensity;
  }
  if (!(total > 0.0)) throw DomainError("total intensity must be positive");
  const double beta = beat_resolved ? 1.0 : 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    num += components[i].g2 * components[i].intensity * components[i].intensity;
    for (std::size_t j = 0; j < components.size(); ++j) {
      if (i != j) num += (1.0 + beta) * components[i].intensity * components[j].intensity;
    }
  }
  return num / (total * total);
}

double g2_time_averaged(double g2_zero, double coherence_fwhm, double resolution_fwhm) {
  if (!(coherence_fwhm > 0.0) || !(resolution_fwhm > 0.0) || !(g2_zero > 0.0)) {
    throw DomainError("g2_time_averaged needs positive arguments");
  }
  // (1/W)∫_{-W/2}^{W/2} exp(-4 ln2 τ²/c²) dτ
  const double a = std::sqrt(kLn2) * resolution_fwhm / coherence_fwhm;
  const double overlap = (coherence_fwhm / resolution_fwhm) * std::sqrt(kPi / (4.0 * kLn2)) * std::erf(a);
  return 1.0 + (g2_zero - 1.0) * overlap;
}

namespace {

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

// ∫|envelope|² over [a, b) by the midpoint rule on the envelope's own grid.
double envelope_integral(const PulseEnvelope& env, double a, double b) {
  const double h = env.dt;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = a + h * static_cast<double>(k);
    const double hi = std::min(b, lo + h);
    acc += std::norm(env.at(0.5 * (lo + hi))) * (hi - lo);
  }
  return acc;
}

double envelope_total(const PulseEnvelope& env) { return envelope_integral(env, env.t0, env.t_end()); }

double max_amplitude(const PulseEnvelope& env) {
  double m = 0.0;
  for (const auto& s : env.samples) m = std::max(m, std::abs(s));
  return m;
}

void check_window(const SourceModel& model, double t_start, double t_end) {
  if (!(t_end > t_start)) throw DomainError("sampling window needs t_end > t_start");
  const auto& e = model.envelope;
  const double slack = 1e-9 * e.dt;
  if (t_start < e.t0 - slack || t_end > e.t_end() + e.dt + slack) {
    throw DomainError("sampling window must lie within the envelope support");
  }
}

}  // namespace

PhotonSampler::PhotonSampler(const SourceModel& model, double t_start, double t_end) {
  model.validate();
  if (model.kind != SourceKind::Mixture) {
    add_component(model, model.kind == SourceKind::Coherent ? model.mean_photons : 0.0, t_start, t_end);
    return;
  }
  if (model.beat_resolved) {
    add_beat_resolved(model, t_start, t_end);
    return;
  }
  // Reference scale: the pdc component if present, else the first one.
  const auto ref_it = std::find_if(model.components.begin(), model.components.end(),
                                   [](const auto& c) { return c.first.kind == SourceKind::Pdc; });
  const auto& ref = ref_it != model.components.end() ? *ref_it : model.components.front();
  double ref_expected;
  if (ref.first.kind == SourceKind::Pdc) {
    add_component(ref.first, 0.0, t_start, t_end);
    ref_expected = expected_;
  } else {
    check_window(ref.first, t_start, t_end);
    ref_expected = ref.first.mean_photons * envelope_integral(ref.first.envelope, t_start, t_end) /
                   envelope_total(ref.first.envelope);
  }
  if (!(ref.second > 0.0)) throw DomainError("reference mixture component needs a positive weight");
  const double scale = ref_expected / ref.second;
  for (const auto& c : model.components) {
    if (c.first.kind == SourceKind::Pdc) continue;
    const double in_window = envelope_integral(c.first.envelope, t_start, t_end);
    const double total = envelope_total(c.first.envelope);
    // Coherent mean over the whole envelope that yields weight·scale in the window.
    add_component(c.first, in_window > 0.0 ? c.second * scale * total / in_window : 0.0, t_start, t_end);
  }
}

namespace {

// A mode lasts the area of |g1|² (Gaussian, FWHM c), so the pair excess
// integrates to (g2 - 1)·duration and the peak equals the per-mode g2.
double mode_duration(const SourceModel& m) {
  if (m.coherence_fwhm < 10.0 * m.tiling_step) {
    throw ResolutionError("coherence_fwhm must span at least 10 tiling steps");
  }
  const double area = m.coherence_fwhm * std::sqrt(kPi / (4.0 * kLn2));
  return m.tiling_step * std::round(area / m.tiling_step);
}

// Per-photon spread whose pair difference has FWHM c.
double placement_sigma(const SourceModel& m) {
  return m.coherence_fwhm / (2.0 * std::sqrt(2.0 * kLn2) * std::sqrt(2.0));
}

}  // namespace

void PhotonSampler::add_component(const SourceModel& model, double coherent_mean, double t_start, double t_end) {
  check_window(model, t_start, t_end);
  if (model.kind == SourceKind::Coherent) {
    const double frac = envelope_integral(model.envelope, t_start, t_end) / envelope_total(model.envelope);
    poisson_.push_back(make_poisson(model, coherent_mean * frac, t_start, t_end));
    expected_ += poisson_.back().mean;
    return;
  }
  const double step = model.tiling_step;
  const double width = mode_duration(model);
  TilePlan plan;
  plan.t_start = t_start;
  plan.width = width;
  plan.step = step;
  plan.sigma = placement_sigma(model);
  plan.placement = model.placement;
  plan.random_phase = model.random_phase;
  const auto n_tiles = static_cast<std::size_t>(std::floor((t_end - t_start) / width + 1e-9));
  const double amax = max_amplitude(model.envelope);
  std::map<double, std::uint32_t> seen;
  plan.table.resize(n_tiles);
  for (std::size_t k = 0; k < n_tiles; ++k) {
    const double centre = t_start + width * (static_cast<double>(k) + 0.5);
    const double r_local = amax > 0.0 ? model.squeeze_r * std::abs(model.envelope.at(centre)) / amax : 0.0;
    auto [it, fresh] = seen.try_emplace(r_local, static_cast<std::uint32_t>(plan.cdfs.size()));
    if (fresh) plan.cdfs.push_back(cumulative(squeezed_vacuum_distribution(r_local)));
    plan.table[k] = it->second;
    const double s = std::sinh(r_local);
    expected_ += s * s;
  }
  tiles_.push_back(std::move(plan));
}

void PhotonSampler::add_beat_resolved(const SourceModel& model, double t_start, double t_end) {
  const SourceModel* pdc = nullptr;
  double pdc_weight = 0.0;
  for (const auto& [c, w] : model.components) {
    if (c.kind == SourceKind::Pdc) {
      pdc = &c;
      pdc_weight = w;
    }
  }
  check_window(*pdc, t_start, t_end);
  if (!(pdc_weight > 0.0)) throw DomainError("pdc component of a beat-resolved mixture needs a positive weight");
  const double step = pdc->tiling_step;
  const double width = mode_duration(*pdc);
  const auto n_tiles = static_cast<std::size_t>(std::floor((t_end - t_start) / width + 1e-9));
  const double amax = max_amplitude(pdc->envelope);

  std::vector<double> r_local(n_tiles);
  double pdc_expected = 0.0;
  for (std::size_t k = 0; k < n_tiles; ++k) {
    const double centre = t_start + width * (static_cast<double>(k) + 0.5);
    r_local[k] = amax > 0.0 ? pdc->squeeze_r * std::abs(pdc->envelope.at(centre)) / amax : 0.0;
    pdc_expected += std::sinh(r_local[k]) * std::sinh(r_local[k]);
  }
  // Coherent photons per tile; components add as one field.
  std::vector<double> alpha_sq(n_tiles, 0.0);
  for (const auto& [c, w] : model.components) {
    if (c.kind != SourceKind::Coherent) continue;
    check_window(c, t_start, t_end);
    const double in_window = envelope_integral(c.envelope, t_start, t_start + width * static_cast<double>(n_tiles));
    if (!(in_window > 0.0)) continue;
    const double window_mean = w / pdc_weight * pdc_expected;
    for (std::size_t k = 0; k < n_tiles; ++k) {
      const double a = t_start + width * static_cast<double>(k);
      alpha_sq[k] += window_mean * envelope_integral(c.envelope, a, a + width) / in_window;
    }
  }

  TilePlan plan;
  plan.t_start = t_start;
  plan.width = width;
  plan.step = step;
  plan.sigma = placement_sigma(*pdc);
  plan.placement = pdc->placement;
  plan.random_phase = pdc->random_phase;
  plan.table.resize(n_tiles);
  std::map<std::pair<double, double>, std::uint32_t> seen;
  for (std::size_t k = 0; k < n_tiles; ++k) {
    auto [it, fresh] = seen.try_emplace({r_local[k], alpha_sq[k]}, static_cast<std::uint32_t>(plan.cdfs.size()));
    if (fresh) plan.cdfs.push_back(cumulative(displaced_squeezed_distribution(r_local[k], alpha_sq[k])));
    plan.table[k] = it->second;
    expected_ += std::sinh(r_local[k]) * std::sinh(r_local[k]) + alpha_sq[k];
  }
  tiles_.push_back(std::move(plan));
}

PhotonSampler::PoissonPlan PhotonSampler::make_poisson(const SourceModel& model, double mean, double t_start,
                                                       double t_end) {
  PoissonPlan plan;
  plan.mean = mean;
  plan.t_start = t_start;
  plan.cell = model.envelope.dt;
  const auto n = static_cast<std::size_t>(std::ceil((t_end - t_start) / plan.cell - 1e-9));
  plan.cell_cdf.resize(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = t_start + plan.cell * static_cast<double>(k);
    const double hi = std::min(t_end, lo + plan.cell);
    acc += std::norm(model.envelope.at(0.5 * (lo + hi))) * (hi - lo);
    plan.cell_cdf[k] = acc;
  }
  if (acc > 0.0) {
    for (auto& c : plan.cell_cdf) c /= acc;
  } else {
    plan.mean = 0.0;
  }
  return plan;
}

void PhotonSampler::draw_poisson(const PoissonPlan& plan, Rng& rng, Emissions& out, double shift) {
  if (plan.mean <= 0.0) return;
  std::poisson_distribution<long long> count(plan.mean);
  const long long n = count(rng);
  const double last = plan.t_start + plan.cell * static_cast<double>(plan.cell_cdf.size());
  for (long long i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    const auto k = static_cast<std::size_t>(
        std::upper_bound(plan.cell_cdf.begin(), plan.cell_cdf.end(), u) - plan.cell_cdf.begin());
    const std::size_t cell = std::min(k, plan.cell_cdf.size() - 1);
    const double lo = plan.t_start + plan.cell * static_cast<double>(cell);
    const double t = std::min(last, lo + plan.cell * uniform01(rng));
    out.times.push_back(t + shift);
    out.mode.push_back(-1);
  }
}

void PhotonSampler::draw_tiles(const TilePlan& plan, Rng& rng, Emissions& out, double shift) {
  std::normal_distribution<double> offset(0.0, plan.sigma);
  const std::size_t n_tiles = plan.table.size();
  const double window_end = plan.t_start + plan.width * static_cast<double>(n_tiles);
  // With a random phase one extra tile straddles the window edges.
  double origin = plan.t_start;
  std::size_t count = n_tiles;
  if (plan.random_phase && n_tiles > 0) {
    origin += plan.step * std::floor(plan.width * uniform01(rng) / plan.step) - plan.width;
    count = n_tiles + 1;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const auto& cdf = plan.cdfs[plan.table[std::min(k, n_tiles - 1)]];
    const double u = uniform01(rng);
    if (u < cdf.front()) continue;
    const auto n = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t photons = std::min(n, cdf.size() - 1);
    const double tile = origin + plan.width * static_cast<double>(k);
    for (std::size_t i = 0; i < photons; ++i) {
      double x = 0.5 * plan.width;
      if (plan.placement == Placement::Gaussian) {
        if (plan.random_phase) {
          x = plan.step * std::round((0.5 * plan.width + offset(rng)) / plan.step);
        } else {
          // Redraw offsets that would leave the sampled window.
          do {
            x = plan.step * std::round((0.5 * plan.width + offset(rng)) / plan.step);
          } while (tile + x < plan.t_start || tile + x >= window_end);
        }
      } else if (plan.placement == Placement::Uniform) {
        x = plan.step * std::floor(plan.width * uniform01(rng) / plan.step);
      } else {
        x = plan.step * std::round(x / plan.step);
      }
      if (plan.random_phase && (tile + x < plan.t_start || tile + x >= window_end)) continue;
      out.times.push_back(tile + x + shift);
      out.mode.push_back(static_cast<std::int64_t>(k));
    }
  }
}

void PhotonSampler::sample_into(Rng& rng, Emissions& out, double shift) const {
  for (const auto& p : tiles_) draw_tiles(p, rng, out, shift);
  for (const auto& p : poisson_) draw_poisson(p, rng, out, shift);
}

Emissions PhotonSampler::sample(std::uint64_t seed) const {
  Rng rng(seed);
  Emissions e;
  sample_into(rng, e);
  sort_emissions(e);
  return e;
}

std::size_t PhotonSampler::modes() const noexcept {
  std::size_t n = 0;
  for (const auto& p : tiles_) n += p.table.size();
  return n;
}

Emissions sample_photon_emissions(const SourceModel& model, double t_start, double t_end, std::uint64_t seed) {
  return PhotonSampler(model, t_start, t_end).sample(seed);
}

void sort_emissions(Emissions& e) {
  std::vector<std::size_t> idx(e.times.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return e.times[a] < e.times[b]; });
  Emissions s;
  s.times.reserve(idx.size());
  s.mode.reserve(idx.size());
  for (auto i : idx) {
    s.times.push_back(e.times[i]);
    s.mode.push_back(e.mode[i]);
  }
  e = std::move(s);
}

}  // namespace eitsim
