#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "eitsim/pulse.hpp"
#include "eitsim/rng.hpp"

namespace eitsim {

enum class SourceKind { Coherent, Pdc, Mixture };

/// Where the photons of one temporal mode land inside it.
enum class Placement {
  /// Independent Gaussian offsets about the mode centre; pair separations
  /// then have FWHM equal to the mode width.
  Gaussian,
  Uniform,
  Centre,
};

std::string_view to_string(SourceKind k) noexcept;
std::string_view to_string(Placement p) noexcept;
std::optional<SourceKind> parse_source_kind(std::string_view s) noexcept;
std::optional<Placement> parse_placement(std::string_view s) noexcept;

struct SourceModel {
  SourceKind kind = SourceKind::Coherent;
  /// Intensity profile. For coherent light the rate is ∝ |envelope|²; for
  /// pdc the local squeeze parameter is r·|envelope|/max|envelope|.
  PulseEnvelope envelope;
  /// Coherent only: expected photons over the whole envelope.
  double mean_photons = 1.0;
  double squeeze_r = 0.17;
  double coherence_fwhm = 0.2e-9;
  Placement placement = Placement::Gaussian;
  /// Emission times are quantized to this step when tiling modes.
  double tiling_step = 1e-12;
  /// Shift the mode grid by a uniform random fraction of a mode each trial,
  /// so the sampled intensity has no fixed tile-periodic structure. Photons
  /// falling outside the window are dropped.
  bool random_phase = false;
  double bandwidth_hz = 600e6;
  /// Mixture only: components and their relative mean intensities.
  std::vector<std::pair<SourceModel, double>> components;
  /// Mixture only: sample coherent and pdc components as one field so the
  /// beat term between them appears in the photon statistics.
  bool beat_resolved = false;

  static SourceModel coherent(PulseEnvelope envelope, double mean_photons);
  static SourceModel pdc(PulseEnvelope envelope, double squeeze_r, double coherence_fwhm);
  static SourceModel mixture(std::vector<std::pair<SourceModel, double>> components, bool beat_resolved);

  /// Pair amplitude ε of |0⟩ + ε|2⟩ + … at small r.
  double pair_amplitude() const noexcept;

  /// Throws DomainError on any violated invariant.
  void validate() const;
};

/// 3 + 1/sinh²(r).
double g2_squeezed_vacuum(double r);

struct G2Component {
  double intensity;
  double g2;
};

/// Second-order coherence of a sum of independent fields; beat_resolved
/// adds the interference term between distinct components.
double g2_mixture(const std::vector<G2Component>& components, bool beat_resolved);

/// Top-hat average of 1 + (g2_zero − 1)·exp(−4 ln2 τ²/coherence_fwhm²) over a
/// window of width resolution_fwhm centred on τ = 0.
double g2_time_averaged(double g2_zero, double coherence_fwhm, double resolution_fwhm);

struct Emissions {
  std::vector<double> times;
  /// Temporal-mode index of each photon, −1 for photons not tied to a mode.
  std::vector<std::int64_t> mode;

  std::size_t size() const noexcept { return times.size(); }
};

/// Precomputed sampling plan for one source over one time window. Building
/// the plan is the expensive part; drawing a trial is cheap.
class PhotonSampler {
 public:
  PhotonSampler(const SourceModel& model, double t_start, double t_end);

  /// Appends one trial's photons (unsorted) with times offset by `shift`.
  void sample_into(Rng& rng, Emissions& out, double shift = 0.0) const;
  Emissions sample(std::uint64_t seed) const;

  double expected_photons() const noexcept { return expected_; }
  std::size_t modes() const noexcept;

 private:
  struct PoissonPlan {
    double mean = 0.0;
    std::vector<double> cell_cdf;  // cumulative weight per envelope cell
    double t_start = 0.0;
    double cell = 0.0;
  };
  struct TilePlan {
    double t_start = 0.0;
    double width = 0.0;
    double step = 0.0;
    double sigma = 0.0;
    Placement placement = Placement::Gaussian;
    bool random_phase = false;
    /// Per tile, index into `cdfs`; tiles with equal parameters share one table.
    std::vector<std::uint32_t> table;
    /// Cumulative photon-number distributions.
    std::vector<std::vector<double>> cdfs;
  };

  void add_component(const SourceModel& model, double coherent_mean, double t_start, double t_end);
  void add_beat_resolved(const SourceModel& model, double t_start, double t_end);
  static PoissonPlan make_poisson(const SourceModel& model, double mean, double t_start, double t_end);
  static void draw_poisson(const PoissonPlan& plan, Rng& rng, Emissions& out, double shift);
  static void draw_tiles(const TilePlan& plan, Rng& rng, Emissions& out, double shift);

  std::vector<PoissonPlan> poisson_;
  std::vector<TilePlan> tiles_;
  double expected_ = 0.0;
};

/// Photon emission times within [t_start, t_end), sorted, with mode ids.
Emissions sample_photon_emissions(const SourceModel& model, double t_start, double t_end, std::uint64_t seed);

/// Sorts emissions by time, keeping mode ids aligned.
void sort_emissions(Emissions& e);

}  // namespace eitsim
