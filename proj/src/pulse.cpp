#include "eitsim/pulse.hpp"

#include <cmath>

#include "eitsim/error.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

double PulseEnvelope::energy() const noexcept {
  double e = 0.0;
  for (const auto& s : samples) e += std::norm(s);
  return e * dt;
}

std::vector<double> PulseEnvelope::intensity() const {
  std::vector<double> out(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out[k] = std::norm(samples[k]);
  return out;
}

std::complex<double> PulseEnvelope::at(double t) const noexcept {
  if (samples.empty()) return {};
  const double x = (t - t0) / dt;
  if (x < 0.0 || x > static_cast<double>(samples.size() - 1)) return {};
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= samples.size()) return samples.back();
  const double f = x - static_cast<double>(k);
  return samples[k] * (1.0 - f) + samples[k + 1] * f;
}

void PulseEnvelope::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("pulse dt must be positive");
  if (samples.size() < 2) throw DomainError("pulse needs at least two samples");
  if (!std::isfinite(t0) || !std::isfinite(carrier_detuning)) throw DomainError("pulse timing must be finite");
  if (!std::isfinite(energy())) throw DomainError("pulse energy must be finite");
}

namespace {

std::size_t sample_count(double t_start, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > t_start)) throw DomainError("pulse grid needs t_end > t_start and dt > 0");
  return static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
}

}  // namespace

PulseEnvelope gaussian_pulse(double t_start, double t_end, double dt, double centre, double intensity_fwhm,
                             double carrier_detuning) {
  if (!(intensity_fwhm > 0.0)) throw DomainError("pulse FWHM must be positive");
  PulseEnvelope p{t_start, dt, {}, carrier_detuning};
  p.samples.resize(sample_count(t_start, t_end, dt));
  // Amplitude exp(-2 ln2 (t-c)²/w²) has intensity FWHM w.
  const double a = 2.0 * kLn2 / (intensity_fwhm * intensity_fwhm);
  for (std::size_t k = 0; k < p.samples.size(); ++k) {
    const double x = p.time(k) - centre;
    p.samples[k] = std::exp(-a * x * x);
  }
  return p;
}

PulseEnvelope flat_pulse(double t_start, double t_end, double dt, double on_start, double on_end,
                         double carrier_detuning) {
  PulseEnvelope p{t_start, dt, {}, carrier_detuning};
  p.samples.resize(sample_count(t_start, t_end, dt));
  const double slack = 1e-9 * dt;
  for (std::size_t k = 0; k < p.samples.size(); ++k) {
    const double t = p.time(k);
    p.samples[k] = (t >= on_start - slack && t <= on_end + slack) ? 1.0 : 0.0;
  }
  return p;
}

ControlSchedule::ControlSchedule(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
  if (points_.empty()) throw DomainError("control schedule needs at least one breakpoint");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto [t, v] = points_[k];
    if (!std::isfinite(t) || !(v >= 0.0 && v <= 1.0)) {
      throw DomainError("control schedule intensities must lie in [0, 1]");
    }
    if (k > 0 && !(t > points_[k - 1].first)) throw DomainError("control schedule times must increase strictly");
  }
}

ControlSchedule ControlSchedule::constant(double level) { return ControlSchedule({{0.0, level}}); }

ControlSchedule ControlSchedule::storage(double off_start, double off_end, double on_start, double on_end) {
  return ControlSchedule({{off_start, 1.0}, {off_end, 0.0}, {on_start, 0.0}, {on_end, 1.0}});
}

double ControlSchedule::intensity(double t) const noexcept {
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  for (std::size_t k = 1; k < points_.size(); ++k) {
    if (t <= points_[k].first) {
      const auto [ta, va] = points_[k - 1];
      const auto [tb, vb] = points_[k];
      return va + (vb - va) * (t - ta) / (tb - ta);
    }
  }
  return points_.back().second;
}

double ControlSchedule::ramp_duration() const noexcept {
  for (std::size_t k = 1; k < points_.size(); ++k) {
    if (points_[k].second != points_[k - 1].second) return points_[k].first - points_[k - 1].first;
  }
  return 0.0;
}

std::optional<double> ControlSchedule::dark_start() const noexcept {
  for (const auto& [t, v] : points_) {
    if (v == 0.0) return t;
  }
  return std::nullopt;
}

std::optional<double> ControlSchedule::reactivation() const noexcept {
  bool dark = false;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (points_[k].second == 0.0) dark = true;
    if (dark && k + 1 < points_.size() && points_[k].second == 0.0 && points_[k + 1].second > 0.0) {
      return points_[k].first;
    }
  }
  return std::nullopt;
}

}  // namespace eitsim
