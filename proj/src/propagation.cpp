#include "eitsim/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "eitsim/error.hpp"
#include "eitsim/fft.hpp"
#include "eitsim/kernels.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

using cd = std::complex<double>;

PulseEnvelope propagate_static(const PulseEnvelope& pulse, const MediumParams& m) {
  pulse.validate();
  const std::size_t n = pulse.size();
  const std::size_t nfft = next_pow2(2 * n);
  std::vector<cd> buf(nfft, cd{});
  std::copy(pulse.samples.begin(), pulse.samples.end(), buf.begin());
  const Fft fft(nfft);
  fft.forward(buf);

  const double nyquist = kPi / pulse.dt;
  double total = 0.0, edge = 0.0;
  std::vector<cd> response(nfft);
  for (std::size_t k = 0; k < nfft; ++k) {
    const double w = fft_angular_frequency(k, nfft, pulse.dt);
    const double e = std::norm(buf[k]);
    total += e;
    if (std::abs(w) > 0.8 * nyquist) edge += e;
    // Bin k oscillates as e^{+iωt}, i.e. detuning −ω relative to the carrier.
    response[k] = transfer_function(pulse.carrier_detuning - w, m);
  }
  if (total > 0.0 && edge > 1e-6 * total) {
    std::ostringstream msg;
    msg << "pulse spectrum leaks beyond the simulation band (edge energy fraction " << edge / total << ")";
    throw AliasingError(msg.str());
  }
  kernels::active().complex_multiply(nfft, response.data(), buf.data());
  fft.inverse(buf);

  PulseEnvelope out = pulse;
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t k = 0; k < n; ++k) out.samples[k] = buf[k] * scale;
  return out;
}

double SpinWave::energy() const noexcept {
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < coherence.size(); ++k) {
    e += 0.5 * (std::norm(coherence[k]) + std::norm(coherence[k + 1])) * (z[k + 1] - z[k]);
  }
  return e;
}

namespace {

/// Split-complex atomic state on the z nodes plus RK4 scratch.
class BlochSolver {
 public:
  BlochSolver(const MediumParams& m, double carrier, std::size_t slices)
      : nodes_(slices + 1), dz_(1.0 / static_cast<double>(slices)),
        coupling_(std::sqrt(0.5 * m.optical_depth() * m.gamma_ca())), gamma_p_(m.gamma_ca()),
        gamma_bc_(m.gamma_bc()), omega_c_(m.omega_c()), detuning_(carrier),
        y_(4 * nodes_, 0.0), tmp_(4 * nodes_), er_(nodes_), ei_(nodes_), k_(4, std::vector<double>(4 * nodes_)) {}

  std::size_t nodes() const noexcept { return nodes_; }
  double dz() const noexcept { return dz_; }

  /// Output field at z = 1 for the current state and input amplitude.
  cd output_field(cd input) {
    fill_field(y_.data(), input);
    return {er_.back(), ei_.back()};
  }

  /// ∫(2Γ|P|² + 2γ_s|S|²) dz for the current state.
  double dissipation(double control) const {
    const double gs = gamma_bc_ * control;
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes_; ++k) {
      const double w = (k == 0 || k + 1 == nodes_) ? 0.5 * dz_ : dz_;
      const double p2 = pr(y_.data())[k] * pr(y_.data())[k] + pi(y_.data())[k] * pi(y_.data())[k];
      const double s2 = sr(y_.data())[k] * sr(y_.data())[k] + si(y_.data())[k] * si(y_.data())[k];
      acc += w * (2.0 * gamma_p_ * p2 + 2.0 * gs * s2);
    }
    return acc;
  }

  double excitation() const { return polarization_energy() + spin_energy(); }

  double spin_energy() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes_; ++k) {
      const double w = (k == 0 || k + 1 == nodes_) ? 0.5 * dz_ : dz_;
      acc += w * (sr(y_.data())[k] * sr(y_.data())[k] + si(y_.data())[k] * si(y_.data())[k]);
    }
    return acc;
  }

  double polarization_energy() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes_; ++k) {
      const double w = (k == 0 || k + 1 == nodes_) ? 0.5 * dz_ : dz_;
      acc += w * (pr(y_.data())[k] * pr(y_.data())[k] + pi(y_.data())[k] * pi(y_.data())[k]);
    }
    return acc;
  }

  void scale_spin(double amplitude_factor) {
    for (std::size_t k = 0; k < nodes_; ++k) {
      sr(y_.data())[k] *= amplitude_factor;
      si(y_.data())[k] *= amplitude_factor;
    }
  }

  SpinWave snapshot(double t) const {
    SpinWave s;
    s.time = t;
    s.z.resize(nodes_);
    s.coherence.resize(nodes_);
    for (std::size_t k = 0; k < nodes_; ++k) {
      s.z[k] = dz_ * static_cast<double>(k);
      s.coherence[k] = {sr(y_.data())[k], si(y_.data())[k]};
    }
    return s;
  }

  /// One RK4 step of length h; inputs and control sampled at t, t+h/2, t+h.
  void step(double h, const std::array<cd, 3>& input, const std::array<double, 3>& control) {
    const auto& kt = kernels::active();
    const std::size_t len = 4 * nodes_;
    rhs(y_.data(), input[0], control[0], k_[0].data());
    kt.axpy(len, 0.5 * h, k_[0].data(), y_.data(), tmp_.data());
    rhs(tmp_.data(), input[1], control[1], k_[1].data());
    kt.axpy(len, 0.5 * h, k_[1].data(), y_.data(), tmp_.data());
    rhs(tmp_.data(), input[1], control[1], k_[2].data());
    kt.axpy(len, h, k_[2].data(), y_.data(), tmp_.data());
    rhs(tmp_.data(), input[2], control[2], k_[3].data());
    kt.rk4_combine(len, h, k_[0].data(), k_[1].data(), k_[2].data(), k_[3].data(), y_.data());
  }

 private:
  double* pr(double* y) const noexcept { return y; }
  double* pi(double* y) const noexcept { return y + nodes_; }
  double* sr(double* y) const noexcept { return y + 2 * nodes_; }
  double* si(double* y) const noexcept { return y + 3 * nodes_; }
  const double* pr(const double* y) const noexcept { return y; }
  const double* pi(const double* y) const noexcept { return y + nodes_; }
  const double* sr(const double* y) const noexcept { return y + 2 * nodes_; }
  const double* si(const double* y) const noexcept { return y + 3 * nodes_; }

  // ∂z E = i g P, trapezoidal in z.
  void fill_field(const double* y, cd input) {
    const double half = 0.5 * coupling_ * dz_;
    const double* p_r = pr(y);
    const double* p_i = pi(y);
    er_[0] = input.real();
    ei_[0] = input.imag();
    for (std::size_t k = 0; k + 1 < nodes_; ++k) {
      er_[k + 1] = er_[k] - half * (p_i[k] + p_i[k + 1]);
      ei_[k + 1] = ei_[k] + half * (p_r[k] + p_r[k + 1]);
    }
  }

  void rhs(const double* y, cd input, double control, double* out) {
    fill_field(y, input);
    kernels::BlochCoefficients c;
    c.gamma_p = gamma_p_;
    c.gamma_s = gamma_bc_ * control;
    c.detuning = detuning_;
    c.coupling = coupling_;
    c.half_rabi = 0.5 * omega_c_ * std::sqrt(control);
    const kernels::SplitState s{pr(y), pi(y), sr(y), si(y)};
    const kernels::SplitDerivative d{out, out + nodes_, out + 2 * nodes_, out + 3 * nodes_};
    kernels::active().bloch_rhs(c, nodes_, s, er_.data(), ei_.data(), d);
  }

  std::size_t nodes_;
  double dz_;
  double coupling_;
  double gamma_p_;
  double gamma_bc_;
  double omega_c_;
  double detuning_;
  std::vector<double> y_;
  std::vector<double> tmp_;
  std::vector<double> er_;
  std::vector<double> ei_;
  std::vector<std::vector<double>> k_;
};

}  // namespace

DynamicResult propagate_dynamic(const PulseEnvelope& pulse, const MediumParams& m, const ControlSchedule& schedule,
                                const DynamicOptions& options) {
  pulse.validate();
  if (options.z_slices < 1) throw DomainError("need at least one z slice");
  if (options.substeps < 1) throw DomainError("need at least one integrator substep");
  if (options.storage_tau && !(*options.storage_tau > 0.0)) throw DomainError("storage tau must be positive");

  BlochSolver solver(m, pulse.carrier_detuning, options.z_slices);
  DynamicResult result;
  result.output = pulse;
  result.retrieval_start = schedule.reactivation();
  const auto dark = schedule.dark_start();

  const double dt = pulse.dt;
  const double h = dt / static_cast<double>(options.substeps);
  const std::size_t n = pulse.size();

  double input_energy = 0.0, transmitted = 0.0, retrieved = 0.0, dissipated = 0.0, decay_loss = 0.0;
  double stored_at_dark = 0.0;
  bool dark_recorded = false, decay_applied = false;

  for (std::size_t k = 0; k < n; ++k) {
    const double t = pulse.time(k);
    if (dark && !dark_recorded && t >= *dark) {
      result.snapshots.push_back(solver.snapshot(t));
      stored_at_dark = solver.excitation();
      dark_recorded = true;
    }
    if (result.retrieval_start && !decay_applied && t >= *result.retrieval_start) {
      result.snapshots.push_back(solver.snapshot(t));
      if (options.storage_tau && dark) {
        const double before = solver.spin_energy();
        const double factor = apply_storage_decay(1.0, *result.retrieval_start - *dark, *options.storage_tau);
        solver.scale_spin(std::sqrt(factor));
        decay_loss += before * (1.0 - factor);
      }
      decay_applied = true;
    }

    const cd out = solver.output_field(pulse.samples[k]);
    result.output.samples[k] = out;
    input_energy += std::norm(pulse.samples[k]) * dt;
    const double e_out = std::norm(out) * dt;
    if (result.retrieval_start && t >= *result.retrieval_start) {
      retrieved += e_out;
    } else {
      transmitted += e_out;
    }
    if (k + 1 == n) break;

    for (std::size_t s = 0; s < options.substeps; ++s) {
      const double ta = t + h * static_cast<double>(s);
      const std::array<cd, 3> in{pulse.at(ta), pulse.at(ta + 0.5 * h), pulse.at(ta + h)};
      const std::array<double, 3> ctl{schedule.intensity(ta), schedule.intensity(ta + 0.5 * h),
                                      schedule.intensity(ta + h)};
      const double d0 = solver.dissipation(ctl[0]);
      solver.step(h, in, ctl);
      dissipated += 0.5 * h * (d0 + solver.dissipation(ctl[2]));
    }
  }

  EnergyLedger& L = result.ledger;
  L.input_energy = input_energy;
  if (input_energy > 0.0) {
    L.transmitted = transmitted / input_energy;
    L.retrieved = retrieved / input_energy;
    L.stored = solver.excitation() / input_energy;
    L.storage_decay_loss = decay_loss / input_energy;
    L.absorbed = (dissipated + decay_loss) / input_energy;
    L.stored_at_dark = stored_at_dark / input_energy;
    const double out_fraction = L.transmitted + L.retrieved;
    if (std::abs(L.closure() - 1.0) > options.ledger_tolerance || out_fraction > 1.0 + options.ledger_tolerance) {
      std::ostringstream msg;
      msg << "energy ledger non-physical (closure " << L.closure() << "); reduce the time step";
      throw IntegratorError(msg.str());
    }
  }
  return result;
}

double apply_storage_decay(double stored_energy, double storage_time, double tau) {
  if (!(tau > 0.0)) throw DomainError("storage decay time must be positive");
  if (!(storage_time >= 0.0)) throw DomainError("storage time must be non-negative");
  return stored_energy * std::exp(-storage_time / tau);
}

double filtered_fraction(double eit_fwhm_hz, double input_bandwidth_hz, double retrieval_eff) {
  if (!(eit_fwhm_hz > 0.0) || !(input_bandwidth_hz >= eit_fwhm_hz)) {
    throw DomainError("filtered_fraction needs input_bandwidth >= eit_fwhm > 0");
  }
  if (!(retrieval_eff >= 0.0 && retrieval_eff <= 1.0)) throw DomainError("retrieval efficiency must lie in [0, 1]");
  return eit_fwhm_hz / input_bandwidth_hz * retrieval_eff;
}

double peak_time(const PulseEnvelope& pulse) {
  const auto I = pulse.intensity();
  if (I.empty()) throw DomainError("empty pulse");
  const auto k = static_cast<std::size_t>(std::max_element(I.begin(), I.end()) - I.begin());
  if (k == 0 || k + 1 == I.size()) return pulse.time(k);
  const double denom = I[k - 1] - 2.0 * I[k] + I[k + 1];
  const double off = denom != 0.0 ? 0.5 * (I[k - 1] - I[k + 1]) / denom : 0.0;
  return pulse.time(k) + off * pulse.dt;
}

PulseEnvelope window(const PulseEnvelope& pulse, double t_from, double t_to) {
  PulseEnvelope out = pulse;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = out.time(k);
    if (t < t_from || t > t_to) out.samples[k] = {};
  }
  return out;
}

namespace {

/// Half-maximum crossing on a sampled curve, walking from index `from` in steps of `dir`.
double half_crossing(const std::vector<double>& y, std::size_t from, int dir, double half) {
  std::size_t k = from;
  while (true) {
    const std::size_t next = dir > 0 ? k + 1 : k - 1;
    if ((dir > 0 && next >= y.size()) || (dir < 0 && k == 0)) throw ResolutionError("half maximum not bracketed");
    if (y[next] < half) {
      const double f = (y[k] - half) / (y[k] - y[next]);
      return static_cast<double>(k) + dir * f;
    }
    k = next;
  }
}

}  // namespace

double spectral_fwhm_hz(const PulseEnvelope& pulse) {
  const std::size_t nfft = next_pow2(std::max<std::size_t>(8 * pulse.size(), 1u << 16));
  std::vector<cd> buf(nfft, cd{});
  std::copy(pulse.samples.begin(), pulse.samples.end(), buf.begin());
  Fft(nfft).forward(buf);
  // Reorder to ascending frequency.
  std::vector<double> power(nfft);
  for (std::size_t k = 0; k < nfft; ++k) power[k] = std::norm(buf[(k + nfft / 2) % nfft]);
  const auto peak = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
  if (!(power[peak] > 0.0)) throw ResolutionError("zero spectrum");
  const double half = 0.5 * power[peak];
  const double right = half_crossing(power, peak, +1, half);
  const double left = half_crossing(power, peak, -1, half);
  return (right - left) / (static_cast<double>(nfft) * pulse.dt);
}

double coherence_fwhm_s(const PulseEnvelope& impulse_response) {
  const std::size_t n = impulse_response.size();
  const std::size_t nfft = next_pow2(2 * n);
  std::vector<cd> buf(nfft, cd{});
  std::copy(impulse_response.samples.begin(), impulse_response.samples.end(), buf.begin());
  const Fft fft(nfft);
  fft.forward(buf);
  for (auto& x : buf) x = std::norm(x);
  fft.inverse(buf);
  std::vector<double> g1sq(n);
  const double norm0 = std::norm(buf[0]);
  if (!(norm0 > 0.0)) throw ResolutionError("zero impulse response");
  for (std::size_t k = 0; k < n; ++k) g1sq[k] = std::norm(buf[k]) / norm0;
  return 2.0 * half_crossing(g1sq, 0, +1, 0.5) * impulse_response.dt;
}

}  // namespace eitsim
