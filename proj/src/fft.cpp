#include "eitsim/fft.hpp"

#include <fftw3.h>

#include <stdexcept>
#include <utility>

#include "eitsim/units.hpp"

namespace eitsim {

namespace {

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::vector<std::complex<double>> scratch(n);
  const int len = static_cast<int>(n);
  forward_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft::~Fft() {
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (inverse_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
}

Fft::Fft(Fft&& o) noexcept
    : n_(std::exchange(o.n_, 0)), forward_(std::exchange(o.forward_, nullptr)),
      inverse_(std::exchange(o.inverse_, nullptr)) {}

Fft& Fft::operator=(Fft&& o) noexcept {
  std::swap(n_, o.n_);
  std::swap(forward_, o.forward_);
  std::swap(inverse_, o.inverse_);
  return *this;
}

void Fft::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inverse_), as_fftw(data.data()), as_fftw(data.data()));
}

double fft_angular_frequency(std::size_t k, std::size_t n, double dt) noexcept {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  const double f = (k < (n + 1) / 2) ? kk / (nn * dt) : (kk - nn) / (nn * dt);
  return kTwoPi * f;
}

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace eitsim
