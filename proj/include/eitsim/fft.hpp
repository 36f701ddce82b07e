#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eitsim {

/// In-place 1-D complex DFT of fixed length (FFTW, estimate-mode plans).
/// forward: X_k = Σ x_n e^{-2πikn/N}; inverse is unnormalized.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

 private:
  std::size_t n_ = 0;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

/// Angular frequency of DFT bin k for spacing dt (negative for the upper half).
double fft_angular_frequency(std::size_t k, std::size_t n, double dt) noexcept;

std::size_t next_pow2(std::size_t n) noexcept;

}  // namespace eitsim
