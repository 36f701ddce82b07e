#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Data-parallel inner loops of the propagation code. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant selected at
// runtime. Arrays are split real/imaginary (structure of arrays) except for
// complex_multiply, which works on interleaved std::complex<double>.

namespace eitsim::kernels {

/// Coefficients of the weak-probe Maxwell–Bloch right-hand side
///   dP/dt = -(gamma_p - iΔ) P + i·coupling·E + i·half_rabi·S
///   dS/dt = -(gamma_s - iΔ) S + i·half_rabi·P
struct BlochCoefficients {
  double gamma_p = 0.0;
  double gamma_s = 0.0;
  double detuning = 0.0;
  double coupling = 0.0;
  double half_rabi = 0.0;
};

struct SplitState {
  const double* pr;
  const double* pi;
  const double* sr;
  const double* si;
};

struct SplitDerivative {
  double* pr;
  double* pi;
  double* sr;
  double* si;
};

struct KernelTable {
  std::string_view name;
  void (*bloch_rhs)(const BlochCoefficients& c, std::size_t n, SplitState state, const double* er,
                    const double* ei, SplitDerivative out);
  /// out = y + a·x
  void (*axpy)(std::size_t n, double a, const double* x, const double* y, double* out);
  /// y += h/6 · (k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(std::size_t n, double h, const double* k1, const double* k2, const double* k3,
                      const double* k4, double* y);
  /// b[i] *= a[i]
  void (*complex_multiply)(std::size_t n, const std::complex<double>* a, std::complex<double>* b);
};

const KernelTable& scalar_table() noexcept;

/// AVX2 table when compiled in and supported by the running CPU, else nullptr.
const KernelTable* avx2_table() noexcept;

/// Kernel table used by the library. Chosen once: AVX2 when available unless
/// the environment variable EITSIM_SIMD is set to "scalar".
const KernelTable& active() noexcept;

}  // namespace eitsim::kernels
