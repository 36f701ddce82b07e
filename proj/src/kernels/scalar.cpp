#include "eitsim/kernels.hpp"

namespace eitsim::kernels {

namespace {

void bloch_rhs(const BlochCoefficients& c, std::size_t n, SplitState s, const double* er, const double* ei,
               SplitDerivative d) {
  const double gp = c.gamma_p, gs = c.gamma_s, dl = c.detuning, g = c.coupling, h = c.half_rabi;
  for (std::size_t k = 0; k < n; ++k) {
    const double pr = s.pr[k], pi = s.pi[k], sr = s.sr[k], si = s.si[k];
    d.pr[k] = -gp * pr - dl * pi - g * ei[k] - h * si;
    d.pi[k] = -gp * pi + dl * pr + g * er[k] + h * sr;
    d.sr[k] = -gs * sr - dl * si - h * pi;
    d.si[k] = -gs * si + dl * sr + h * pr;
  }
}

void axpy(std::size_t n, double a, const double* x, const double* y, double* out) {
  for (std::size_t k = 0; k < n; ++k) out[k] = y[k] + a * x[k];
}

void rk4_combine(std::size_t n, double h, const double* k1, const double* k2, const double* k3, const double* k4,
                 double* y) {
  const double w = h / 6.0;
  for (std::size_t k = 0; k < n; ++k) y[k] += w * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
}

void complex_multiply(std::size_t n, const std::complex<double>* a, std::complex<double>* b) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    b[k] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

constexpr KernelTable kScalar{"scalar", &bloch_rhs, &axpy, &rk4_combine, &complex_multiply};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace eitsim::kernels
