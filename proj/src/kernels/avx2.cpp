#include <immintrin.h>

#include "eitsim/kernels.hpp"

namespace eitsim::kernels {

namespace {

void bloch_rhs(const BlochCoefficients& c, std::size_t n, SplitState s, const double* er, const double* ei,
               SplitDerivative d) {
  const __m256d ngp = _mm256_set1_pd(-c.gamma_p);
  const __m256d ngs = _mm256_set1_pd(-c.gamma_s);
  const __m256d dl = _mm256_set1_pd(c.detuning);
  const __m256d g = _mm256_set1_pd(c.coupling);
  const __m256d h = _mm256_set1_pd(c.half_rabi);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d pr = _mm256_loadu_pd(s.pr + k);
    const __m256d pi = _mm256_loadu_pd(s.pi + k);
    const __m256d sr = _mm256_loadu_pd(s.sr + k);
    const __m256d si = _mm256_loadu_pd(s.si + k);
    const __m256d vr = _mm256_loadu_pd(er + k);
    const __m256d vi = _mm256_loadu_pd(ei + k);
    // -gp*pr - dl*pi - g*ei - h*si
    __m256d a = _mm256_mul_pd(ngp, pr);
    a = _mm256_fnmadd_pd(dl, pi, a);
    a = _mm256_fnmadd_pd(g, vi, a);
    a = _mm256_fnmadd_pd(h, si, a);
    // -gp*pi + dl*pr + g*er + h*sr
    __m256d b = _mm256_mul_pd(ngp, pi);
    b = _mm256_fmadd_pd(dl, pr, b);
    b = _mm256_fmadd_pd(g, vr, b);
    b = _mm256_fmadd_pd(h, sr, b);
    // -gs*sr - dl*si - h*pi
    __m256d e = _mm256_mul_pd(ngs, sr);
    e = _mm256_fnmadd_pd(dl, si, e);
    e = _mm256_fnmadd_pd(h, pi, e);
    // -gs*si + dl*sr + h*pr
    __m256d f = _mm256_mul_pd(ngs, si);
    f = _mm256_fmadd_pd(dl, sr, f);
    f = _mm256_fmadd_pd(h, pr, f);
    _mm256_storeu_pd(d.pr + k, a);
    _mm256_storeu_pd(d.pi + k, b);
    _mm256_storeu_pd(d.sr + k, e);
    _mm256_storeu_pd(d.si + k, f);
  }
  if (k < n) {
    const SplitState tail{s.pr + k, s.pi + k, s.sr + k, s.si + k};
    const SplitDerivative out{d.pr + k, d.pi + k, d.sr + k, d.si + k};
    scalar_table().bloch_rhs(c, n - k, tail, er + k, ei + k, out);
  }
}

void axpy(std::size_t n, double a, const double* x, const double* y, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(out + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) out[k] = y[k] + a * x[k];
}

void rk4_combine(std::size_t n, double h, const double* k1, const double* k2, const double* k3, const double* k4,
                 double* y) {
  const __m256d w = _mm256_set1_pd(h / 6.0);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    __m256d sum = _mm256_add_pd(_mm256_loadu_pd(k1 + k), _mm256_loadu_pd(k4 + k));
    sum = _mm256_fmadd_pd(two, _mm256_add_pd(_mm256_loadu_pd(k2 + k), _mm256_loadu_pd(k3 + k)), sum);
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(w, sum, _mm256_loadu_pd(y + k)));
  }
  const double ws = h / 6.0;
  for (; k < n; ++k) y[k] += ws * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
}

void complex_multiply(std::size_t n, const std::complex<double>* a, std::complex<double>* b) {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* pb = reinterpret_cast<double*>(b);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * k);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * k);
    const __m256d re = _mm256_movedup_pd(va);         // ar ar
    const __m256d im = _mm256_permute_pd(va, 0xF);    // ai ai
    const __m256d swapped = _mm256_permute_pd(vb, 0x5);  // bi br
    _mm256_storeu_pd(pb + 2 * k, _mm256_fmaddsub_pd(re, vb, _mm256_mul_pd(im, swapped)));
  }
  if (k < n) scalar_table().complex_multiply(n - k, a + k, b + k);
}

constexpr KernelTable kAvx2{"avx2", &bloch_rhs, &axpy, &rk4_combine, &complex_multiply};

}  // namespace

const KernelTable* avx2_table_unchecked() noexcept { return &kAvx2; }

}  // namespace eitsim::kernels
