#include <doctest.h>

#include <random>
#include <vector>

#include "eitsim/kernels.hpp"

using namespace eitsim::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& g, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return v;
}

void require_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13).scale(1.0));
  }
}

}  // namespace

TEST_CASE("active table is one of the known variants") {
  const auto& t = active();
  CHECK((t.name == scalar_table().name || (avx2_table() && t.name == avx2_table()->name)));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* simd = avx2_table();
  if (!simd) {
    MESSAGE("AVX2 unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& ref = scalar_table();
  std::mt19937_64 g(42);
  // Odd sizes exercise the tail loops.
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 65u, 129u}) {
    CAPTURE(n);
    const auto pr = random_vec(g, n), pi = random_vec(g, n), sr = random_vec(g, n), si = random_vec(g, n);
    const auto er = random_vec(g, n), ei = random_vec(g, n);
    const BlochCoefficients c{1.9e7, 3.1e5, -4.2e6, 2.7e7, 4.6e7};
    std::vector<double> a0(n), a1(n), a2(n), a3(n), b0(n), b1(n), b2(n), b3(n);
    ref.bloch_rhs(c, n, {pr.data(), pi.data(), sr.data(), si.data()}, er.data(), ei.data(),
                  {a0.data(), a1.data(), a2.data(), a3.data()});
    simd->bloch_rhs(c, n, {pr.data(), pi.data(), sr.data(), si.data()}, er.data(), ei.data(),
                    {b0.data(), b1.data(), b2.data(), b3.data()});
    require_close(a0, b0);
    require_close(a1, b1);
    require_close(a2, b2);
    require_close(a3, b3);

    std::vector<double> ya(n), yb(n);
    ref.axpy(n, 0.37, pr.data(), pi.data(), ya.data());
    simd->axpy(n, 0.37, pr.data(), pi.data(), yb.data());
    require_close(ya, yb);

    ya = sr;
    yb = sr;
    ref.rk4_combine(n, 1e-3, pr.data(), pi.data(), er.data(), ei.data(), ya.data());
    simd->rk4_combine(n, 1e-3, pr.data(), pi.data(), er.data(), ei.data(), yb.data());
    require_close(ya, yb);

    std::vector<std::complex<double>> x(n), za(n), zb(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {pr[i], pi[i]};
      za[i] = zb[i] = {sr[i], si[i]};
    }
    ref.complex_multiply(n, x.data(), za.data());
    simd->complex_multiply(n, x.data(), zb.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(za[i].real() == doctest::Approx(zb[i].real()).epsilon(1e-13).scale(1.0));
      CHECK(za[i].imag() == doctest::Approx(zb[i].imag()).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("scalar bloch rhs matches the written-out equations") {
  const BlochCoefficients c{2.0, 0.5, 3.0, 1.5, 0.25};
  const double pr = 0.3, pi = -0.2, sr = 0.7, si = 0.1, er = 0.9, ei = -0.4;
  double d0, d1, d2, d3;
  scalar_table().bloch_rhs(c, 1, {&pr, &pi, &sr, &si}, &er, &ei, {&d0, &d1, &d2, &d3});
  const std::complex<double> I(0, 1), P(pr, pi), S(sr, si), E(er, ei);
  const auto dP = -(c.gamma_p - I * c.detuning) * P + I * c.coupling * E + I * c.half_rabi * S;
  const auto dS = -(c.gamma_s - I * c.detuning) * S + I * c.half_rabi * P;
  CHECK(d0 == doctest::Approx(dP.real()).scale(0.0));
  CHECK(d1 == doctest::Approx(dP.imag()).scale(0.0));
  CHECK(d2 == doctest::Approx(dS.real()).scale(0.0));
  CHECK(d3 == doctest::Approx(dS.imag()).scale(0.0));
}
