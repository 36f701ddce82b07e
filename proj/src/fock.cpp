#include "eitsim/fock.hpp"

#include <algorithm>
#include <cmath>

#include "eitsim/error.hpp"

namespace eitsim {

std::vector<double> squeezed_vacuum_distribution(double r, double tail, std::size_t max_n) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("squeeze parameter must be finite and >= 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  std::vector<double> p{1.0 / std::cosh(r)};
  double acc = p[0];
  double pm = p[0];
  for (std::size_t m = 0; 1.0 - acc > tail && 2 * m + 2 <= max_n; ++m) {
    pm *= (2.0 * m + 1.0) / (2.0 * (m + 1.0)) * t2;
    p.push_back(0.0);
    p.push_back(pm);
    acc += pm;
    if (pm == 0.0) break;
  }
  return p;
}

namespace {

// |⟨n|D(α)|m⟩|² for real α ≥ 0, via the associated Laguerre form.
double displacement_element_sq(std::size_t n, std::size_t m, double alpha_sq) {
  const std::size_t lo = std::min(n, m);
  const std::size_t hi = std::max(n, m);
  const std::size_t k = hi - lo;
  if (alpha_sq == 0.0) return n == m ? 1.0 : 0.0;
  const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k), alpha_sq);
  const double log_pref = -alpha_sq + std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0) + k * std::log(alpha_sq);
  return std::exp(log_pref) * lag * lag;
}

}  // namespace

std::vector<double> displaced_squeezed_distribution(double r, double alpha_sq, double tail, std::size_t max_n) {
  if (!(alpha_sq >= 0.0) || !std::isfinite(alpha_sq)) throw DomainError("coherent mean must be finite and >= 0");
  const auto sv = squeezed_vacuum_distribution(r, tail, max_n);
  if (alpha_sq == 0.0) return sv;
  std::vector<double> p;
  double acc = 0.0;
  for (std::size_t n = 0; n <= max_n; ++n) {
    double pn = 0.0;
    for (std::size_t m = 0; m < sv.size(); m += 2) pn += displacement_element_sq(n, m, alpha_sq) * sv[m];
    p.push_back(pn);
    acc += pn;
    if (1.0 - acc <= tail && static_cast<double>(n) > alpha_sq) break;
  }
  return p;
}

std::vector<double> poisson_distribution(double mean, double tail, std::size_t max_n) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be finite and >= 0");
  std::vector<double> p;
  double acc = 0.0;
  for (std::size_t n = 0; n <= max_n; ++n) {
    const double pn = std::exp(-mean + n * std::log(mean > 0.0 ? mean : 1.0) - std::lgamma(n + 1.0));
    p.push_back(mean == 0.0 ? (n == 0 ? 1.0 : 0.0) : pn);
    acc += p.back();
    if (1.0 - acc <= tail && static_cast<double>(n) > mean) break;
  }
  return p;
}

double distribution_mean(std::span<const double> p) {
  double m = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
  return m;
}

double factorial_moment_ratio(std::span<const double> p) {
  const double mean = distribution_mean(p);
  if (!(mean > 0.0)) throw DomainError("distribution has zero mean");
  double f2 = 0.0;
  for (std::size_t n = 2; n < p.size(); ++n) f2 += static_cast<double>(n) * static_cast<double>(n - 1) * p[n];
  return f2 / (mean * mean);
}

}  // namespace eitsim
