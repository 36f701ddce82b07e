#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eitsim {

/// Photon-number distribution of single-mode squeezed vacuum,
/// P(2m) = (2m)! tanh^{2m} r / (4^m (m!)² cosh r), odd entries zero.
/// Truncated once the remaining tail is below `tail` or at max_n.
std::vector<double> squeezed_vacuum_distribution(double r, double tail = 1e-16, std::size_t max_n = 400);

/// Photon-number distribution of squeezed vacuum displaced by a coherent
/// amplitude of mean photon number alpha_sq with uniformly random relative
/// phase: P(n) = Σ_m |⟨n|D(α)|m⟩|² P_sv(m).
std::vector<double> displaced_squeezed_distribution(double r, double alpha_sq, double tail = 1e-16,
                                                    std::size_t max_n = 400);

/// Poisson(mean) probabilities.
std::vector<double> poisson_distribution(double mean, double tail = 1e-16, std::size_t max_n = 4000);

double distribution_mean(std::span<const double> p);

/// ⟨n(n−1)⟩ / ⟨n⟩².
double factorial_moment_ratio(std::span<const double> p);

}  // namespace eitsim
