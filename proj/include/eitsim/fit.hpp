#pragma once

#include <vector>

namespace eitsim {

struct DecayPoint {
  double t;
  double y;
  /// Standard error of y; zero or negative means unknown.
  double err = 0.0;
};

struct DecayFit {
  double tau;
  double amplitude;
  double tau_error;
  /// 95% confidence interval for tau.
  double tau_low;
  double tau_high;
  double chi2;
};

/// y = A·exp(−t/τ) by weighted linear least squares on ln y (weights
/// (y/err)²). With unknown errors the points are weighted equally and the
/// covariance is scaled by the residual variance.
DecayFit fit_exponential_decay(const std::vector<DecayPoint>& points);

}  // namespace eitsim
