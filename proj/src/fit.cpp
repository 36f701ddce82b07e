#include "eitsim/fit.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "eitsim/error.hpp"

namespace eitsim {

DecayFit fit_exponential_decay(const std::vector<DecayPoint>& points) {
  if (points.size() < 2) throw DomainError("decay fit needs at least two points");
  const std::size_t n = points.size();
  std::vector<double> x(n), ly(n), w(n);
  bool have_errors = true;
  for (const auto& p : points) have_errors = have_errors && p.err > 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    if (!(p.y > 0.0) || !std::isfinite(p.y) || !std::isfinite(p.t)) {
      throw DomainError("decay fit needs finite, strictly positive signals");
    }
    x[i] = p.t;
    ly[i] = std::log(p.y);
    // σ(ln y) ≈ err / y
    w[i] = have_errors ? (p.y / p.err) * (p.y / p.err) : 1.0;
  }

  gsl_set_error_handler_off();
  double c0, c1, cov00, cov01, cov11, chisq;
  const int status = gsl_fit_wlinear(x.data(), 1, w.data(), 1, ly.data(), 1, n, &c0, &c1, &cov00, &cov01, &cov11,
                                     &chisq);
  std::vector<double> residuals(n);
  for (std::size_t i = 0; i < n; ++i) residuals[i] = ly[i] - (c0 + c1 * x[i]);
  if (status != GSL_SUCCESS || !std::isfinite(c1) || !std::isfinite(cov11)) {
    throw FitError("weighted least squares failed (singular system)", residuals);
  }
  if (!(c1 < 0.0)) throw FitError("signal does not decay; no positive time constant", residuals);

  const auto dof = static_cast<double>(n) - 2.0;
  if (!have_errors && dof > 0.0) cov11 *= chisq / dof;
  if (!have_errors && dof <= 0.0) cov11 = 0.0;

  DecayFit f{};
  f.tau = -1.0 / c1;
  f.amplitude = std::exp(c0);
  const double slope_err = std::sqrt(std::max(cov11, 0.0));
  f.tau_error = slope_err / (c1 * c1);
  const double q = dof > 0.0 && !have_errors ? gsl_cdf_tdist_Pinv(0.975, dof) : 1.959963984540054;
  const double s_lo = c1 - q * slope_err;
  const double s_hi = c1 + q * slope_err;
  f.tau_low = -1.0 / s_lo;
  f.tau_high = s_hi < 0.0 ? -1.0 / s_hi : std::numeric_limits<double>::infinity();
  f.chi2 = chisq;
  return f;
}

}  // namespace eitsim
