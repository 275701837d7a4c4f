#pragma once

#include <span>
#include <vector>

namespace sawchan {

double mean(std::span<const double> xs);
/// Sample standard deviation over sqrt(n); 0 for fewer than two samples.
double standard_error(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 1.0; // 1 when y has no variance and the fit is exact
  double residual_rms = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

} // namespace sawchan
