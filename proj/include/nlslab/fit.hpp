#pragma once

#include <vector>

#include "nlslab/errors.hpp"

namespace nlslab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Least squares of log y against log x. Requires >= 4 points, positive data,
// and at least one decade of x spread (DegenerateFit otherwise).
FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// Least squares of y against 1/|log x| for x in (0, 1). Same point-count and
// decade-spread requirements as fit_power_law.
FitResult fit_log_law(const std::vector<double>& x, const std::vector<double>& y);

// Unchecked simple regression of y against x (slope/intercept/r^2); used for
// short diagnostic trends that do not meet the fit_* preconditions.
FitResult linear_regression(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlslab
