#include "nlslab/fit.hpp"

#include <algorithm>
#include <cmath>

namespace nlslab {

namespace {

FitResult regress(const std::vector<double>& u, const std::vector<double>& w) {
  const int n = static_cast<int>(u.size());
  double su = 0, sw = 0;
  for (int i = 0; i < n; ++i) {
    su += u[i];
    sw += w[i];
  }
  const double mu = su / n, mw = sw / n;
  double suu = 0, suw = 0, sww = 0;
  for (int i = 0; i < n; ++i) {
    const double du = u[i] - mu, dw = w[i] - mw;
    suu += du * du;
    suw += du * dw;
    sww += dw * dw;
  }
  require(suu > 0.0, ErrorCode::DegenerateFit, "fit: abscissae have no spread");

  FitResult out;
  out.points = n;
  out.slope = suw / suu;
  out.intercept = mw - out.slope * mu;
  if (sww > 0.0) {
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
      const double r = w[i] - (out.intercept + out.slope * u[i]);
      ss_res += r * r;
    }
    out.r2 = 1.0 - ss_res / sww;
  } else {
    out.r2 = 1.0;  // constant data, exactly reproduced by slope 0
  }
  return out;
}

void check_common(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorCode::InvalidArgument, "fit: size mismatch");
  require(x.size() >= 4, ErrorCode::DegenerateFit, "fit: need at least 4 points");
  for (double v : x)
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidArgument,
            "fit: abscissae must be positive and finite");
  for (double v : y)
    require(std::isfinite(v), ErrorCode::InvalidArgument, "fit: ordinates must be finite");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  require(*hi >= 10.0 * *lo, ErrorCode::DegenerateFit,
          "fit: abscissae span less than one decade");
}

}  // namespace

FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  check_common(x, y);
  for (double v : y)
    require(v > 0.0, ErrorCode::InvalidArgument, "fit_power_law: ordinates must be positive");
  std::vector<double> u(x.size()), w(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    u[i] = std::log(x[i]);
    w[i] = std::log(y[i]);
  }
  return regress(u, w);
}

FitResult fit_log_law(const std::vector<double>& x, const std::vector<double>& y) {
  check_common(x, y);
  for (double v : x)
    require(v < 1.0, ErrorCode::InvalidArgument, "fit_log_law: abscissae must lie in (0,1)");
  std::vector<double> u(x.size());
  for (size_t i = 0; i < x.size(); ++i) u[i] = 1.0 / std::abs(std::log(x[i]));
  return regress(u, y);
}

FitResult linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument,
          "linear_regression: need matched arrays with >= 2 points");
  return regress(x, y);
}

}  // namespace nlslab
