#include "nlslab/kernels.hpp"

#include <cmath>

namespace nlslab {

namespace {
constexpr double kHalfPi = 1.570796326794896619;
inline double min_image(double d, double L) { return d - L * std::round(d / L); }
}  // namespace

double lambda_p(double p) {
  require(p > 2.0, ErrorCode::PoleAtTwo,
          "lambda(p) diverges as p -> 2; got p = " + std::to_string(p));
  require(p <= 4.0, ErrorCode::UnsupportedExponent, "lambda(p) defined for p <= 4");
  const double num = std::tgamma(0.25 * p - 0.5);
  const double den = std::tgamma(0.25 * p);
  return kPi / std::sqrt(p + 2.0) * num / den;
}

double lambda_p_quadrature(double p, const QuadratureConfig& cfg) {
  require(p > 2.0 && p <= 4.0, ErrorCode::InvalidArgument,
          "lambda quadrature defined for p in (2,4]");
  auto slice = [&](double t) {
    const double spread = 1.0 + t * t;
    const double rate = (p + 2.0) / (4.0 * spread);
    const double x_cap = std::sqrt(745.0 / rate);
    const double amp = std::pow(spread, -0.25 * (p + 2.0));
    if (amp == 0.0) return 0.0;
    // Inner tolerance tracks the slice magnitude (~ sqrt(spread)) so the
    // relative accuracy stays uniform along the tail.
    QuadratureConfig inner_cfg = cfg;
    inner_cfg.abs_tol = 1e-11 * std::sqrt(spread);
    const double half =
        integrate<double>([&](double x) { return std::exp(-rate * x * x); }, 0.0, x_cap,
                          inner_cfg);
    return amp * 2.0 * half;
  };
  // The slice decays like t^{-p/2}, too slowly for the tangent map; t = sinh v
  // makes the integrand fall off like exp{-(p/2-1)v}. Run v out 15 decades of
  // decay, capped just under cosh overflow (the cap only binds for p < 2.1,
  // where the constant itself blows up).
  const double decay = 0.5 * p - 1.0;
  const double v_max = std::min(700.0, std::log(2.0) + 15.0 * std::log(10.0) / decay);
  return integrate<double>(
      [&](double v) { return slice(std::sinh(v)) * std::cosh(v); }, 0.0, v_max, cfg);
}

double kernel_K(double x, const QuadratureConfig& cfg) {
  require(std::isfinite(x), ErrorCode::InvalidArgument, "kernel argument must be finite");
  const double x2 = x * x;
  auto f = [x2](double theta) {
    double c = std::cos(theta);
    return std::exp(-x2 * c * c);
  };
  return integrate<double>(f, 0.0, kHalfPi, cfg);
}

double kernel_K_hat(double xi, const QuadratureConfig& cfg) {
  xi = std::abs(xi);
  require(xi >= 1e-12, ErrorCode::DivergentAtZero,
          "K_hat diverges logarithmically at xi = 0");
  const double q = 0.25 * xi * xi;
  if (q >= 745.0) return 0.0;  // integrand underflows everywhere
  // exp(-q cosh^2 v) is negligible once cosh v >= sqrt(745/q)
  const double ch = std::sqrt(745.0 / q);
  const double v_max = std::acosh(std::max(1.5, ch));
  auto f = [q](double v) {
    double c = std::cosh(v);
    return std::exp(-q * c * c);
  };
  return integrate<double>(f, 0.0, v_max, cfg) / std::sqrt(2.0);
}

double born_functional(const Grid& g, const Coefficient& a, const ProbeSpec& probe, double p,
                       double t_max, const QuadratureConfig& cfg) {
  require(p >= 2.0 && p <= 4.0, ErrorCode::UnsupportedExponent,
          "dispersive exponent must lie in [2, 4]");
  require(probe.sigma > 0.0, ErrorCode::InvalidArgument, "probe width must be positive");
  require(a.zero || a.values.size() == g.n, ErrorCode::InvalidArgument,
          "coefficient sampled on a different grid");
  if (a.zero || probe.eps == 0.0) return 0.0;

  const double s2 = probe.sigma * probe.sigma;
  const double s4 = s2 * s2;
  const double q = p + 2.0;
  const double amp = std::pow(std::abs(probe.eps), q);

  RealField d2(g.n);
  for (int j = 0; j < g.n; ++j) {
    double d = min_image(g.x[j] - probe.x0, g.length);
    d2[j] = d * d;
  }

  // sum_j a_j exp(-(p+2) d_j^2 / (4 sigma^2 beta)) dx, beta = 1 + t^2/sigma^4
  auto x_integral = [&](double t) {
    const double beta = 1.0 + t * t / s4;
    const double peak = std::pow(beta, -0.25 * q);
    const double rate = q / (4.0 * s2 * beta);
    const double cut = 745.0 / rate;
    double acc = 0.0;
    for (int j = 0; j < g.n; ++j) {
      if (d2[j] > cut) continue;
      acc += a.values[j] * std::exp(-rate * d2[j]);
    }
    return amp * peak * acc * g.dx;
  };

  // t = sigma^2 tan(theta); envelope peak = cos^{(p+2)/2} theta < 1e-14 cap
  double theta_cap = std::acos(std::pow(10.0, -28.0 / q));
  if (t_max >= 0.0) theta_cap = std::min(theta_cap, std::atan2(t_max, s2));
  auto f = [&](double theta) {
    double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    double t = s2 * std::tan(theta);
    return x_integral(t) * s2 / (c * c);
  };
  return integrate<double>(f, 0.0, theta_cap, cfg);
}

Complex q_epsilon(const ProbeSpec& probe, double eps, const QuadratureConfig& cfg) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "lower time cutoff must be positive");
  require(probe.sigma > 0.0, ErrorCode::InvalidArgument, "probe width must be positive");
  const double s = probe.sigma;
  const double s2 = s * s;
  const double amp4 = std::pow(probe.eps, 4.0);
  if (amp4 == 0.0) return Complex(0.0, 0.0);

  const double U = s * std::sqrt(8.0 * 745.0);  // Gaussian factor underflows beyond
  const double gauss_rate = 1.0 / (8.0 * s2);
  QuadratureConfig inner = cfg;
  inner.abs_tol = std::min(cfg.abs_tol, 1e-12 * std::max(1.0, s));

  // I(sign, t) = int_R exp(-u^2/(8 s^2) - sign i u^2/(8t)) du (even integrand)
  auto chirp = [&](double sign, double t) {
    const double w = sign / (8.0 * t);
    auto f = [&](double u) -> Complex {
      double u2 = u * u;
      double ph = -w * u2;
      return std::exp(-gauss_rate * u2) * Complex(std::cos(ph), std::sin(ph));
    };
    return 2.0 * integrate<Complex>(f, 0.0, U, inner);
  };

  const double I0sq = 8.0 * kPi * s2;
  auto integrand = [&](double t) -> Complex {
    Complex J = 0.5 * (chirp(+1.0, t) * chirp(-1.0, t) - I0sq);
    return J / (Complex(0.0, 2.0) * t);
  };

  // tail beyond t_hi is O(sigma^6 / t_hi^2), below 1e-13 for this cap
  const double t_hi = std::max(1.0, s2) * 3e6;
  auto g = [&](double theta) -> Complex {
    double c = std::cos(theta);
    if (c <= 0.0) return Complex(0.0, 0.0);
    double t = eps + std::tan(theta);
    return integrand(t) / (c * c);
  };
  const double theta_cap = std::atan(t_hi - eps);
  Complex tint = integrate<Complex>(g, 0.0, theta_cap, cfg);
  return amp4 * std::sqrt(kPi) * s * tint;
}

}  // namespace nlslab
