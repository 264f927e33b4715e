#include "nlslab/recovery.hpp"

#include <cmath>

#include "nlslab/kernels.hpp"

namespace nlslab {

namespace {

constexpr double kMinNormalizer = 1e-300;
// Coefficient of sigma^3 |log sigma| in the cubic response of a Gaussian
// probe: K_hat's log slope 2^{-1/2} times the sqrt(2 pi) from undoing the
// transform of the coefficient. See kernel_K_hat.
constexpr double kSqrtPi = 1.7724538509055160273;

double holder_normalizer(double p, double sigma, double eps) {
  return std::pow(eps, p + 2.0) * sigma * sigma * sigma * lambda_p(p);
}

double log_normalizer(double sigma, double eps) {
  require(sigma < 0.5, ErrorCode::SigmaTooLarge,
          "log normalization needs sigma < 1/2");
  const double e2 = eps * eps;
  return e2 * e2 * kSqrtPi * sigma * sigma * sigma * std::abs(std::log(sigma));
}

void check_normalizer(double den) {
  require(std::isfinite(den) && std::abs(den) >= kMinNormalizer,
          ErrorCode::NormalizationUnderflow, "probe normalization underflows");
}

// A horizon T is meaningful only while the dispersed probe stays clear of the
// periodic wrap. Modes with |xi| <= 4/sigma (spectral mass above ~1e-7 of the
// probe) travel at most 8T/sigma by time T.
void check_window(const Grid& g, double sigma, double T) {
  require(g.length >= 8.0 * std::max(sigma, T / sigma), ErrorCode::TruncationRisk,
          "domain too short for the realized scattering horizon");
}

PointEstimate recover_point(const SpectralOps& ops, const NonlinearitySpec& nl,
                            const SolverConfig& solver, const ScatterSchedule& sched,
                            const ProbeSpec& probe, double eps, bool log_mode) {
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::InvalidArgument,
          "probe amplitude must be positive");
  const Grid& g = ops.grid();
  const double p = nl.effective_p();
  double den;
  if (log_mode) {
    require(p == 2.0, ErrorCode::InvalidArgument,
            "log normalization applies to the cubic endpoint only");
    den = log_normalizer(probe.sigma, eps);
  } else {
    require(p > 2.0, ErrorCode::PoleAtTwo,
            "holder normalization degenerates at p = 2; use the log variant");
    den = holder_normalizer(p, probe.sigma, eps);
  }
  check_normalizer(den);

  ProbeSpec scaled = probe;
  scaled.eps = eps;
  const Field u0 = gaussian_probe(g, scaled);
  ScatterRecord rec = scattering_map(ops, nl, solver, u0, sched);
  check_window(g, probe.sigma, rec.T_final);

  const Complex val = Complex(0, 1) * inner(g, rec.u_plus - u0, u0);

  PointEstimate out;
  out.x0 = probe.x0;
  out.sigma = probe.sigma;
  out.eps = eps;
  out.estimate = val.real() / den;
  out.imag_residual = val.imag() / den;
  out.T_final = rec.T_final;
  out.gap = rec.gaps.empty() ? 0.0 : rec.gaps.back();
  out.small_data = rec.small_data;
  return out;
}

}  // namespace

double default_holder_s(double p) {
  require(p > 2.0 && p <= 4.0, ErrorCode::InvalidArgument,
          "holder exponent defined for p in (2,4]");
  return 0.5 * (1.0 - 2.0 / p);
}

double choose_sigma(double distance, double norm_budget, SigmaMode mode, double s) {
  require(std::isfinite(distance) && distance > 0.0, ErrorCode::InvalidArgument,
          "operator distance must be positive");
  require(distance < 0.5, ErrorCode::DistanceNotSmall,
          "sigma selection assumes operator distance < 1/2");
  require(norm_budget >= 0.0 && std::isfinite(norm_budget), ErrorCode::InvalidArgument,
          "norm budget must be nonnegative");
  const double base = distance / (1.0 + norm_budget);
  double expo;
  switch (mode) {
    case SigmaMode::holder:
      require(s > 0.0 && s <= 1.0, ErrorCode::InvalidArgument,
              "smoothing exponent must lie in (0,1]");
      expo = 1.0 / (2.0 + s);
      break;
    case SigmaMode::log_endpoint:
      expo = 0.5;
      break;
    case SigmaMode::modified:
      expo = 2.0 / 29.0;
      break;
    default:
      fail(ErrorCode::InvalidArgument, "unknown sigma mode");
  }
  return std::pow(base, expo);
}

PointEstimate recover_point_holder(const SpectralOps& ops, const NonlinearitySpec& nl,
                                   const SolverConfig& solver, const ScatterSchedule& sched,
                                   const ProbeSpec& probe, double eps) {
  return recover_point(ops, nl, solver, sched, probe, eps, false);
}

PointEstimate recover_point_log(const SpectralOps& ops, const NonlinearitySpec& nl,
                                const SolverConfig& solver, const ScatterSchedule& sched,
                                const ProbeSpec& probe, double eps) {
  return recover_point(ops, nl, solver, sched, probe, eps, true);
}

Field unit_probe_spectrum(const Grid& g, const ProbeSpec& probe) {
  require(probe.sigma > 0.0 && std::isfinite(probe.sigma), ErrorCode::InvalidArgument,
          "probe width must be positive");
  const double s2 = probe.sigma * probe.sigma;
  Field phat(g.n);
  for (int k = 0; k < g.n; ++k) {
    const double xi = g.xi[k];
    phat[k] = probe.sigma * std::sqrt(2.0) * std::exp(-s2 * xi * xi) *
              std::exp(Complex(0.0, -probe.x0 * xi));
  }
  return phat;
}

Complex pair_with_probe_spectrum(const Grid& g, const Field& w, const ProbeSpec& probe) {
  const Field phat = unit_probe_spectrum(g, probe);
  const double dxi = kTwoPi / g.length;
  return (w * phat.conjugate()).sum() * dxi;
}

Complex pair_cubic_with_probe_spectrum(const Grid& g, const Field& w, const ProbeSpec& probe) {
  const Field phat = unit_probe_spectrum(g, probe);
  const double dxi = kTwoPi / g.length;
  return (w.abs2() * w * phat.conjugate()).sum() * dxi;
}

PointEstimate recover_difference_modified(const SpectralOps& ops, const NonlinearitySpec& nl_a,
                                          const NonlinearitySpec& nl_b,
                                          const SolverConfig& solver,
                                          const ScatterSchedule& sched, const ProbeSpec& probe,
                                          double eps) {
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::InvalidArgument,
          "probe amplitude must be positive");
  require(nl_a.kind == NonlinearityKind::perturbed_cubic &&
              nl_b.kind == NonlinearityKind::perturbed_cubic,
          ErrorCode::InvalidArgument,
          "difference reconstruction uses the perturbed cubic flow");
  const Grid& g = ops.grid();
  // The difference pairing is cubic in eps, one power below the single-map
  // normalization.
  const double norm3 = log_normalizer(probe.sigma, eps) / eps;
  check_normalizer(norm3);

  ProbeSpec scaled = probe;
  scaled.eps = eps;
  const Field u0 = gaussian_probe(g, scaled);
  ModScatterRecord ra = modified_scattering_map(ops, nl_a, solver, u0, sched);
  ModScatterRecord rb = modified_scattering_map(ops, nl_b, solver, u0, sched);
  check_window(g, probe.sigma, std::max(ra.T_final, rb.T_final));

  const Complex lin = pair_with_probe_spectrum(g, ra.w_plus - rb.w_plus, probe);
  const Complex cub = pair_cubic_with_probe_spectrum(g, ra.w_plus, probe) -
                      pair_cubic_with_probe_spectrum(g, rb.w_plus, probe);
  const double log_corr = std::log1p(1.0 / (2.0 * eps));
  const Complex M = lin - Complex(0.0, -0.5) * log_corr * cub;  // (2i)^{-1} = -i/2
  const Complex val = Complex(0, 1) * M;

  PointEstimate out;
  out.x0 = probe.x0;
  out.sigma = probe.sigma;
  out.eps = eps;
  out.estimate = val.real() / norm3;
  out.imag_residual = val.imag() / norm3;
  out.T_final = std::max(ra.T_final, rb.T_final);
  out.gap = std::max(ra.gaps.empty() ? 0.0 : ra.gaps.back(),
                     rb.gaps.empty() ? 0.0 : rb.gaps.back());
  out.small_data = ra.small_data && rb.small_data;
  return out;
}

double normalized_difference(const Grid& g, const Field& u_plus_a, const Field& u_plus_b,
                             const ProbeSpec& probe, double eps, double p) {
  const double den = (p == 2.0) ? log_normalizer(probe.sigma, eps)
                                : holder_normalizer(p, probe.sigma, eps);
  check_normalizer(den);
  ProbeSpec scaled = probe;
  scaled.eps = eps;
  const Field u0 = gaussian_probe(g, scaled);
  const Complex val = Complex(0, 1) * inner(g, u_plus_a - u_plus_b, u0);
  return val.real() / den;
}

}  // namespace nlslab
