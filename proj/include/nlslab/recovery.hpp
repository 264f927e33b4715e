#pragma once

#include <vector>

#include "nlslab/scattering.hpp"

namespace nlslab {

// Probe-width selection rules, one per reconstruction regime. `distance` is
// the measured operator distance and must be small (< 1/2); `norm_budget`
// bounds the coefficient norms entering the stability constants.
enum class SigmaMode { holder, log_endpoint, modified };

// Default smoothing exponent for the holder rule at a given nonlinearity
// power: (1 - 2/p)/2.
double default_holder_s(double p);

double choose_sigma(double distance, double norm_budget, SigmaMode mode, double s = 0.25);

struct PointEstimate {
  double x0 = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  double estimate = 0.0;        // recovered value at x0
  double imag_residual = 0.0;   // leftover imaginary part, same normalization
  double T_final = 0.0;
  double gap = 0.0;
  bool small_data = true;
};

// Pointwise reconstruction from the standard scattering map with Gaussian
// probe (sigma, x0) at amplitude eps. Requires p > 2 (uses lambda_p).
// estimate = Re i<S(eps phi) - eps phi, eps phi> / (eps^{p+2} sigma^3 lambda_p).
PointEstimate recover_point_holder(const SpectralOps& ops, const NonlinearitySpec& nl,
                                   const SolverConfig& solver, const ScatterSchedule& sched,
                                   const ProbeSpec& probe, double eps);

// Cubic endpoint (p = 2): logarithmic normalization
// estimate = Re i<...> / (eps^4 2^{-1/2} sigma^3 |log sigma|), valid for
// sigma < 1/2 (SigmaTooLarge otherwise).
PointEstimate recover_point_log(const SpectralOps& ops, const NonlinearitySpec& nl,
                                const SolverConfig& solver, const ScatterSchedule& sched,
                                const ProbeSpec& probe, double eps);

// Frequency profile of the unit Gaussian probe: sigma*sqrt(2)*exp(-sigma^2
// xi^2) * exp(-i x0 xi) on the grid's FFT-ordered frequencies.
Field unit_probe_spectrum(const Grid& g, const ProbeSpec& probe);

// <w, phat> and <|w|^2 w, phat> against the analytic probe spectrum,
// trapezoid in d(xi) over all modes.
Complex pair_with_probe_spectrum(const Grid& g, const Field& w, const ProbeSpec& probe);
Complex pair_cubic_with_probe_spectrum(const Grid& g, const Field& w, const ProbeSpec& probe);

// Difference reconstruction from two modified maps (perturbed cubic only):
// estimate of (a - b)(x0) with the cubic log-correction removed,
//   M = <w_a - w_b, phat> - (2i)^{-1} log(1 + 1/(2 eps)) <|w_a|^2 w_a - |w_b|^2 w_b, phat>,
//   estimate = Re(i M) / (eps^3 2^{-1/2} sigma^3 |log sigma|).
PointEstimate recover_difference_modified(const SpectralOps& ops, const NonlinearitySpec& nl_a,
                                          const NonlinearitySpec& nl_b,
                                          const SolverConfig& solver,
                                          const ScatterSchedule& sched, const ProbeSpec& probe,
                                          double eps);

// Same normalization applied to a pair of standard maps: the free parts
// cancel in the difference, so this needs only S_a(eps phi) and S_b(eps phi).
double normalized_difference(const Grid& g, const Field& u_plus_a, const Field& u_plus_b,
                             const ProbeSpec& probe, double eps, double p);

struct RecoveryReport {
  double sigma = 0.0;
  double eps = 0.0;
  std::vector<PointEstimate> points;
  std::vector<double> truth;
  double sup_error = 0.0;
};

}  // namespace nlslab
