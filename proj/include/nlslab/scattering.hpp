#pragma once

#include <vector>

#include "nlslab/nls.hpp"

namespace nlslab {

// Doubling-horizon schedule: evolve to T0, then keep doubling while the
// Cauchy gap between back-propagated states stays above tol. min_gaps forces
// extra doublings so a gap history exists even when the first gap is tiny.
struct ScatterSchedule {
  double T0 = 8.0;
  double T_max = 4096.0;
  double tol = 1e-6;
  int min_gaps = 1;
};

ScatterSchedule default_schedule(double sigma);  // T0 = 8 max(1, sigma^2), T_max = 512 T0

struct ScatterRecord {
  Field u_plus;                  // e^{-iT Laplacian} u(T) at the accepted horizon
  std::vector<double> horizons;  // T0, 2T0, 4T0, ...
  std::vector<double> gaps;      // L2 gaps between consecutive back-propagated states
  double T_final = 0.0;
  bool converged = false;
  bool small_data = true;
  double mass_drift = 0.0;
};

// u_plus = lim_T e^{-iT Laplacian} u(T) for i u_t = -u_xx + V u. Zero
// coefficient with power nonlinearity short-circuits to the identity map.
// Throws NoConvergence if the gap tolerance is unmet at T_max.
ScatterRecord scattering_map(const SpectralOps& ops, const NonlinearitySpec& nl,
                             const SolverConfig& cfg, const Field& u0,
                             const ScatterSchedule& sched);

struct ModScatterRecord {
  Field w_plus;                  // frequency-side profile, FFT-ordered xi lattice
  std::vector<double> horizons;
  std::vector<double> gaps;      // sup over |xi| <= xi_max/2 of |w(2T) - w(T)|
  double T_final = 0.0;
  bool converged = false;
  bool small_data = true;
  double mass_drift = 0.0;
};

// Modified profile w(T, xi) = exp(i Phi(T, xi)) * F[e^{-iT Laplacian} u(T)](xi)
// with Phi(T, xi) = int_0^T |F[e^{-is Laplacian} u(s)](xi)|^2 / (2s+1) ds
// accumulated by trapezoid on the dt lattice. Requires perturbed_cubic.
ModScatterRecord modified_scattering_map(const SpectralOps& ops, const NonlinearitySpec& nl,
                                         const SolverConfig& cfg, const Field& u0,
                                         const ScatterSchedule& sched);

// H^{1,1} norm (||u||_2^2 + ||u_x||_2^2 + ||x u||_2^2)^{1/2}.
double h11_norm(const Grid& g, const Field& u);

// Max over probes of ||S_a(phi) - S_b(phi)||_2 / ||phi||_2 (standard maps)
// or of the trusted-window sup gap of the modified profiles divided by
// ||phi||_2 (modified maps). Probes may carry a plane-wave modulation e^{ivx}.
struct ModulatedProbe {
  ProbeSpec probe;
  double velocity = 0.0;
};

Field build_probe(const Grid& g, const ModulatedProbe& mp);

double operator_distance(const SpectralOps& ops, const NonlinearitySpec& nl_a,
                         const NonlinearitySpec& nl_b, const SolverConfig& cfg,
                         const ScatterSchedule& sched, const std::vector<ModulatedProbe>& probes,
                         bool modified = false);

}  // namespace nlslab
