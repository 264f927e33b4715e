#pragma once

#include "nlslab/coefficient.hpp"
#include "nlslab/grid.hpp"

namespace nlslab {

// i u_t = -u_xx + V(x,|u|) u with
//   inhomogeneous_power: V = a(x) |u|^p,   2 <= p <= 4
//   perturbed_cubic:     V = (1 + a(x)) |u|^2
enum class NonlinearityKind { inhomogeneous_power, perturbed_cubic };

struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::inhomogeneous_power;
  double p = 3.0;  // ignored for perturbed_cubic (effective p = 2)
  Coefficient coeff;

  void validate() const;
  double effective_p() const { return kind == NonlinearityKind::perturbed_cubic ? 2.0 : p; }
  // true when the nonlinear substep is the identity for every state
  bool trivial() const { return kind == NonlinearityKind::inhomogeneous_power && coeff.zero; }
};

struct SolverConfig {
  double dt = 0.01;
  double small_data_eta = 0.1;
  double mass_drift_tol = 1e-8;
};

// default step rule: dt = min(0.01, sigma^2/10) for a probe of width sigma
double default_dt(double sigma);

// Exact pointwise phase rotation u <- exp(-i dt V) u.
void nonlinear_substep(const NonlinearitySpec& nl, double dt, Field& u);

// One Strang step: free(dt/2) o nonlinear(dt) o free(dt/2).
Field strang_step(const SpectralOps& ops, const NonlinearitySpec& nl, double dt, const Field& u);

struct EvolveResult {
  Field u;
  long steps = 0;
  double mass_drift = 0.0;    // relative drift of the L2 norm
  bool small_data = true;     // ||u0||_2 < eta at launch
};

// March u0 to t_final with fixed dt (interior free half-steps fused).
// t_final must sit on the dt lattice. Throws MassDrift if the L2 norm moves
// by more than mass_drift_tol relative.
EvolveResult evolve(const SpectralOps& ops, const NonlinearitySpec& nl, const SolverConfig& cfg,
                    const Field& u0, double t_final);

}  // namespace nlslab
