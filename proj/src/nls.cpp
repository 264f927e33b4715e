#include "nlslab/nls.hpp"

#include <cmath>

namespace nlslab {

void NonlinearitySpec::validate() const {
  if (kind == NonlinearityKind::inhomogeneous_power) {
    require(p >= 2.0, ErrorCode::PoleAtTwo,
            "power nonlinearity requires p >= 2, got " + std::to_string(p));
    require(p <= 4.0, ErrorCode::UnsupportedExponent,
            "power nonlinearity requires p <= 4, got " + std::to_string(p));
  }
  require(coeff.zero || coeff.values.size() > 0, ErrorCode::InvalidArgument,
          "coefficient has no samples");
}

double default_dt(double sigma) { return std::min(0.01, sigma * sigma / 10.0); }

namespace {

// |u|^p with cheap paths for the common exponents
void modulus_power(const Field& u, double p, RealField& m) {
  m = u.abs2();
  if (p == 2.0) return;
  if (p == 4.0) {
    m = m.square();
  } else if (p == 3.0) {
    m = m * m.sqrt();
  } else {
    m = m.pow(0.5 * p);
  }
}

}  // namespace

void nonlinear_substep(const NonlinearitySpec& nl, double dt, Field& u) {
  if (nl.trivial() || dt == 0.0) return;
  const int n = static_cast<int>(u.size());
  static thread_local RealField m;
  if (nl.kind == NonlinearityKind::inhomogeneous_power) {
    modulus_power(u, nl.p, m);
    for (int j = 0; j < n; ++j) {
      double th = -dt * nl.coeff.values[j] * m[j];
      u[j] *= Complex(std::cos(th), std::sin(th));
    }
  } else {
    m = u.abs2();
    if (nl.coeff.zero) {
      for (int j = 0; j < n; ++j) {
        double th = -dt * m[j];
        u[j] *= Complex(std::cos(th), std::sin(th));
      }
    } else {
      for (int j = 0; j < n; ++j) {
        double th = -dt * (1.0 + nl.coeff.values[j]) * m[j];
        u[j] *= Complex(std::cos(th), std::sin(th));
      }
    }
  }
}

Field strang_step(const SpectralOps& ops, const NonlinearitySpec& nl, double dt, const Field& u) {
  Field v = ops.free_propagate(u, 0.5 * dt);
  nonlinear_substep(nl, dt, v);
  ops.free_propagate_inplace(v, 0.5 * dt);
  return v;
}

EvolveResult evolve(const SpectralOps& ops, const NonlinearitySpec& nl, const SolverConfig& cfg,
                    const Field& u0, double t_final) {
  nl.validate();
  require(cfg.dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
  require(t_final >= 0.0, ErrorCode::InvalidArgument, "t_final must be nonnegative");
  require(static_cast<int>(u0.size()) == ops.grid().n, ErrorCode::InvalidArgument,
          "field/grid size mismatch");

  const long steps = std::lround(t_final / cfg.dt);
  require(std::abs(steps * cfg.dt - t_final) <= 1e-9 * std::max(1.0, t_final),
          ErrorCode::InvalidArgument, "t_final must lie on the dt lattice");

  EvolveResult res;
  res.steps = steps;
  const double mass0 = l2_norm(ops.grid(), u0);
  res.small_data = mass0 < cfg.small_data_eta;
  res.u = u0;
  if (steps == 0) return res;

  ops.free_propagate_inplace(res.u, 0.5 * cfg.dt);
  for (long k = 0; k < steps; ++k) {
    nonlinear_substep(nl, cfg.dt, res.u);
    ops.free_propagate_inplace(res.u, k + 1 < steps ? cfg.dt : 0.5 * cfg.dt);
  }

  if (mass0 > 0.0) {
    res.mass_drift = std::abs(l2_norm(ops.grid(), res.u) - mass0) / mass0;
    require(res.mass_drift <= cfg.mass_drift_tol, ErrorCode::MassDrift,
            "relative L2 drift " + std::to_string(res.mass_drift));
  }
  return res;
}

}  // namespace nlslab
