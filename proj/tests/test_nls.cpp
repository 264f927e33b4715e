#include <doctest.h>

#include <cmath>

#include "nlslab/coefficient.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/nls.hpp"
#include "test_util.hpp"

using namespace nlslab;

namespace {

CoefficientSpec one_gaussian(double h, double w, double c) {
  CoefficientSpec s;
  s.terms.push_back({BumpTerm::Kind::gaussian, h, w, c});
  return s;
}

NonlinearitySpec make_spec(NonlinearityKind kind, double p, const Grid& g,
                           const CoefficientSpec& spec) {
  NonlinearitySpec nl;
  nl.kind = kind;
  nl.p = p;
  nl.coeff = sample_coefficient(g, spec);
  nl.validate();
  return nl;
}

}  // namespace

TEST_CASE("nonlinear substep is an exact local phase rotation") {
  const Grid g = make_grid(64, 32.0);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.3, 2.0, 0.0));
  const Field before = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.7});
  Field after = before;
  const double dt = 0.2;
  nonlinear_substep(nl, dt, after);

  double worst = 0.0, mod = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double th = -dt * nl.coeff.values[j] * std::pow(std::abs(before[j]), 3.0);
    const Complex expect = before[j] * Complex(std::cos(th), std::sin(th));
    worst = std::max(worst, std::abs(after[j] - expect));
    mod = std::max(mod, std::abs(std::abs(after[j]) - std::abs(before[j])));
  }
  CHECK(worst < 1e-13);
  CHECK(mod < 1e-14);

  // Zero step and trivial nonlinearity are identities.
  Field same = before;
  nonlinear_substep(nl, 0.0, same);
  CHECK((same - before).abs().maxCoeff() == 0.0);
  const NonlinearitySpec zero =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, CoefficientSpec{});
  CHECK(zero.trivial());
  Field still = before;
  nonlinear_substep(zero, dt, still);
  CHECK((still - before).abs().maxCoeff() == 0.0);
}

TEST_CASE("perturbed cubic flow equals the power flow with shifted coefficient") {
  const Grid g = make_grid(1024, 80.0);
  SpectralOps ops(g);
  const CoefficientSpec a = one_gaussian(0.4, 1.5, 0.5);
  const NonlinearitySpec cubic = make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, a);

  NonlinearitySpec shifted;
  shifted.kind = NonlinearityKind::inhomogeneous_power;
  shifted.p = 2.0;
  shifted.coeff.spec = a;
  shifted.coeff.zero = false;
  shifted.coeff.values = 1.0 + sample_coefficient(g, a).values;
  shifted.validate();

  SolverConfig cfg;
  cfg.dt = 0.0125;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.5});
  const EvolveResult ra = evolve(ops, cubic, cfg, u0, 0.5);
  const EvolveResult rb = evolve(ops, shifted, cfg, u0, 0.5);
  CHECK((ra.u - rb.u).abs().maxCoeff() < 1e-13);
  CHECK(ra.steps == 40);

  // The plain cubic (zero perturbation) is still a nontrivial flow.
  const NonlinearitySpec plain =
      make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, CoefficientSpec{});
  CHECK_FALSE(plain.trivial());
  const EvolveResult rc = evolve(ops, plain, cfg, u0, 0.5);
  CHECK((rc.u - ops.free_propagate(u0, 0.5)).abs().maxCoeff() > 1e-6);
}

TEST_CASE("zero coefficient power flow reduces to free propagation") {
  const Grid g = make_grid(1024, 80.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, CoefficientSpec{});
  SolverConfig cfg;
  cfg.dt = 0.01;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 1.0});
  const EvolveResult r = evolve(ops, nl, cfg, u0, 2.0);
  CHECK((r.u - ops.free_propagate(u0, 2.0)).abs().maxCoeff() < 1e-12);
  CHECK(r.mass_drift < 1e-12);
}

TEST_CASE("strang stepping converges at second order") {
  const Grid g = make_grid(1024, 80.0);
  SpectralOps ops(g);
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.8});
  const double T = 1.0;

  auto order_for = [&](const NonlinearitySpec& nl) {
    SolverConfig cfg;
    cfg.dt = 0.04;
    const Field u1 = evolve(ops, nl, cfg, u0, T).u;
    cfg.dt = 0.02;
    const Field u2 = evolve(ops, nl, cfg, u0, T).u;
    cfg.dt = 0.01;
    const Field u3 = evolve(ops, nl, cfg, u0, T).u;
    const double e1 = l2_norm(g, u1 - u2);
    const double e2 = l2_norm(g, u2 - u3);
    return std::log2(e1 / e2);
  };

  const double o_cubic = order_for(
      make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, one_gaussian(0.3, 1.0, 0.0)));
  CHECK(o_cubic == doctest::Approx(2.0).epsilon(0.1));

  const double o_power = order_for(
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.5, 1.5, 0.0)));
  CHECK(o_power == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("evolution demands a lattice-aligned final time") {
  const Grid g = make_grid(64, 32.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.1, 1.0, 0.0));
  SolverConfig cfg;
  cfg.dt = 0.1;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.05});
  CHECK_ERROR_CODE(evolve(ops, nl, cfg, u0, 0.35), InvalidArgument);
  CHECK_ERROR_CODE(evolve(ops, nl, cfg, u0, -0.1), InvalidArgument);
  cfg.dt = -0.1;
  CHECK_ERROR_CODE(evolve(ops, nl, cfg, u0, 0.1), InvalidArgument);

  cfg.dt = 0.1;
  const EvolveResult r = evolve(ops, nl, cfg, u0, 0.0);
  CHECK(r.steps == 0);
  CHECK((r.u - u0).abs().maxCoeff() == 0.0);
  CHECK(r.small_data);  // ||u0|| well below the default eta

  const Field big = gaussian_probe(g, ProbeSpec{1.0, 0.0, 1.0});
  CHECK_FALSE(evolve(ops, nl, cfg, big, 0.0).small_data);
}

TEST_CASE("nonlinearity validation bounds the exponent") {
  const Grid g = make_grid(64, 32.0);
  NonlinearitySpec nl;
  nl.kind = NonlinearityKind::inhomogeneous_power;
  nl.coeff = sample_coefficient(g, one_gaussian(0.1, 1.0, 0.0));
  nl.p = 1.5;
  CHECK_ERROR_CODE(nl.validate(), PoleAtTwo);
  nl.p = 4.5;
  CHECK_ERROR_CODE(nl.validate(), UnsupportedExponent);
  nl.p = 2.0;
  CHECK_NOTHROW(nl.validate());
  CHECK(default_dt(0.1) == doctest::Approx(0.001));
  CHECK(default_dt(2.0) == doctest::Approx(0.01));
}
