#include <doctest.h>

#include <cmath>

#include "nlslab/coefficient.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/nls.hpp"
#include "nlslab/scattering.hpp"
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

TEST_CASE("zero-coefficient scattering is the exact identity") {
  const Grid g = make_grid(256, 64.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, CoefficientSpec{});
  SolverConfig cfg;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.3});
  ScatterSchedule sched;
  sched.T0 = 8.0;
  const ScatterRecord rec = scattering_map(ops, nl, cfg, u0, sched);
  CHECK(rec.converged);
  CHECK((rec.u_plus - u0).abs().maxCoeff() == 0.0);
  CHECK(rec.T_final == 8.0);
  CHECK(rec.horizons.size() == 1);
  CHECK(rec.gaps.empty());
}

TEST_CASE("doubling horizons produce decreasing gaps on small data") {
  const Grid g = make_grid(2048, 512.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.3, 1.0, 0.0));
  SolverConfig cfg;
  cfg.dt = 0.01;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.05});
  ScatterSchedule sched;
  sched.T0 = 8.0;
  sched.T_max = 128.0;
  sched.tol = 1e-6;
  sched.min_gaps = 3;
  const ScatterRecord rec = scattering_map(ops, nl, cfg, u0, sched);

  CHECK(rec.converged);
  CHECK(rec.small_data);
  CHECK(rec.mass_drift < 1e-10);
  REQUIRE(rec.gaps.size() >= 3);
  for (size_t i = 1; i < rec.gaps.size(); ++i) CHECK(rec.gaps[i] < rec.gaps[i - 1]);
  CHECK(rec.gaps.back() < 1e-6);
  CHECK(rec.T_final == 64.0);
  // The map moved the state away from the identity by a measurable amount.
  CHECK(l2_norm(g, rec.u_plus - u0) > 1e-8);
}

TEST_CASE("fixed-horizon schedule accepts unconditionally at T_max") {
  const Grid g = make_grid(1024, 128.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.3, 1.0, 0.0));
  SolverConfig cfg;
  cfg.dt = 0.01;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.05});
  ScatterSchedule sched;
  sched.T0 = 4.0;
  sched.T_max = 8.0;
  sched.tol = 1e30;
  sched.min_gaps = 1;
  const ScatterRecord rec = scattering_map(ops, nl, cfg, u0, sched);
  CHECK(rec.converged);
  CHECK(rec.T_final == 8.0);
  CHECK(rec.gaps.size() == 1);
}

TEST_CASE("an unreachable tolerance reports no convergence") {
  const Grid g = make_grid(512, 64.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.5, 1.0, 0.0));
  SolverConfig cfg;
  cfg.dt = 0.01;
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.1});
  ScatterSchedule sched;
  sched.T0 = 1.0;
  sched.T_max = 2.0;
  sched.tol = 1e-14;
  CHECK_ERROR_CODE(scattering_map(ops, nl, cfg, u0, sched), NoConvergence);

  sched.T0 = -1.0;
  CHECK_ERROR_CODE(scattering_map(ops, nl, cfg, u0, sched), InvalidArgument);
  sched.T0 = 4.0;  // T0 > T_max
  CHECK_ERROR_CODE(scattering_map(ops, nl, cfg, u0, sched), InvalidArgument);
  sched.T_max = 8.0;
  sched.tol = 1e-6;
  cfg.dt = 0.3;  // T0 = 4 is not a multiple
  CHECK_ERROR_CODE(scattering_map(ops, nl, cfg, u0, sched), InvalidArgument);
}

TEST_CASE("modified profile moduli agree with the evolved spectrum") {
  const Grid g = make_grid(1024, 64.0);
  SpectralOps ops(g);
  const NonlinearitySpec nl =
      make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, one_gaussian(0.2, 1.0, 0.0));
  SolverConfig cfg;
  cfg.dt = 0.01;
  const Field u0 = gaussian_probe(g, ProbeSpec{0.5, 0.0, 0.05});
  ScatterSchedule sched;
  sched.T0 = 2.0;
  sched.T_max = 8.0;
  sched.tol = 1e30;
  sched.min_gaps = 1;
  const ModScatterRecord rec = modified_scattering_map(ops, nl, cfg, u0, sched);
  CHECK(rec.converged);
  CHECK(rec.T_final == 4.0);
  CHECK(rec.small_data);
  CHECK(rec.mass_drift < 1e-8);

  // The profile only rotates phases of the evolved spectrum.
  const Field ut = evolve(ops, nl, cfg, u0, rec.T_final).u;
  const Field uhat = ops.spectrum(ut);
  CHECK((rec.w_plus.abs() - uhat.abs()).abs().maxCoeff() < 1e-12);

  const NonlinearitySpec power =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.2, 1.0, 0.0));
  CHECK_ERROR_CODE(modified_scattering_map(ops, power, cfg, u0, sched), InvalidArgument);
}

TEST_CASE("weighted norm of the unit probe") {
  const Grid g = make_grid(1024, 40.0);
  const Field u = gaussian_probe(g, ProbeSpec{1.0, 0.0, 1.0});
  // sqrt( sqrt(2 pi) (sigma + 1/(4 sigma) + sigma^3) ) at sigma = 1
  CHECK(h11_norm(g, u) == doctest::Approx(2.374850230629239).epsilon(1e-9));
}

TEST_CASE("probe modulation shifts spectral content") {
  const Grid g = make_grid(1024, 60.0);
  const ProbeSpec base{1.0, 0.0, 1.0};
  const Field still = build_probe(g, ModulatedProbe{base, 0.0});
  CHECK((still - gaussian_probe(g, base)).abs().maxCoeff() == 0.0);

  const double v = 2.0;
  const Field moving = build_probe(g, ModulatedProbe{base, v});
  CHECK((moving.abs() - still.abs()).abs().maxCoeff() < 1e-15);
  const Complex overlap = inner(g, moving, still);
  const double normsq = std::sqrt(kTwoPi);  // ||phi||^2 for sigma = eps = 1
  CHECK(std::abs(overlap) / normsq == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("operator distance vanishes only for identical dynamics") {
  const Grid g = make_grid(1024, 128.0);
  SpectralOps ops(g);
  const CoefficientSpec a = one_gaussian(0.3, 1.0, 0.0);
  const NonlinearitySpec nl_a = make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, a);
  const NonlinearitySpec nl_b =
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, a.scaled(1.5));
  SolverConfig cfg;
  cfg.dt = 0.01;
  ScatterSchedule sched;
  sched.T0 = 4.0;
  sched.T_max = 8.0;
  sched.tol = 1e30;
  sched.min_gaps = 1;
  const std::vector<ModulatedProbe> probes = {{ProbeSpec{1.0, 0.0, 0.05}, 0.0}};

  CHECK(operator_distance(ops, nl_a, nl_a, cfg, sched, probes) == 0.0);
  CHECK(operator_distance(ops, nl_a, nl_b, cfg, sched, probes) > 1e-10);
  CHECK_ERROR_CODE(operator_distance(ops, nl_a, nl_b, cfg, sched, {}), EmptyProbeSet);

  const NonlinearitySpec ca = make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, a);
  const NonlinearitySpec cb =
      make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, a.scaled(2.0));
  CHECK(operator_distance(ops, ca, ca, cfg, sched, probes, true) == 0.0);
  CHECK(operator_distance(ops, ca, cb, cfg, sched, probes, true) > 1e-12);
}
