// Acceptance gate: one line per criterion, nonzero exit if any mandatory
// criterion fails. Each criterion owns its wall-clock budget in seconds.
// Usage: acceptance [id...]   (no args: run everything)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlslab/config.hpp"
#include "nlslab/experiments.hpp"
#include "nlslab/kernels.hpp"
#include "nlslab/nls.hpp"
#include "nlslab/recovery.hpp"
#include "nlslab/scattering.hpp"

using namespace nlslab;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Crit {
  bool pass = true;
  std::string notes;
  void expect(const std::string& what, bool ok, double value) {
    if (!ok) pass = false;
    notes += " " + what + "=" + fmt(value) + (ok ? "" : "[FAIL]");
  }
  void info(const std::string& what, double value) {
    notes += " " + what + "=" + fmt(value);
  }
};

ScenarioSummary run_scenario(const json& j, const std::string& subdir) {
  const ExperimentConfig cfg = parse_config(j);
  const std::string dir = "acceptance_out/" + subdir;
  std::filesystem::remove_all(dir);
  return run_experiment(cfg, dir);
}

double stat_of(const ScenarioSummary& s, const std::string& key) {
  const auto it = s.stats.find(key);
  if (it == s.stats.end()) throw std::runtime_error("missing stat: " + key);
  return it->second;
}

const FitResult& fit_of(const ScenarioSummary& s, const std::string& key) {
  const auto it = s.fits.find(key);
  if (it == s.fits.end()) throw std::runtime_error("missing fit: " + key);
  return it->second;
}

bool check_of(const ScenarioSummary& s, const std::string& name) {
  for (const auto& c : s.checks)
    if (c.name == name) return c.passed;
  throw std::runtime_error("missing check: " + name);
}

json gaussian_terms(double h, double w, double c) {
  return json{{"terms", {{{"kind", "gaussian"}, {"height", h}, {"width", w}, {"center", c}}}}};
}

CoefficientSpec one_gaussian(double h, double w, double c) {
  CoefficientSpec s;
  s.terms.push_back({BumpTerm::Kind::gaussian, h, w, c});
  return s;
}

NonlinearitySpec make_spec(NonlinearityKind kind, double p, const Grid& g,
                           const CoefficientSpec& cs) {
  NonlinearitySpec nl;
  nl.kind = kind;
  nl.p = p;
  nl.coeff = sample_coefficient(g, cs);
  return nl;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.string().c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + p.string());
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, got);
  std::fclose(f);
  return out;
}

// 1. Closed-form response constant against brute-force quadrature.
void c1_response_constant(Crit& r) {
  double max_rel = 0.0;
  for (double p : {2.5, 3.0, 3.5, 4.0}) {
    const double quad = lambda_p_quadrature(p);
    max_rel = std::max(max_rel, std::abs(lambda_p(p) - quad) / quad);
  }
  r.expect("max_rel_err", max_rel <= 1e-6, max_rel);
  // Gamma(1/2) = sqrt(pi) collapses p = 4 to pi^{3/2}/sqrt(6); the quadrature
  // above is the arbiter of the overall normalization.
  const double l4_err = std::abs(lambda_p(4.0) - std::pow(kPi, 1.5) / std::sqrt(6.0));
  r.expect("p4_closed_err", l4_err <= 1e-10, l4_err);
}

// 2. Divergent log kernel: residual against 2^{-1/2} log(1/xi) stays bounded
// as the frequency window extends toward zero.
void c2_log_kernel(Crit& r) {
  const auto sup_residual = [](double lo) {
    const double decades = std::log10(1.0 / lo);
    const int m = static_cast<int>(std::lround(20.0 * decades));
    double sup = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double xi = lo * std::pow(10.0, decades * i / m);
      const double resid = kernel_K_hat(xi) - std::log(1.0 / xi) / std::sqrt(2.0);
      sup = std::max(sup, std::abs(resid));
    }
    return sup;
  };
  const double s3 = sup_residual(1e-3);
  const double s6 = sup_residual(1e-6);
  r.expect("sup_finite", std::isfinite(s6), s6);
  r.expect("window_growth", s6 <= s3 + 1e-3, s6 - s3);
}

// 3. Solver against the closed-form free Gaussian, mass conservation, and
// second-order self-convergence on three nonlinear scenarios.
void c3_solver(Crit& r) {
  {
    const Grid g = make_grid(4096, 240.0);
    SpectralOps ops(g);
    const ProbeSpec pr{1.0, 0.0, 1.0};
    const Field u0 = gaussian_probe(g, pr);
    SolverConfig cfg;
    cfg.dt = 0.01;
    const NonlinearitySpec free_nl =
        make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, CoefficientSpec{});
    const Field uT = evolve(ops, free_nl, cfg, u0, 10.0).u;
    const double err = sup_norm(uT - gaussian_free_evolution(g, pr, 10.0));
    r.expect("free_sup_err", err <= 1e-8, err);
    const double drift = std::abs(l2_norm(g, uT) - l2_norm(g, u0)) / l2_norm(g, u0);
    r.expect("mass_drift", drift <= 1e-10, drift);
  }

  const Grid g = make_grid(1024, 64.0);
  SpectralOps ops(g);
  const Field u0 = gaussian_probe(g, ProbeSpec{1.0, 0.0, 0.8});
  const auto order_of = [&](const NonlinearitySpec& nl) {
    SolverConfig cfg;
    cfg.dt = 0.00125;
    const Field ref = evolve(ops, nl, cfg, u0, 1.0).u;
    cfg.dt = 0.02;
    const double coarse = l2_norm(g, evolve(ops, nl, cfg, u0, 1.0).u - ref);
    cfg.dt = 0.01;
    const double fine = l2_norm(g, evolve(ops, nl, cfg, u0, 1.0).u - ref);
    return std::log2(coarse / fine);
  };
  const double o_p3 = order_of(
      make_spec(NonlinearityKind::inhomogeneous_power, 3.0, g, one_gaussian(0.5, 1.5, 0.0)));
  const double o_p2 = order_of(
      make_spec(NonlinearityKind::inhomogeneous_power, 2.0, g, one_gaussian(0.5, 1.5, 0.0)));
  const double o_pc =
      order_of(make_spec(NonlinearityKind::perturbed_cubic, 2.0, g, one_gaussian(0.3, 1.0, 0.0)));
  r.expect("order_p3", std::abs(o_p3 - 2.0) <= 0.2, o_p3);
  r.expect("order_p2", std::abs(o_p2 - 2.0) <= 0.2, o_p2);
  r.expect("order_cubic", std::abs(o_pc - 2.0) <= 0.2, o_pc);
}

// 4. Doubling-horizon gaps: monotone decrease below tolerance before T_max.
void c4_scattering(Crit& r) {
  const auto scatter_cfg = [](double p, double eps) {
    return json{{"scenario", "scatter_convergence"},
                {"kind", "inhomogeneous_power"},
                {"p", p},
                {"coeff", gaussian_terms(0.3, 1.0, 0.0)},
                {"probe", {{"sigma", 1.0}, {"eps", eps}}},
                {"grid", {{"n", 8192}, {"length", 2048.0}}},
                {"dt", 0.01},
                {"schedule",
                 {{"T0", 8.0}, {"T_max", 256.0}, {"tol", 1e-6}, {"min_gaps", 3}}}};
  };
  const struct {
    double p, eps;
    const char* tag;
  } cases[] = {{3.0, 0.06, "p3"}, {2.0, 0.02, "p2"}};
  for (const auto& c : cases) {
    const ScenarioSummary s = run_scenario(scatter_cfg(c.p, c.eps), std::string("c4_") + c.tag);
    const std::string t = c.tag;
    r.expect(t + "_converged", check_of(s, "converged"), stat_of(s, "T_final"));
    r.expect(t + "_monotone", check_of(s, "gaps_monotone"), stat_of(s, "num_gaps"));
    r.expect(t + "_gap", stat_of(s, "final_gap") < 1e-6, stat_of(s, "final_gap"));
    r.expect(t + "_before_Tmax", stat_of(s, "T_final") < 256.0, stat_of(s, "T_final"));
    r.expect(t + "_small_data", stat_of(s, "small_data") == 1.0, stat_of(s, "small_data"));
  }
}

// 5. First-order response: the pairing discrepancy against the closed-form
// first-order functional shrinks at the second-order rate 2(p+1) in eps.
void c5_first_order_response(Crit& r) {
  const Grid g = make_grid(2048, 224.0);
  const CoefficientSpec cs = one_gaussian(0.4, 1.5, 0.0);
  const Coefficient coeff = sample_coefficient(g, cs);
  ScatterSchedule sched;
  sched.T0 = 6.0;
  sched.T_max = 12.0;
  sched.tol = 1e30;
  sched.min_gaps = 1;
  const std::vector<double> eps_list{0.08, 0.04, 0.02, 0.01};
  for (double p : {2.0, 3.0}) {
    SpectralOps ops(g);
    const NonlinearitySpec nl = make_spec(NonlinearityKind::inhomogeneous_power, p, g, cs);
    // Unit-amplitude reference scaled by eps^{p+2} afterwards: evaluating the
    // functional at amplitude eps directly would push its value below the
    // quadrature tolerance at the small end of the sweep.
    const double born_unit = born_functional(g, coeff, ProbeSpec{0.5, 0.0, 1.0}, p, 12.0);
    std::vector<double> log_eps, log_resid;
    for (double eps : eps_list) {
      const ProbeSpec probe{0.5, 0.0, eps};
      const Field u0 = gaussian_probe(g, probe);
      const auto response = [&](double dt) {
        SolverConfig cfg;
        cfg.dt = dt;
        const Field up = scattering_map(ops, nl, cfg, u0, sched).u_plus;
        return (Complex(0.0, 1.0) * inner(g, up - u0, u0)).real();
      };
      // dt-extrapolated pairing so the splitting bias stays below the
      // second-order term at the smallest amplitude
      const double extrap = (4.0 * response(0.0025) - response(0.005)) / 3.0;
      const double born = std::pow(eps, p + 2.0) * born_unit;
      log_eps.push_back(std::log(eps));
      log_resid.push_back(std::log(std::abs(extrap - born)));
    }
    const double slope = linear_regression(log_eps, log_resid).slope;
    const double want = 2.0 * (p + 1.0);
    r.expect(std::string("slope_p") + (p == 2.0 ? "2" : "3"),
             std::abs(slope - want) <= 0.15 * want, slope);
  }
}

// 6. Smoothing-kernel rates on the semi-analytic path.
void c6_kernel_rates(Crit& r) {
  const json j = {{"scenario", "validate_kernels"},
                  {"approx_identity",
                   {{"coeff", gaussian_terms(0.5, 2.0, 0.0)},
                    {"x0", 0.0},
                    {"p", 3.0},
                    {"holder_sigmas", {0.25, 0.125, 0.0625, 0.03125, 0.015625}},
                    {"log_sigmas", {0.25, 0.125, 0.0625, 0.03125, 0.015625}},
                    {"length", 60.0},
                    {"points_per_sigma", 8.0}}}};
  const ScenarioSummary s = run_scenario(j, "c6_rates");
  const FitResult& holder = fit_of(s, "approx_holder");
  r.expect("holder_monotone", check_of(s, "approx_holder_monotone"), holder.slope);
  r.expect("holder_slope", holder.slope >= 0.25, holder.slope);
  r.expect("log_sigma3_bounded", check_of(s, "approx_log_sigma3_bounded"),
           stat_of(s, "approx_log_sigma3_bound"));
  const FitResult& logfit = fit_of(s, "approx_log");
  r.expect("log_r2", logfit.r2 > 0.9, logfit.r2);
  r.info("log_intercept_err", stat_of(s, "approx_log_intercept_err"));
}

// 7. End-to-end reconstruction on an 11-point lattice, one sweep per regime.
void c7_lattice_recovery(Crit& r) {
  const json lattice = {{"min", -2.0}, {"max", 2.0}, {"count", 11}};
  const json numerics = {{"horizons", 4}, {"tol", 1e-6}};
  const json coeff = gaussian_terms(0.4, 2.0, 0.0);

  const json holder = {{"scenario", "recovery_sweep"},
                       {"mode", "holder"},
                       {"p", 3.0},
                       {"coeff", coeff},
                       {"sigmas", {0.5, 0.35, 0.25, 0.18, 0.125, 0.09, 0.05}},
                       {"eps_rule", {{"scale", 0.16}, {"power", 1.0}}},
                       {"lattice", lattice},
                       {"numerics", numerics}};
  const ScenarioSummary sh = run_scenario(holder, "c7_holder");
  const FitResult& pow_fit = fit_of(sh, "sup_error_power");
  r.expect("p3_monotone", check_of(sh, "sup_error_monotone"),
           stat_of(sh, "sup_error_smallest_sigma"));
  r.expect("p3_slope_pos", pow_fit.slope > 0.0, pow_fit.slope);
  r.info("p3_r2", pow_fit.r2);

  // The cubic-endpoint gaps shrink like T^{-1/2}, so a 1e-6 cutoff is out of
  // reach at the wide end of the sweep; 1e-5 over three horizons keeps the
  // truncation bias at the percent level while always terminating.
  const json log_numerics = {
      {"horizons", 3}, {"tol", 1e-5}, {"points_per_sigma", 2.0}};
  const json logsweep = {{"scenario", "recovery_sweep"},
                         {"mode", "log"},
                         {"p", 2.0},
                         {"coeff", coeff},
                         {"sigmas", {0.45, 0.3, 0.2, 0.13, 0.085, 0.044}},
                         {"eps_rule", {{"scale", 0.1}, {"power", 0.5}}},
                         {"lattice", lattice},
                         {"numerics", log_numerics}};
  const ScenarioSummary sl = run_scenario(logsweep, "c7_log");
  const FitResult& log_fit = fit_of(sl, "sup_error_log");
  r.expect("p2_log_r2", log_fit.r2 > 0.85, log_fit.r2);
  r.info("p2_log_slope", log_fit.slope);
}

// 8. Stability exponents across regimes: steeper Holder exponent at p = 4
// than p = 2.5, both positive; the endpoint family prefers the log model.
void c8_stability(Crit& r) {
  const auto stability_cfg = [](const std::string& mode, double p, std::vector<double> deltas,
                                double tol) {
    return json{{"scenario", "stability_curve"},
                {"mode", mode},
                {"p", p},
                {"coeff", gaussian_terms(0.4, 2.0, 0.0)},
                {"bump", {{"kind", "gaussian"}, {"height", 1.0}, {"width", 0.5}, {"center", 8.0}}},
                {"deltas", deltas},
                {"eps_rule", {{"scale", 0.5}, {"power", 1.0}}},
                {"distance_probes", {{"sigmas", {1.0}}, {"x0s", {8.0}}, {"eps", 0.5}}},
                {"distance_grid", {{"n", 2048}, {"length", 512.0}}},
                {"distance_dt", 0.01},
                {"distance_schedule",
                 {{"T0", 32.0}, {"T_max", 64.0}, {"tol", 1e30}, {"min_gaps", 1}}},
                {"lattice", {{"min", -2.0}, {"max", 2.0}, {"count", 5}}},
                {"numerics", {{"horizons", 3}, {"tol", tol}, {"points_per_sigma", 2.0}}}};
  };
  const ScenarioSummary s4 =
      run_scenario(stability_cfg("holder", 4.0, {0.25, 0.5, 1.0, 2.0, 4.0}, 1e-6), "c8_p4");
  const double theta4 = stat_of(s4, "theta_hat");
  r.info("d_range_p4", stat_of(s4, "max_distance") / stat_of(s4, "min_distance"));
  const ScenarioSummary s25 =
      run_scenario(stability_cfg("holder", 2.5, {0.1, 0.2, 0.4, 0.8, 1.6}, 1e-6), "c8_p25");
  const double theta25 = stat_of(s25, "theta_hat");
  r.info("d_range_p25", stat_of(s25, "max_distance") / stat_of(s25, "min_distance"));
  r.expect("theta25_pos", theta25 > 0.0, theta25);
  r.expect("theta4_gt_theta25", theta4 > theta25, theta4);

  // Endpoint gaps decay like T^{-1/2}; see the matching tolerance in the
  // lattice sweep above.
  const ScenarioSummary s2 =
      run_scenario(stability_cfg("log", 2.0, {0.05, 0.1, 0.2, 0.4, 0.8}, 1e-5), "c8_p2");
  const double r2_log = stat_of(s2, "r2_log"), r2_pow = stat_of(s2, "r2_power");
  r.expect("p2_log_beats_power", r2_log > r2_pow, r2_log - r2_pow);
  r.info("p2_r2_log", r2_log);
}

// 9. Modified-map structure: null difference, log-rate reconstruction trend,
// and (informational) the fourth-power remainder of the profile expansion.
void c9_modified(Crit& r) {
  const json coeff = gaussian_terms(0.3, 1.0, 0.0);
  const json j = {
      {"scenario", "modified_structure"},
      {"null_check", {{"coeff", coeff}, {"sigma", 0.25}, {"eps", 4.8828125e-4}, {"x0", 0.0}}},
      {"log_trend",
       {{"coeff", coeff},
        {"sigmas", {0.4, 0.25, 0.15}},
        {"eps_rule", {{"scale", 1.0}, {"power", 5.5}}},
        {"x0", 0.0}}},
      {"epsilon4",
       {{"coeff", coeff},
        {"sigma", 1.0},
        {"eps_list", {0.1, 0.141, 0.2, 0.28}},
        {"grid", {{"n", 8192}, {"length", 2048.0}}},
        {"dt", 0.01},
        {"T", 256.0}}}};
  const ScenarioSummary s = run_scenario(j, "c9_modified");
  r.expect("null_small", check_of(s, "null_difference_small"), stat_of(s, "null_estimate_abs"));
  r.expect("trend_monotone", check_of(s, "mod_trend_monotone"), stat_of(s, "mod_trend_r2"));
  r.expect("trend_r2", stat_of(s, "mod_trend_r2") > 0.8, stat_of(s, "mod_trend_r2"));
  // Optional structure check: reported, not gating.
  const double slope = stat_of(s, "eps4_slope");
  r.info(std::abs(slope - 4.0) <= 1.2 ? "eps4_slope_ok" : "eps4_slope_off", slope);
}

// 10. Identical config and seed reproduce byte-identical outputs.
void c10_determinism(Crit& r) {
  const json j = {{"scenario", "recovery_sweep"},
                  {"mode", "holder"},
                  {"p", 3.0},
                  {"seed", 11},
                  {"workers", 3},
                  {"coeff", gaussian_terms(0.3, 1.0, 0.0)},
                  {"sigmas", {0.5, 0.25}},
                  {"eps_rule", {{"scale", 0.16}, {"power", 1.0}}},
                  {"lattice", {{"min", -1.0}, {"max", 1.0}, {"count", 5}}},
                  {"numerics",
                   {{"c_sigma2", 8.0},
                    {"c_sigma", 2.0},
                    {"l_min", 40.0},
                    {"tol", 1e30},
                    {"horizons", 2},
                    {"min_gaps", 1}}}};
  const ScenarioSummary a = run_scenario(j, "c10_a");
  const ScenarioSummary b = run_scenario(j, "c10_b");
  r.expect("hash_equal", a.hash == b.hash, 1.0);
  int identical = 0;
  for (const char* name : {"points.csv", "sweep.csv", "manifest.json"}) {
    const std::string ba = read_bytes(std::filesystem::path("acceptance_out/c10_a") / name);
    const std::string bb = read_bytes(std::filesystem::path("acceptance_out/c10_b") / name);
    if (ba == bb) ++identical;
    r.expect(std::string(name) + "_identical", ba == bb, static_cast<double>(ba.size()));
  }
  (void)identical;
}

struct Entry {
  int id;
  const char* name;
  double budget_s;
  void (*fn)(Crit&);
};

const Entry kEntries[] = {
    {1, "response constant closed form vs quadrature", 10.0, c1_response_constant},
    {2, "log-kernel residual bounded toward zero", 30.0, c2_log_kernel},
    {3, "free evolution, mass, splitting order", 60.0, c3_solver},
    {4, "doubling-horizon scattering convergence", 120.0, c4_scattering},
    {5, "first-order response discrepancy rate", 300.0, c5_first_order_response},
    {6, "smoothing-kernel approximation rates", 120.0, c6_kernel_rates},
    {7, "lattice reconstruction sweeps", 1800.0, c7_lattice_recovery},
    {8, "stability exponent dichotomy", 3600.0, c8_stability},
    {9, "modified-map structure and recovery", 3600.0, c9_modified},
    {10, "byte-identical reruns", 600.0, c10_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0, ran = 0;
  for (const Entry& e : kEntries) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), e.id) == wanted.end())
      continue;
    ++ran;
    Crit crit;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.fn(crit);
    } catch (const std::exception& ex) {
      crit.pass = false;
      crit.notes += std::string(" exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start).count();
    if (secs > e.budget_s) crit.pass = false;
    if (!crit.pass) ++failures;
    std::printf("[%s] %2d %s |%s | %.1fs/%.0fs\n", crit.pass ? "PASS" : "FAIL", e.id, e.name,
                crit.notes.c_str(), secs, e.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
