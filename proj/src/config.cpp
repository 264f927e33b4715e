#include "nlslab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace nlslab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigInvalid, "config: " + path + ": " + what);
}

// Object wrapper that records key accesses and rejects leftovers.
class View {
 public:
  View(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "expected an object");
  }

  bool has(const char* k) const {
    seen_.insert(k);
    return j_.contains(k);
  }

  const json& at(const char* k) const {
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end()) bad(path_, std::string("missing required key '") + k + "'");
    return *it;
  }

  double num(const char* k) const {
    const json& v = at(k);
    if (!v.is_number()) bad(key_path(k), "expected a number");
    return v.get<double>();
  }

  double num_or(const char* k, double dflt) const { return has(k) ? num(k) : dflt; }

  int integer(const char* k) const {
    const json& v = at(k);
    if (!v.is_number_integer()) bad(key_path(k), "expected an integer");
    return v.get<int>();
  }

  int integer_or(const char* k, int dflt) const { return has(k) ? integer(k) : dflt; }

  std::uint64_t uinteger_or(const char* k, std::uint64_t dflt) const {
    if (!has(k)) return dflt;
    const json& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      bad(key_path(k), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string str(const char* k) const {
    const json& v = at(k);
    if (!v.is_string()) bad(key_path(k), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> num_array(const char* k) const {
    const json& v = at(k);
    if (!v.is_array()) bad(key_path(k), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad(key_path(k), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& child(const char* k) const { return at(k); }

  std::string key_path(const char* k) const { return path_ + "." + k; }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(path_, "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

void check_positive(double v, const std::string& path) {
  if (!(std::isfinite(v) && v > 0.0)) bad(path, "must be positive and finite");
}

void check_finite(double v, const std::string& path) {
  if (!std::isfinite(v)) bad(path, "must be finite");
}

BumpTerm parse_term(const json& j, const std::string& path) {
  View v(j, path);
  BumpTerm t;
  const std::string kind = v.str("kind");
  if (kind == "gaussian")
    t.kind = BumpTerm::Kind::gaussian;
  else if (kind == "mollifier")
    t.kind = BumpTerm::Kind::mollifier;
  else
    bad(path + ".kind", "expected 'gaussian' or 'mollifier'");
  t.height = v.num("height");
  check_finite(t.height, path + ".height");
  t.width = v.num("width");
  check_positive(t.width, path + ".width");
  t.center = v.num_or("center", 0.0);
  check_finite(t.center, path + ".center");
  v.done();
  return t;
}

CoefficientSpec parse_coefficient(const json& j, const std::string& path) {
  View v(j, path);
  const json& terms = v.at("terms");
  if (!terms.is_array()) bad(path + ".terms", "expected an array");
  CoefficientSpec spec;
  int i = 0;
  for (const auto& t : terms)
    spec.terms.push_back(parse_term(t, path + ".terms[" + std::to_string(i++) + "]"));
  v.done();
  return spec;
}

ProbeSpec parse_probe(const json& j, const std::string& path) {
  View v(j, path);
  ProbeSpec p;
  p.sigma = v.num("sigma");
  check_positive(p.sigma, path + ".sigma");
  p.x0 = v.num_or("x0", 0.0);
  check_finite(p.x0, path + ".x0");
  p.eps = v.num_or("eps", 1.0);
  check_positive(p.eps, path + ".eps");
  v.done();
  return p;
}

GridConfig parse_grid(const json& j, const std::string& path) {
  View v(j, path);
  GridConfig g;
  g.n = v.integer("n");
  if (g.n < 16 || (g.n & (g.n - 1)) != 0) bad(path + ".n", "must be a power of two >= 16");
  g.length = v.num("length");
  check_positive(g.length, path + ".length");
  v.done();
  return g;
}

ScatterSchedule parse_schedule(const json& j, const std::string& path) {
  View v(j, path);
  ScatterSchedule s;
  s.T0 = v.num("T0");
  check_positive(s.T0, path + ".T0");
  s.T_max = v.num_or("T_max", 64.0 * s.T0);
  if (!(s.T_max >= s.T0)) bad(path + ".T_max", "must be >= T0");
  s.tol = v.num_or("tol", 1e-6);
  check_positive(s.tol, path + ".tol");
  s.min_gaps = v.integer_or("min_gaps", 1);
  if (s.min_gaps < 1) bad(path + ".min_gaps", "must be >= 1");
  v.done();
  return s;
}

NumericsConfig parse_numerics(const json& j, const std::string& path) {
  View v(j, path);
  NumericsConfig n;
  n.points_per_sigma = v.num_or("points_per_sigma", n.points_per_sigma);
  if (!(n.points_per_sigma >= 1.0)) bad(path + ".points_per_sigma", "must be >= 1");
  n.l_min = v.num_or("l_min", n.l_min);
  if (!(n.l_min >= 10.0)) bad(path + ".l_min", "must be >= 10");
  n.c_sigma2 = v.num_or("c_sigma2", n.c_sigma2);
  n.c_sigma = v.num_or("c_sigma", n.c_sigma);
  if (!(n.c_sigma2 >= 0.0 && n.c_sigma >= 0.0 && n.c_sigma2 + n.c_sigma > 0.0))
    bad(path, "horizon constants must be nonnegative, not both zero");
  n.dt_cap = v.num_or("dt_cap", n.dt_cap);
  check_positive(n.dt_cap, path + ".dt_cap");
  n.tol = v.num_or("tol", n.tol);
  check_positive(n.tol, path + ".tol");
  n.horizons = v.integer_or("horizons", n.horizons);
  if (n.horizons < 1 || n.horizons > 12) bad(path + ".horizons", "must lie in [1,12]");
  n.min_gaps = v.integer_or("min_gaps", n.min_gaps);
  if (n.min_gaps < 1) bad(path + ".min_gaps", "must be >= 1");
  if (n.min_gaps > n.horizons - 1 && n.horizons > 1)
    bad(path + ".min_gaps", "cannot exceed horizons - 1");
  v.done();
  return n;
}

EpsRule parse_eps_rule(const json& j, const std::string& path) {
  View v(j, path);
  EpsRule r;
  r.scale = v.num_or("scale", 1.0);
  check_positive(r.scale, path + ".scale");
  r.power = v.num_or("power", 1.0);
  if (!(r.power >= 0.0)) bad(path + ".power", "must be >= 0");
  v.done();
  return r;
}

LatticeConfig parse_lattice(const json& j, const std::string& path) {
  View v(j, path);
  LatticeConfig l;
  l.min = v.num("min");
  l.max = v.num("max");
  check_finite(l.min, path + ".min");
  check_finite(l.max, path + ".max");
  if (!(l.min <= l.max)) bad(path, "min must be <= max");
  l.count = v.integer("count");
  if (l.count < 1) bad(path + ".count", "must be >= 1");
  if (l.count == 1 && l.min != l.max) bad(path, "count 1 needs min == max");
  v.done();
  return l;
}

NonlinearityConfig parse_nonlinearity(const View& v, const std::string& path) {
  NonlinearityConfig nl;
  const std::string kind = v.str("kind");
  if (kind == "inhomogeneous_power") {
    nl.kind = NonlinearityKind::inhomogeneous_power;
    nl.p = v.num("p");
    if (!(nl.p >= 2.0 && nl.p <= 4.0)) bad(path + ".p", "must lie in [2,4]");
  } else if (kind == "perturbed_cubic") {
    nl.kind = NonlinearityKind::perturbed_cubic;
    if (v.has("p") && v.num("p") != 2.0) bad(path + ".p", "perturbed cubic fixes p = 2");
    nl.p = 2.0;
  } else {
    bad(path + ".kind", "expected 'inhomogeneous_power' or 'perturbed_cubic'");
  }
  nl.coeff = parse_coefficient(v.child("coeff"), path + ".coeff");
  return nl;
}

void check_sigma_list(const std::vector<double>& sigmas, const std::string& path,
                      double hi_open) {
  if (sigmas.empty()) bad(path, "must be nonempty");
  for (double s : sigmas)
    if (!(std::isfinite(s) && s > 0.0 && s < hi_open))
      bad(path, "entries must lie in (0, " + std::to_string(hi_open) + ")");
}

ValidateKernelsConfig parse_validate_kernels(const View& v, const std::string& path) {
  ValidateKernelsConfig c;
  if (v.has("lambda")) {
    View lv(v.child("lambda"), path + ".lambda");
    LambdaCheckConfig lc;
    if (lv.has("p_values")) lc.p_values = lv.num_array("p_values");
    for (double p : lc.p_values)
      if (!(p > 2.0 && p <= 4.0)) bad(path + ".lambda.p_values", "entries must lie in (2,4]");
    lc.rel_tol = lv.num_or("rel_tol", lc.rel_tol);
    check_positive(lc.rel_tol, path + ".lambda.rel_tol");
    lv.done();
    c.lambda = lc;
  }
  if (v.has("khat")) {
    View kv(v.child("khat"), path + ".khat");
    KhatCheckConfig kc;
    kc.xi_lo = kv.num_or("xi_lo", kc.xi_lo);
    kc.xi_hi = kv.num_or("xi_hi", kc.xi_hi);
    if (!(kc.xi_lo > 0.0 && kc.xi_lo < kc.xi_hi && kc.xi_hi <= 2.0))
      bad(path + ".khat", "need 0 < xi_lo < xi_hi <= 2");
    kc.per_decade = kv.integer_or("per_decade", kc.per_decade);
    if (kc.per_decade < 2) bad(path + ".khat.per_decade", "must be >= 2");
    kc.slack = kv.num_or("slack", kc.slack);
    check_positive(kc.slack, path + ".khat.slack");
    kv.done();
    c.khat = kc;
  }
  if (v.has("approx_identity")) {
    View av(v.child("approx_identity"), path + ".approx_identity");
    ApproxIdentityConfig ac;
    ac.coeff = parse_coefficient(av.child("coeff"), path + ".approx_identity.coeff");
    ac.x0 = av.num_or("x0", 0.0);
    check_finite(ac.x0, path + ".approx_identity.x0");
    ac.p = av.num_or("p", 3.0);
    if (!(ac.p > 2.0 && ac.p <= 4.0)) bad(path + ".approx_identity.p", "must lie in (2,4]");
    if (av.has("holder_sigmas")) {
      ac.holder_sigmas = av.num_array("holder_sigmas");
      check_sigma_list(ac.holder_sigmas, path + ".approx_identity.holder_sigmas", 1.0);
    }
    if (av.has("log_sigmas")) {
      ac.log_sigmas = av.num_array("log_sigmas");
      check_sigma_list(ac.log_sigmas, path + ".approx_identity.log_sigmas", 0.5);
    }
    if (ac.holder_sigmas.empty() && ac.log_sigmas.empty())
      bad(path + ".approx_identity", "needs holder_sigmas or log_sigmas");
    ac.length = av.num_or("length", ac.length);
    if (!(ac.length >= 10.0)) bad(path + ".approx_identity.length", "must be >= 10");
    ac.points_per_sigma = av.num_or("points_per_sigma", ac.points_per_sigma);
    if (!(ac.points_per_sigma >= 2.0))
      bad(path + ".approx_identity.points_per_sigma", "must be >= 2");
    av.done();
    c.approx = ac;
  }
  if (!c.lambda && !c.khat && !c.approx)
    bad(path, "validate_kernels needs at least one of lambda/khat/approx_identity");
  return c;
}

ScatterConvergenceConfig parse_scatter_convergence(const View& v, const std::string& path) {
  ScatterConvergenceConfig c;
  c.nl = parse_nonlinearity(v, path);
  c.probe = parse_probe(v.child("probe"), path + ".probe");
  c.velocity = v.num_or("velocity", 0.0);
  check_finite(c.velocity, path + ".velocity");
  c.grid = parse_grid(v.child("grid"), path + ".grid");
  c.dt = v.num("dt");
  check_positive(c.dt, path + ".dt");
  c.schedule = parse_schedule(v.child("schedule"), path + ".schedule");
  return c;
}

void check_mode(const std::string& mode, double p, const std::string& path) {
  if (mode == "holder") {
    if (!(p > 2.0 && p <= 4.0)) bad(path + ".p", "holder mode needs p in (2,4]");
  } else if (mode == "log") {
    if (p != 2.0) bad(path + ".p", "log mode fixes p = 2");
  } else {
    bad(path + ".mode", "expected 'holder' or 'log'");
  }
}

RecoverySweepConfig parse_recovery_sweep(const View& v, const std::string& path) {
  RecoverySweepConfig c;
  c.mode = v.str("mode");
  c.p = v.num_or("p", c.mode == "log" ? 2.0 : 3.0);
  check_mode(c.mode, c.p, path);
  c.coeff = parse_coefficient(v.child("coeff"), path + ".coeff");
  c.sigmas = v.num_array("sigmas");
  check_sigma_list(c.sigmas, path + ".sigmas", c.mode == "log" ? 0.5 : 1.0);
  if (v.has("eps_rule")) c.eps_rule = parse_eps_rule(v.child("eps_rule"), path + ".eps_rule");
  c.lattice = parse_lattice(v.child("lattice"), path + ".lattice");
  if (v.has("numerics")) c.numerics = parse_numerics(v.child("numerics"), path + ".numerics");
  c.grid_refine = v.num_or("grid_refine", 1.0);
  if (!(c.grid_refine >= 1.0 && c.grid_refine <= 8.0))
    bad(path + ".grid_refine", "must lie in [1,8]");
  return c;
}

StabilityCurveConfig parse_stability_curve(const View& v, const std::string& path) {
  StabilityCurveConfig c;
  c.mode = v.str("mode");
  c.p = v.num_or("p", c.mode == "log" ? 2.0 : 4.0);
  check_mode(c.mode, c.p, path);
  c.coeff_a = parse_coefficient(v.child("coeff"), path + ".coeff");
  c.bump = parse_term(v.child("bump"), path + ".bump");
  c.deltas = v.num_array("deltas");
  if (c.deltas.empty()) bad(path + ".deltas", "must be nonempty");
  for (double d : c.deltas) check_positive(d, path + ".deltas");
  if (v.has("eps_rule")) c.eps_rule = parse_eps_rule(v.child("eps_rule"), path + ".eps_rule");
  {
    View pv(v.child("distance_probes"), path + ".distance_probes");
    DistanceProbesConfig pc;
    pc.sigmas = pv.num_array("sigmas");
    check_sigma_list(pc.sigmas, path + ".distance_probes.sigmas", 8.0);
    if (pv.has("x0s")) {
      pc.x0s = pv.num_array("x0s");
      if (pc.x0s.empty()) bad(path + ".distance_probes.x0s", "must be nonempty");
    }
    if (pv.has("velocities")) {
      pc.velocities = pv.num_array("velocities");
      if (pc.velocities.empty()) bad(path + ".distance_probes.velocities", "must be nonempty");
    }
    pc.eps = pv.num_or("eps", pc.eps);
    check_positive(pc.eps, path + ".distance_probes.eps");
    pv.done();
    c.probes = pc;
  }
  c.dist_grid = parse_grid(v.child("distance_grid"), path + ".distance_grid");
  c.dist_dt = v.num_or("distance_dt", 0.01);
  check_positive(c.dist_dt, path + ".distance_dt");
  c.dist_schedule = parse_schedule(v.child("distance_schedule"), path + ".distance_schedule");
  c.lattice = parse_lattice(v.child("lattice"), path + ".lattice");
  c.norm_budget = v.num_or("norm_budget", -1.0);
  c.s_param = v.num_or("s_param", -1.0);
  if (c.s_param >= 0.0 && !(c.s_param > 0.0 && c.s_param <= 1.0))
    bad(path + ".s_param", "must lie in (0,1]");
  if (v.has("numerics")) c.numerics = parse_numerics(v.child("numerics"), path + ".numerics");
  return c;
}

ModifiedStructureConfig parse_modified_structure(const View& v, const std::string& path) {
  ModifiedStructureConfig c;
  if (v.has("null_check")) {
    View nv(v.child("null_check"), path + ".null_check");
    ModNullConfig nc;
    nc.coeff = parse_coefficient(nv.child("coeff"), path + ".null_check.coeff");
    nc.sigma = nv.num_or("sigma", nc.sigma);
    if (!(nc.sigma > 0.0 && nc.sigma < 0.5)) bad(path + ".null_check.sigma", "needs (0,1/2)");
    nc.x0 = nv.num_or("x0", 0.0);
    check_finite(nc.x0, path + ".null_check.x0");
    nc.eps = nv.num_or("eps", nc.eps);
    check_positive(nc.eps, path + ".null_check.eps");
    if (nv.has("numerics"))
      nc.numerics = parse_numerics(nv.child("numerics"), path + ".null_check.numerics");
    nv.done();
    c.null_check = nc;
  }
  if (v.has("log_trend")) {
    View tv(v.child("log_trend"), path + ".log_trend");
    ModTrendConfig tc;
    tc.coeff = parse_coefficient(tv.child("coeff"), path + ".log_trend.coeff");
    tc.sigmas = tv.num_array("sigmas");
    check_sigma_list(tc.sigmas, path + ".log_trend.sigmas", 0.5);
    if (tv.has("eps_rule"))
      tc.eps_rule = parse_eps_rule(tv.child("eps_rule"), path + ".log_trend.eps_rule");
    tc.x0 = tv.num_or("x0", 0.0);
    check_finite(tc.x0, path + ".log_trend.x0");
    if (tv.has("numerics"))
      tc.numerics = parse_numerics(tv.child("numerics"), path + ".log_trend.numerics");
    tv.done();
    c.log_trend = tc;
  }
  if (v.has("epsilon4")) {
    View ev(v.child("epsilon4"), path + ".epsilon4");
    ModEps4Config ec;
    ec.coeff = parse_coefficient(ev.child("coeff"), path + ".epsilon4.coeff");
    ec.sigma = ev.num_or("sigma", ec.sigma);
    check_positive(ec.sigma, path + ".epsilon4.sigma");
    ec.eps_list = ev.num_array("eps_list");
    if (ec.eps_list.empty()) bad(path + ".epsilon4.eps_list", "must be nonempty");
    for (double e : ec.eps_list)
      if (!(e > 0.0 && e <= 0.5)) bad(path + ".epsilon4.eps_list", "entries must lie in (0,1/2]");
    ec.grid = parse_grid(ev.child("grid"), path + ".epsilon4.grid");
    ec.dt = ev.num_or("dt", ec.dt);
    check_positive(ec.dt, path + ".epsilon4.dt");
    ec.T = ev.num_or("T", ec.T);
    check_positive(ec.T, path + ".epsilon4.T");
    ev.done();
    c.eps4 = ec;
  }
  if (!c.null_check && !c.log_trend && !c.eps4)
    bad(path, "modified_structure needs at least one of null_check/log_trend/epsilon4");
  return c;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::validate_kernels: return "validate_kernels";
    case Scenario::scatter_convergence: return "scatter_convergence";
    case Scenario::recovery_sweep: return "recovery_sweep";
    case Scenario::stability_curve: return "stability_curve";
    case Scenario::modified_structure: return "modified_structure";
  }
  fail(ErrorCode::InvalidArgument, "unknown scenario value");
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "validate_kernels") return Scenario::validate_kernels;
  if (name == "scatter_convergence") return Scenario::scatter_convergence;
  if (name == "recovery_sweep") return Scenario::recovery_sweep;
  if (name == "stability_curve") return Scenario::stability_curve;
  if (name == "modified_structure") return Scenario::modified_structure;
  fail(ErrorCode::ConfigInvalid, "config: unknown scenario '" + name + "'");
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  View v(j, "$");
  ExperimentConfig cfg;
  cfg.common.scenario = scenario_from_name(v.str("scenario"));
  cfg.common.seed = v.uinteger_or("seed", 1);
  cfg.common.workers = v.integer_or("workers", 0);
  if (cfg.common.workers < 0 || cfg.common.workers > 64)
    bad("$.workers", "must lie in [0,64]");

  switch (cfg.common.scenario) {
    case Scenario::validate_kernels:
      cfg.payload = parse_validate_kernels(v, "$");
      break;
    case Scenario::scatter_convergence:
      cfg.payload = parse_scatter_convergence(v, "$");
      break;
    case Scenario::recovery_sweep:
      cfg.payload = parse_recovery_sweep(v, "$");
      break;
    case Scenario::stability_curve:
      cfg.payload = parse_stability_curve(v, "$");
      break;
    case Scenario::modified_structure:
      cfg.payload = parse_modified_structure(v, "$");
      break;
  }
  v.done();
  cfg.raw = j;
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoFailure, "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("config: JSON parse failure: ") + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = cfg.raw.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace nlslab
