#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlslab/nls.hpp"
#include "nlslab/scattering.hpp"

namespace nlslab {

enum class Scenario {
  validate_kernels,
  scatter_convergence,
  recovery_sweep,
  stability_curve,
  modified_structure,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct CommonConfig {
  Scenario scenario = Scenario::validate_kernels;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: pick from NLS_LAB_THREADS or hardware
};

struct GridConfig {
  int n = 0;
  double length = 0.0;
};

// Knobs from which per-sigma grids, steps and horizons are derived:
//   T0 = max(c_sigma2 sigma^2, c_sigma sigma w(x0)) rounded onto the dt grid,
//   T_max = 2^{horizons-1} T0,
//   dt = min(dt_cap, sigma^2/10) adjusted to divide T0,
//   L = max(l_min, 8 max(sigma, T_max/sigma), span demands), dx <= sigma/pps.
struct NumericsConfig {
  double points_per_sigma = 4.0;
  double l_min = 160.0;
  double c_sigma2 = 20.0;
  double c_sigma = 6.0;
  double dt_cap = 0.01;
  double tol = 1e-6;
  int horizons = 2;
  int min_gaps = 1;
};

struct EpsRule {
  double scale = 1.0;
  double power = 1.0;  // eps(sigma) = scale * sigma^power
};

struct LatticeConfig {
  double min = -2.0;
  double max = 2.0;
  int count = 11;
};

struct LambdaCheckConfig {
  std::vector<double> p_values{2.5, 3.0, 3.5, 4.0};
  double rel_tol = 1e-6;
};

struct KhatCheckConfig {
  double xi_lo = 1e-6;
  double xi_hi = 1.0;
  int per_decade = 8;
  double slack = 1e-3;
};

struct ApproxIdentityConfig {
  CoefficientSpec coeff;
  double x0 = 0.0;
  double p = 3.0;  // exponent for the holder branch
  std::vector<double> holder_sigmas;
  std::vector<double> log_sigmas;
  double length = 60.0;
  double points_per_sigma = 8.0;
};

struct ValidateKernelsConfig {
  std::optional<LambdaCheckConfig> lambda;
  std::optional<KhatCheckConfig> khat;
  std::optional<ApproxIdentityConfig> approx;
};

// Analytic description of the equation; sampled onto a concrete grid by the
// runner that owns the grid.
struct NonlinearityConfig {
  NonlinearityKind kind = NonlinearityKind::inhomogeneous_power;
  double p = 3.0;
  CoefficientSpec coeff;
};

struct ScatterConvergenceConfig {
  NonlinearityConfig nl;
  ProbeSpec probe;
  double velocity = 0.0;
  GridConfig grid;
  double dt = 0.01;
  ScatterSchedule schedule;
};

struct RecoverySweepConfig {
  std::string mode = "holder";  // "holder" | "log"
  double p = 3.0;
  CoefficientSpec coeff;
  std::vector<double> sigmas;
  EpsRule eps_rule;
  LatticeConfig lattice;
  NumericsConfig numerics;
  double grid_refine = 1.0;  // multiplies resolution, for grid-independence reruns
};

struct DistanceProbesConfig {
  std::vector<double> sigmas{1.0};
  std::vector<double> x0s{0.0};
  std::vector<double> velocities{0.0};
  double eps = 0.08;
};

struct StabilityCurveConfig {
  std::string mode = "holder";
  double p = 4.0;
  CoefficientSpec coeff_a;
  BumpTerm bump;  // b = a + delta * bump
  std::vector<double> deltas;
  EpsRule eps_rule;
  DistanceProbesConfig probes;
  GridConfig dist_grid;
  double dist_dt = 0.01;
  ScatterSchedule dist_schedule;
  LatticeConfig lattice;
  double norm_budget = -1.0;  // < 0: derive from coefficient norms
  double s_param = -1.0;      // < 0: default_holder_s(p)
  NumericsConfig numerics;
};

struct ModNullConfig {
  CoefficientSpec coeff;
  double sigma = 0.25;
  double x0 = 0.0;
  double eps = 0.05;
  NumericsConfig numerics;
};

struct ModTrendConfig {
  CoefficientSpec coeff;
  std::vector<double> sigmas;
  EpsRule eps_rule;
  double x0 = 0.0;
  NumericsConfig numerics;
};

struct ModEps4Config {
  CoefficientSpec coeff;
  double sigma = 1.0;
  std::vector<double> eps_list;
  GridConfig grid;
  double dt = 0.01;
  double T = 256.0;
};

struct ModifiedStructureConfig {
  std::optional<ModNullConfig> null_check;
  std::optional<ModTrendConfig> log_trend;
  std::optional<ModEps4Config> eps4;
};

struct ExperimentConfig {
  CommonConfig common;
  std::variant<ValidateKernelsConfig, ScatterConvergenceConfig, RecoverySweepConfig,
               StabilityCurveConfig, ModifiedStructureConfig>
      payload;
  nlohmann::json raw;  // canonical copy of the accepted input
};

// Parses and validates a full experiment configuration. Unknown keys, missing
// required keys, wrong types and out-of-range values all raise ConfigInvalid.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// FNV-1a over the canonical dump of the accepted configuration.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace nlslab
