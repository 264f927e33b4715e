#pragma once

#include <map>
#include <string>
#include <vector>

#include "nlslab/config.hpp"
#include "nlslab/fit.hpp"
#include "nlslab/recovery.hpp"

namespace nlslab {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct ScenarioSummary {
  std::string scenario;
  std::string hash;
  std::vector<CheckResult> checks;
  std::map<std::string, FitResult> fits;
  std::map<std::string, double> stats;
  std::vector<std::string> outputs;
  bool ok() const;
};

// Worker count resolution: NLS_LAB_THREADS env var wins, then the config
// value, then hardware concurrency.
int resolve_workers(int requested);

// Spread of the coefficient relative to x0, in probe-width units; drives the
// horizon rule below. At least 1 even for the zero coefficient.
double coefficient_reach(const CoefficientSpec& spec, double x0);

// Per-probe solver parameters derived from the numerics knobs:
// horizons on the dt lattice, a box long enough for the dispersive spread,
// grid spacing tied to the probe width.
struct DerivedRun {
  int n = 0;
  double length = 0.0;
  double dt = 0.0;
  ScatterSchedule sched;
};
DerivedRun derive_run(const NumericsConfig& nc, double sigma, double reach, double span,
                      double refine = 1.0);

// Runs one scenario, writing manifest/CSV/summary/plot script under out_dir.
// dry_run stops after validation and writes nothing.
ScenarioSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                               bool dry_run = false);

}  // namespace nlslab
