#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "nlslab/experiments.hpp"

namespace {

int exit_code(nlslab::ErrorKind kind) {
  switch (kind) {
    case nlslab::ErrorKind::Config: return 2;
    case nlslab::ErrorKind::Numerical: return 3;
    case nlslab::ErrorKind::Io: return 4;
  }
  return 1;
}

struct SubArgs {
  std::string config;
  std::string out = "out";
  bool dry_run = false;
};

void add_scenario(CLI::App& app, const char* name, const char* desc, nlslab::Scenario scenario,
                  std::vector<std::pair<nlslab::Scenario, SubArgs*>>& chosen) {
  auto* sub = app.add_subcommand(name, desc);
  auto* args = new SubArgs;  // lives until exit
  sub->add_option("--config", args->config, "path to the scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args->out, "output directory for CSV/manifest/summary");
  sub->add_flag("--dry-run", args->dry_run, "validate the config and exit");
  sub->callback([&chosen, scenario, args] { chosen.push_back({scenario, args}); });
}

int run_one(nlslab::Scenario expected, const SubArgs& args) {
  nlslab::ExperimentConfig cfg = nlslab::load_config_file(args.config);
  nlslab::require(cfg.common.scenario == expected, nlslab::ErrorCode::ConfigInvalid,
                  "config scenario '" + nlslab::scenario_name(cfg.common.scenario) +
                      "' does not match the subcommand");
  const nlslab::ScenarioSummary sum = nlslab::run_experiment(cfg, args.out, args.dry_run);
  if (args.dry_run) {
    std::printf("config ok: scenario=%s hash=%s\n", sum.scenario.c_str(), sum.hash.c_str());
    return 0;
  }
  int failures = 0;
  for (const auto& c : sum.checks) {
    std::printf("[%s] %s = %.6g%s%s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.value,
                c.detail.empty() ? "" : "  ", c.detail.c_str());
    failures += c.passed ? 0 : 1;
  }
  std::printf("scenario %s finished: %zu checks, %d failing; outputs in %s\n",
              sum.scenario.c_str(), sum.checks.size(), failures, args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for coefficient recovery from scattering data"};
  app.require_subcommand(1);
  std::vector<std::pair<nlslab::Scenario, SubArgs*>> chosen;

  add_scenario(app, "validate-kernels", "closed-form constants vs brute-force quadrature",
               nlslab::Scenario::validate_kernels, chosen);
  add_scenario(app, "scatter", "doubling-horizon convergence of the scattering map",
               nlslab::Scenario::scatter_convergence, chosen);
  add_scenario(app, "recover", "pointwise coefficient recovery sweeps",
               nlslab::Scenario::recovery_sweep, chosen);
  add_scenario(app, "stability", "recovered-vs-true stability curve across perturbations",
               nlslab::Scenario::stability_curve, chosen);
  add_scenario(app, "modified-structure", "modified scattering difference diagnostics",
               nlslab::Scenario::modified_structure, chosen);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [scenario, args] : chosen) {
      const int rc = run_one(scenario, *args);
      if (rc != 0) return rc;
    }
    return 0;
  } catch (const nlslab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
