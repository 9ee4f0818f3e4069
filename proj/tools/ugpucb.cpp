// ugpucb command-line driver: run experiments, the theory-check suite, and
// plot-data reduction of trace CSVs.

#include <ugpucb/ugpucb.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitTheory = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Keeps the configured methods named in `names` (by label or method name),
// in that order; names absent from the config get default settings.
void select_methods(ugpucb::ExperimentConfig& cfg, const std::vector<std::string>& names) {
  std::vector<ugpucb::AcquisitionConfig> picked;
  for (const auto& name : names) {
    bool found = false;
    for (const auto& m : cfg.methods) {
      if (m.name() == name || (m.label.empty() && ugpucb::to_string(m.method) == name)) {
        picked.push_back(m);
        found = true;
        break;
      }
    }
    if (found) continue;
    const auto method = ugpucb::method_from_string(name);
    if (!method) throw ugpucb::ConfigError("--methods: unknown method '" + name + "'");
    ugpucb::AcquisitionConfig m;
    m.method = *method;
    m.model_cov = cfg.noise.model_cov;
    picked.push_back(m);
  }
  cfg.methods = std::move(picked);
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string methods;
  std::optional<int> trials;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
};

int run(const RunArgs& a) {
  using namespace ugpucb;
  ExperimentConfig cfg;
  try {
    cfg = load_config(a.config);
    if (a.trials) cfg.trials = *a.trials;
    if (a.iterations) cfg.iterations = *a.iterations;
    if (a.seed) cfg.seed = *a.seed;
    if (!a.methods.empty()) select_methods(cfg, split(a.methods, ','));
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  ExperimentResult res;
  try {
    res = run_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  try {
    write_outputs(a.out, res);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& m : res.methods) {
    std::printf("%-16s trials=%d/%d", m.name.c_str(), m.completed, cfg.trials);
    if (!m.mean.empty()) std::printf("  mean_regret[t=%d]=%.6f", cfg.iterations, m.mean.back());
    std::printf("\n");
    for (const auto& t : m.traces)
      if (t.failed) std::fprintf(stderr, "%s trial %d failed: %s\n", m.name.c_str(), t.trial, t.diagnostic.c_str());
  }
  return res.any_failure() ? kExitNumerical : kExitOk;
}

int theory_check(std::uint64_t seed, const std::string& negative_control) {
  using namespace ugpucb;
  TheoryCheckOptions opt;
  if (negative_control == "linear") {
    opt.dominance_kernel = DominanceKernel::linear;
  } else if (negative_control == "quadratic") {
    opt.dominance_kernel = DominanceKernel::quadratic;
  } else if (!negative_control.empty()) {
    std::cerr << "config error: --negative-control expects linear or quadratic\n";
    return kExitConfig;
  }
  const TheoryReport report = theory_check_suite(seed, opt);
  for (const auto& f : report.families) {
    const char* status = f.passed() ? "PASS" : (f.expect_pass ? "FAIL" : "VIOLATED");
    std::printf("%-8s %-36s instances=%d violations=%d worst_excess=%.3e%s\n", status, f.name.c_str(), f.instances,
                f.violations, f.worst, f.expect_pass ? "" : " (negative control)");
  }
  return report.passed() ? kExitOk : kExitTheory;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization under uncertain inputs"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write traces");
  run_cmd->add_option("--config", run_args.config, "JSON config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();
  run_cmd->add_option("--methods", run_args.methods, "Comma-separated method labels or names");
  run_cmd->add_option("--trials", run_args.trials, "Override trials")->check(CLI::PositiveNumber);
  run_cmd->add_option("--iterations", run_args.iterations, "Override iterations")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--seed", run_args.seed, "Override seed");

  std::uint64_t theory_seed = 0;
  std::string negative_control;
  auto* theory_cmd = app.add_subcommand("theory-check", "Randomized checks of the bounds used by the method");
  theory_cmd->add_option("--seed", theory_seed, "Seed");
  theory_cmd->add_option("--negative-control", negative_control,
                         "Also run log-det dominance with a non-translation-invariant kernel (linear|quadratic)");

  std::string traces;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot-data", "Reduce trace CSVs to a tidy mean/std table");
  plot_cmd->add_option("--traces", traces, "Directory of trace CSVs")->required();
  plot_cmd->add_option("--out", plot_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return run(run_args);
    if (*theory_cmd) return theory_check(theory_seed, negative_control);
    if (*plot_cmd) {
      ugpucb::write_plot_data(traces, plot_out);
      return kExitOk;
    }
  } catch (const ugpucb::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
