#ifndef UGPUCB_HARNESS_HPP
#define UGPUCB_HARNESS_HPP

#include "acquisition.hpp"
#include "noise.hpp"
#include "objectives.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace ugpucb {

/// Invalid or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::rkhs_expansion;
  int m = 30;
  SEKernelParams kernel = SEKernelParams::isotropic(2, 0.1);
  Bounds bounds = Bounds::uniform(2, 0.0, 1.0);
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int trials = 10;
  int iterations = 200;
  ObjectiveSpec objective;
  NoiseConfig noise = NoiseConfig::isotropic(2, 0.1, 0.1);
  std::vector<AcquisitionConfig> methods;
  std::optional<double> lambda;  // unset: obs_sigma^2 + sigma_q^2 per method
  int expected_optimum_budget = 100000;
  int mc_samples = 1000;

  Eigen::Index dim() const { return objective.bounds.dim(); }

  void validate() const {
    auto check = [](bool c, const std::string& what) {
      if (!c) throw ConfigError(what);
    };
    check(trials >= 1, "trials must be >= 1");
    check(iterations >= 0, "iterations must be >= 0");
    check(!methods.empty(), "at least one method is required");
    check(expected_optimum_budget >= 1, "expected_optimum_budget must be >= 1");
    check(mc_samples >= 1, "mc_samples must be >= 1");
    check(!lambda || (*lambda > 0.0 && std::isfinite(*lambda)), "lambda must be positive");
    try {
      objective.bounds.validate();
      objective.kernel.validate();
      noise.validate();
      for (const auto& m : methods) m.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    const auto d = dim();
    check(objective.kernel.dim() == d, "kernel lengthscales must match the domain dimension");
    check(noise.dim() == d, "noise covariances must match the domain dimension");
    for (const auto& m : methods) check(m.model_cov.rows() == d, "method model_cov must match the domain dimension");
    if (objective.kind == ObjectiveKind::michalewicz_4d) check(d == 4, "michalewicz_4d requires 4-dimensional bounds");
    if (objective.kind == ObjectiveKind::rkhs_expansion) check(objective.m >= 1, "objective.m must be >= 1");
    std::map<std::string, int> names;
    for (const auto& m : methods) check(++names[m.name()] == 1, "duplicate method label '" + m.name() + "'");
  }
};

/// Default method block: the three compared methods at the configured noise model.
inline std::vector<AcquisitionConfig> default_methods(const NoiseConfig& noise) {
  std::vector<AcquisitionConfig> out;
  for (Method m : {Method::ugp_ucb, Method::igp_ucb, Method::uei}) {
    AcquisitionConfig c;
    c.method = m;
    c.model_cov = noise.model_cov;
    out.push_back(c);
  }
  return out;
}

/// Stream identifiers for seed derivation.
enum SeedStream : std::uint64_t { kObjectiveStream = 1, kAcquisitionStream, kQueryStream, kMcStream, kSearchStream };

struct TrialSetup {
  int trial = 0;
  BenchmarkObjective objective;
  OptimumResult reference;  // max_x E[f(x~) | x]
  OptimumResult noiseless;  // max_x f(x)
  double rho_q = 0.0;
  std::uint64_t mc_seed = 0;
};

inline BenchmarkObjective make_objective(const ExperimentConfig& config, int trial) {
  if (config.objective.kind == ObjectiveKind::michalewicz_4d) return BenchmarkObjective::michalewicz_4d();
  return BenchmarkObjective::from_rkhs(
      sample_rkhs_objective(derive_seed(config.seed, static_cast<std::uint64_t>(trial), kObjectiveStream),
                            config.objective.m, config.objective.bounds, config.objective.kernel),
      config.objective.bounds);
}

inline TrialSetup make_trial_setup(const ExperimentConfig& config, int trial) {
  TrialSetup s;
  s.trial = trial;
  s.objective = make_objective(config, trial);
  // Michalewicz is shared by all trials, so its (expensive) reference search is too.
  const bool shared = config.objective.kind == ObjectiveKind::michalewicz_4d;
  const auto key = shared ? 0u : static_cast<std::uint64_t>(trial);
  s.mc_seed = derive_seed(config.seed, key, kMcStream);
  const std::uint64_t search_seed = derive_seed(config.seed, key, kSearchStream);
  const ExpectedObjective g(s.objective, config.noise.exec_cov, config.mc_samples, s.mc_seed);
  s.reference = expected_optimum(s.objective, g, config.expected_optimum_budget, search_seed);
  const ExpectedObjective f(s.objective, Matrix::Zero(config.dim(), config.dim()), config.mc_samples, s.mc_seed);
  s.noiseless = expected_optimum(s.objective, f, config.expected_optimum_budget, search_seed);
  s.rho_q = s.noiseless.value - s.reference.value;
  return s;
}

/// rho_q = max f - max E[f(x~) | x] under the configured execution noise.
inline double rho_q(const BenchmarkObjective& obj, const NoiseConfig& cfg, int budget, std::uint64_t seed,
                    int mc_samples = 1000) {
  const std::uint64_t mc_seed = derive_seed(seed, 0, kMcStream);
  const ExpectedObjective g(obj, cfg.exec_cov, mc_samples, mc_seed);
  const ExpectedObjective f(obj, Matrix::Zero(obj.dim(), obj.dim()), mc_samples, mc_seed);
  return expected_optimum(obj, f, budget, seed).value - expected_optimum(obj, g, budget, seed).value;
}

inline double instantaneous_regret(const ExpectedObjective& g, const Vector& target, double reference_opt) {
  return reference_opt - g(target);
}

inline double instantaneous_regret(const BenchmarkObjective& obj, const NoiseConfig& cfg, const Vector& target,
                                   double reference_opt, int mc_samples, std::uint64_t mc_seed) {
  return instantaneous_regret(ExpectedObjective(obj, cfg.exec_cov, mc_samples, mc_seed), target, reference_opt);
}

/// A method with its regularizer and beta schedule bound to a trial objective.
struct ResolvedMethod {
  AcquisitionConfig acquisition;
  double lambda = 0.0;
  double sigma_q = 0.0;
  double sigma_nu = 0.0;
};

/// sigma_q comes from the Gaussian sub-Gaussian constant under the *assumed*
/// model covariance; lambda defaults to sigma_nu^2 = obs_sigma^2 + sigma_q^2.
inline ResolvedMethod resolve_method(const ExperimentConfig& config, const AcquisitionConfig& method,
                                     const BenchmarkObjective& objective) {
  ResolvedMethod r;
  r.acquisition = method;
  const bool rkhs = objective.kind == ObjectiveKind::rkhs_expansion;
  if (rkhs) {
    r.sigma_q = subgaussian_sigma_gaussian(objective.rkhs->norm_b, se_lipschitz_constant(config.objective.kernel),
                                           method.model_cov);
    r.sigma_nu = std::sqrt(r.sigma_q * r.sigma_q + config.noise.obs_sigma * config.noise.obs_sigma);
  }
  if (method.beta.mode == BetaMode::theory) {
    if (!rkhs) throw ConfigError("theory-mode beta needs a known RKHS norm; use fixed beta for " + to_string(objective.kind));
    r.acquisition.beta.norm_b = objective.rkhs->norm_b;
    r.acquisition.beta.sigma_nu = r.sigma_nu;
  }
  if (config.lambda) {
    r.lambda = *config.lambda;
  } else {
    if (!rkhs) throw ConfigError("lambda must be set explicitly for " + to_string(objective.kind));
    r.lambda = r.sigma_nu * r.sigma_nu;
    if (!(r.lambda > 0.0))
      throw ConfigError("derived lambda is zero (noiseless model); set lambda explicitly");
  }
  return r;
}

struct RegretRow {
  int trial = 0;
  int t = 0;
  Vector target;
  Vector true_location;
  double y = 0.0;
  double beta = 0.0;
  double regret = 0.0;
  double mean_regret = 0.0;
};

struct RegretTrace {
  std::string method;
  int trial = 0;
  double lambda = 0.0;
  std::vector<RegretRow> rows;
  std::optional<Vector> recommendation;
  double recommendation_value = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string diagnostic;
};

/// One run of the optimization loop: select a target, query it, append the
/// (input, y) pair, record regret. uGP-UCB appends the localization estimate
/// (or N(x_t, model_cov) under dataset_inputs = query_model); the baselines
/// append a Dirac at the target.
inline RegretTrace run_trial(const ExperimentConfig& config, const AcquisitionConfig& method, const TrialSetup& setup) {
  const ResolvedMethod rm = resolve_method(config, method, setup.objective);
  const AcquisitionConfig& acq = rm.acquisition;
  const auto trial = static_cast<std::uint64_t>(setup.trial);
  Rng acq_rng(derive_seed(config.seed, trial, kAcquisitionStream));
  Rng query_rng(derive_seed(config.seed, trial, kQueryStream));
  const ExpectedObjective g(setup.objective, config.noise.exec_cov, config.mc_samples, setup.mc_seed);

  RegretTrace trace;
  trace.method = acq.name();
  trace.trial = setup.trial;
  trace.lambda = rm.lambda;

  auto model_input = [&](const Vector& x) {
    return acq.method == Method::ugp_ucb ? GaussianInput(x, acq.model_cov) : GaussianInput::dirac(x);
  };

  UncertainGP gp(config.objective.kernel, rm.lambda);
  double incumbent = -std::numeric_limits<double>::infinity();
  double regret_sum = 0.0;
  try {
    for (int t = 1; t <= config.iterations; ++t) {
      const double beta = beta_value(acq.beta, std::max(0.0, gp.information_gain()));
      const double inc = gp.size() == 0 ? 0.0 : incumbent;
      const Vector target = maximize_acquisition(gp, acq, beta, inc, setup.objective.bounds, acq_rng);
      QueryOutcome q = execute_query(target, setup.objective, config.noise, query_rng);

      GaussianInput input = GaussianInput::dirac(target);
      if (acq.method == Method::ugp_ucb)
        input = acq.dataset_inputs == DatasetInputs::loc_estimate ? q.loc_estimate : model_input(target);
      gp = std::move(gp).update(input, q.observation);
      incumbent = std::max(incumbent, q.observation);

      RegretRow row;
      row.trial = setup.trial;
      row.t = t;
      row.target = target;
      row.true_location = q.true_location;
      row.y = q.observation;
      row.beta = beta;
      row.regret = instantaneous_regret(g, target, setup.reference.value);
      regret_sum += row.regret;
      row.mean_regret = regret_sum / t;
      trace.rows.push_back(std::move(row));
    }
  } catch (const NumericalError& e) {
    trace.failed = true;
    trace.diagnostic = e.what();
    return trace;
  }

  if (!trace.rows.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : trace.rows) {
      const double mu = gp.posterior_mean(model_input(row.target));
      if (mu > best) {
        best = mu;
        trace.recommendation = row.target;
      }
    }
    trace.recommendation_value = g(*trace.recommendation);
  }
  return trace;
}

inline RegretTrace run_trial(const ExperimentConfig& config, const AcquisitionConfig& method, int trial) {
  return run_trial(config, method, make_trial_setup(config, trial));
}

struct MethodResult {
  std::string name;
  std::vector<RegretTrace> traces;  // indexed by trial
  std::vector<double> mean;         // per-iteration mean of mean_regret over completed trials
  std::vector<double> std;          // sample standard deviation (0 for a single trial)
  int completed = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialSetup> setups;
  std::vector<MethodResult> methods;

  bool any_failure() const {
    for (const auto& m : methods)
      for (const auto& t : m.traces)
        if (t.failed) return true;
    return false;
  }
};

inline void aggregate(MethodResult& m, int iterations) {
  m.mean.assign(static_cast<std::size_t>(iterations), 0.0);
  m.std.assign(static_cast<std::size_t>(iterations), 0.0);
  std::vector<const RegretTrace*> ok;
  for (const auto& t : m.traces)
    if (!t.failed && static_cast<int>(t.rows.size()) == iterations) ok.push_back(&t);
  m.completed = static_cast<int>(ok.size());
  if (ok.empty()) return;
  const auto n = static_cast<double>(ok.size());
  for (std::size_t i = 0; i < m.mean.size(); ++i) {
    double s = 0.0;
    for (const auto* t : ok) s += t->rows[i].mean_regret;
    const double mean = s / n;
    double ss = 0.0;
    for (const auto* t : ok) ss += (t->rows[i].mean_regret - mean) * (t->rows[i].mean_regret - mean);
    m.mean[i] = mean;
    m.std[i] = ok.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
}

/// Runs every (trial, method) pair. Per-trial seeds derive from (seed, trial),
/// so `order` only changes the execution order, never the results.
inline ExperimentResult run_experiment(const ExperimentConfig& config, std::vector<int> order = {}) {
  config.validate();
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(config.trials));
    std::iota(order.begin(), order.end(), 0);
  }
  ExperimentResult res;
  res.config = config;
  res.setups.resize(static_cast<std::size_t>(config.trials));
  for (const auto& m : config.methods) {
    MethodResult mr;
    mr.name = m.name();
    mr.traces.resize(static_cast<std::size_t>(config.trials));
    res.methods.push_back(std::move(mr));
  }
  std::optional<TrialSetup> shared;
  for (int trial : order) {
    require(trial >= 0 && trial < config.trials, "run_experiment: trial order out of range");
    TrialSetup setup;
    if (config.objective.kind == ObjectiveKind::michalewicz_4d) {
      if (!shared) shared = make_trial_setup(config, 0);
      setup = *shared;
      setup.trial = trial;
    } else {
      setup = make_trial_setup(config, trial);
    }
    for (std::size_t j = 0; j < config.methods.size(); ++j)
      res.methods[j].traces[static_cast<std::size_t>(trial)] = run_trial(config, config.methods[j], setup);
    res.setups[static_cast<std::size_t>(trial)] = std::move(setup);
  }
  for (auto& m : res.methods) aggregate(m, config.iterations);
  return res;
}

}  // namespace ugpucb

#endif  // UGPUCB_HARNESS_HPP
