#ifndef UGPUCB_CONFIG_HPP
#define UGPUCB_CONFIG_HPP

#include "harness.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

namespace ugpucb {

using Json = nlohmann::json;

// JSON layout of ExperimentConfig. Covariances are either a full matrix
// ([[...], ...]) or {"sigma": s} for s^2 I. Missing keys take defaults;
// unknown keys are rejected.

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline Matrix parse_cov(const Json& j, Eigen::Index d, const std::string& where) {
  if (j.is_object()) {
    check_keys(j, {"sigma"}, where);
    const double s = get_or<double>(j, "sigma", 0.0, where);
    if (s < 0.0) throw ConfigError(where + ".sigma must be >= 0");
    return s * s * Matrix::Identity(d, d);
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != d)
    throw ConfigError(where + ": expected {\"sigma\": s} or a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) throw ConfigError(where + ": ragged matrix");
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Json cov_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Json vec_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline AcquisitionConfig parse_method(const Json& j, const Matrix& default_model_cov, Eigen::Index d,
                                      const std::string& where) {
  check_keys(j, {"method", "label", "beta", "model_cov", "candidates", "refinements", "ut_kappa", "dataset_inputs"},
             where);
  AcquisitionConfig m;
  const auto name = get_or<std::string>(j, "method", "", where);
  const auto method = method_from_string(name);
  if (!method) throw ConfigError(where + ".method: expected ugp_ucb, igp_ucb or uei, got '" + name + "'");
  m.method = *method;
  m.label = get_or<std::string>(j, "label", "", where);
  m.model_cov = j.contains("model_cov") ? parse_cov(j.at("model_cov"), d, where + ".model_cov") : default_model_cov;
  m.candidates = get_or<int>(j, "candidates", m.candidates, where);
  m.refinements = get_or<int>(j, "refinements", m.refinements, where);
  if (j.contains("ut_kappa") && !j.at("ut_kappa").is_null()) m.ut_kappa = get_or<double>(j, "ut_kappa", 0.0, where);
  const auto inputs = get_or<std::string>(j, "dataset_inputs", "loc_estimate", where);
  if (inputs == "loc_estimate") {
    m.dataset_inputs = DatasetInputs::loc_estimate;
  } else if (inputs == "query_model") {
    m.dataset_inputs = DatasetInputs::query_model;
  } else {
    throw ConfigError(where + ".dataset_inputs: expected loc_estimate or query_model");
  }
  if (j.contains("beta")) {
    const Json& b = j.at("beta");
    const std::string bw = where + ".beta";
    check_keys(b, {"mode", "value", "delta"}, bw);
    const auto mode = get_or<std::string>(b, "mode", "fixed", bw);
    if (mode == "fixed") {
      m.beta.mode = BetaMode::fixed;
    } else if (mode == "theory") {
      m.beta.mode = BetaMode::theory;
    } else {
      throw ConfigError(bw + ".mode: expected fixed or theory");
    }
    m.beta.fixed_value = get_or<double>(b, "value", m.beta.fixed_value, bw);
    m.beta.delta = get_or<double>(b, "delta", m.beta.delta, bw);
  }
  return m;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j) {
  using namespace detail;
  check_keys(j, {"seed", "trials", "iterations", "objective", "noise", "methods", "lambda", "expected_optimum_budget",
                 "mc_samples"},
             "config");
  ExperimentConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
  c.trials = get_or<int>(j, "trials", c.trials, "config");
  c.iterations = get_or<int>(j, "iterations", c.iterations, "config");
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = get_or<double>(j, "lambda", 0.0, "config");
  c.expected_optimum_budget = get_or<int>(j, "expected_optimum_budget", c.expected_optimum_budget, "config");
  c.mc_samples = get_or<int>(j, "mc_samples", c.mc_samples, "config");

  const Json obj = j.contains("objective") ? j.at("objective") : Json::object();
  check_keys(obj, {"kind", "m", "kernel", "bounds"}, "objective");
  const auto kind = get_or<std::string>(obj, "kind", "rkhs_expansion", "objective");
  if (kind == "rkhs_expansion") {
    c.objective.kind = ObjectiveKind::rkhs_expansion;
  } else if (kind == "michalewicz_4d") {
    c.objective.kind = ObjectiveKind::michalewicz_4d;
    c.objective.bounds = BenchmarkObjective::michalewicz_4d().bounds;
  } else {
    throw ConfigError("objective.kind: expected rkhs_expansion or michalewicz_4d");
  }
  c.objective.m = get_or<int>(obj, "m", c.objective.m, "objective");
  if (obj.contains("bounds")) {
    const Json& b = obj.at("bounds");
    if (!b.is_array() || b.empty()) throw ConfigError("objective.bounds: expected [[lo, hi], ...]");
    c.objective.bounds.box.clear();
    for (const auto& pair : b) {
      if (!pair.is_array() || pair.size() != 2) throw ConfigError("objective.bounds: expected [lo, hi] pairs");
      c.objective.bounds.box.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  }
  const auto d = c.objective.bounds.dim();
  c.objective.kernel = SEKernelParams::isotropic(d, 0.1);
  if (obj.contains("kernel")) {
    const Json& k = obj.at("kernel");
    check_keys(k, {"signal_variance", "lengthscales"}, "objective.kernel");
    c.objective.kernel.signal_variance = get_or<double>(k, "signal_variance", 1.0, "objective.kernel");
    if (k.contains("lengthscales")) {
      const Json& l = k.at("lengthscales");
      if (l.is_number()) {
        c.objective.kernel.lengthscales = Vector::Constant(d, l.get<double>());
      } else if (l.is_array()) {
        c.objective.kernel.lengthscales.resize(static_cast<Eigen::Index>(l.size()));
        for (std::size_t i = 0; i < l.size(); ++i)
          c.objective.kernel.lengthscales(static_cast<Eigen::Index>(i)) = l[i].get<double>();
      } else {
        throw ConfigError("objective.kernel.lengthscales: expected a number or an array");
      }
    }
  }

  const Json noise = j.contains("noise") ? j.at("noise") : Json::object();
  check_keys(noise, {"exec_cov", "model_cov", "loc_cov", "obs_sigma"}, "noise");
  c.noise = NoiseConfig::isotropic(d, 0.1, 0.1);
  if (noise.contains("exec_cov")) c.noise.exec_cov = parse_cov(noise.at("exec_cov"), d, "noise.exec_cov");
  c.noise.model_cov = noise.contains("model_cov") ? parse_cov(noise.at("model_cov"), d, "noise.model_cov")
                                                  : c.noise.exec_cov;
  c.noise.loc_cov = noise.contains("loc_cov") ? parse_cov(noise.at("loc_cov"), d, "noise.loc_cov")
                                              : Matrix(0.25 * c.noise.exec_cov);
  c.noise.obs_sigma = get_or<double>(noise, "obs_sigma", c.noise.obs_sigma, "noise");

  if (j.contains("methods")) {
    const Json& ms = j.at("methods");
    if (!ms.is_array()) throw ConfigError("methods: expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i)
      c.methods.push_back(parse_method(ms[i], c.noise.model_cov, d, "methods[" + std::to_string(i) + "]"));
  } else {
    c.methods = default_methods(c.noise);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// Fully resolved configuration (every default made explicit).
inline Json config_to_json(const ExperimentConfig& c) {
  using detail::cov_to_json;
  Json j;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["iterations"] = c.iterations;
  j["lambda"] = c.lambda ? Json(*c.lambda) : Json(nullptr);
  j["expected_optimum_budget"] = c.expected_optimum_budget;
  j["mc_samples"] = c.mc_samples;
  Json bounds = Json::array();
  for (const auto& [lo, hi] : c.objective.bounds.box) bounds.push_back({lo, hi});
  j["objective"] = {{"kind", to_string(c.objective.kind)},
                    {"m", c.objective.m},
                    {"kernel",
                     {{"signal_variance", c.objective.kernel.signal_variance},
                      {"lengthscales", detail::vec_to_json(c.objective.kernel.lengthscales)}}},
                    {"bounds", bounds}};
  j["noise"] = {{"exec_cov", cov_to_json(c.noise.exec_cov)},
                {"model_cov", cov_to_json(c.noise.model_cov)},
                {"loc_cov", cov_to_json(c.noise.loc_cov)},
                {"obs_sigma", c.noise.obs_sigma}};
  Json methods = Json::array();
  for (const auto& m : c.methods) {
    Json beta = {{"mode", m.beta.mode == BetaMode::fixed ? "fixed" : "theory"}};
    if (m.beta.mode == BetaMode::fixed) {
      beta["value"] = m.beta.fixed_value;
    } else {
      beta["delta"] = m.beta.delta;
    }
    methods.push_back({{"method", to_string(m.method)},
                       {"label", m.name()},
                       {"beta", beta},
                       {"model_cov", cov_to_json(m.model_cov)},
                       {"candidates", m.candidates},
                       {"refinements", m.refinements},
                       {"ut_kappa", m.kappa(c.dim())},
                       {"dataset_inputs", m.dataset_inputs == DatasetInputs::loc_estimate ? "loc_estimate"
                                                                                           : "query_model"}});
  }
  j["methods"] = methods;
  return j;
}

}  // namespace ugpucb

#endif  // UGPUCB_CONFIG_HPP
