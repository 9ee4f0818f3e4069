#ifndef UGPUCB_IO_HPP
#define UGPUCB_IO_HPP

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ugpucb {

/// File-system failure, with the offending path in the message.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceHeader = "trial,t,method,x_target,x_true,y,beta,regret,mean_regret";

/// Method label made safe for use as a file name.
inline std::string file_stem(const std::string& label) {
  std::string s = label;
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  return s.empty() ? std::string("method") : s;
}

inline void write_trace_csv(std::ostream& out, const MethodResult& m) {
  out << kTraceHeader << '\n';
  for (const auto& trace : m.traces) {
    for (const auto& r : trace.rows) {
      out << r.trial << ',' << r.t << ',' << m.name << ',' << join_vector(r.target, ';') << ','
          << join_vector(r.true_location, ';') << ',' << format_double(r.y) << ',' << format_double(r.beta) << ','
          << format_double(r.regret) << ',' << format_double(r.mean_regret) << '\n';
    }
  }
}

namespace detail {

inline Json optimum_to_json(const OptimumResult& o) {
  return {{"location", vec_to_json(o.location)},
          {"value", o.value},
          {"search_value", o.search_value},
          {"search", o.search},
          {"points_scored", o.points_scored},
          // +inf (random search, no guarantee) is written as null.
          {"tolerance", std::isfinite(o.tolerance) ? Json(o.tolerance) : Json(nullptr)}};
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  return out;
}

}  // namespace detail

inline Json aggregate_json(const ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  Json j;
  j["config"] = config_to_json(c);
  Json seeds = Json::array();
  for (int t = 0; t < c.trials; ++t) {
    const auto tr = static_cast<std::uint64_t>(t);
    seeds.push_back({{"trial", t},
                     {"objective", derive_seed(c.seed, tr, kObjectiveStream)},
                     {"acquisition", derive_seed(c.seed, tr, kAcquisitionStream)},
                     {"query", derive_seed(c.seed, tr, kQueryStream)},
                     {"mc", res.setups[static_cast<std::size_t>(t)].mc_seed}});
  }
  j["seeds"] = seeds;

  Json trials = Json::array();
  for (const auto& s : res.setups) {
    Json t = {{"trial", s.trial},
              {"rho_q", s.rho_q},
              {"reference_optimum", detail::optimum_to_json(s.reference)},
              {"noiseless_optimum", detail::optimum_to_json(s.noiseless)}};
    if (s.objective.rkhs) t["norm_b"] = s.objective.rkhs->norm_b;
    trials.push_back(t);
  }
  j["trials"] = trials;

  Json methods = Json::array();
  for (const auto& m : res.methods) {
    Json per_trial = Json::array();
    for (const auto& tr : m.traces) {
      Json t = {{"trial", tr.trial}, {"lambda", tr.lambda}, {"failed", tr.failed}};
      if (tr.failed) t["diagnostic"] = tr.diagnostic;
      if (tr.recommendation) {
        t["recommendation"] = detail::vec_to_json(*tr.recommendation);
        t["recommendation_value"] = tr.recommendation_value;
      }
      per_trial.push_back(t);
    }
    methods.push_back({{"name", m.name},
                       {"completed_trials", m.completed},
                       {"mean_regret_mean", m.mean},
                       {"mean_regret_std", m.std},
                       {"trials", per_trial}});
  }
  j["methods"] = methods;
  return j;
}

/// Writes <label>.csv per method and aggregate.json into `dir` (created if needed).
inline void write_outputs(const std::filesystem::path& dir, const ExperimentResult& res) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& m : res.methods) {
    const auto path = dir / (file_stem(m.name) + ".csv");
    auto out = detail::open_out(path);
    write_trace_csv(out, m);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  const auto path = dir / "aggregate.json";
  auto out = detail::open_out(path);
  out << aggregate_json(res).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct PlotRow {
  std::string method;
  int t = 0;
  int trials = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Reads every trace CSV in `dir` (files without the trace header are
/// skipped) and reduces mean_regret per (method, t) across trials.
inline std::vector<PlotRow> plot_rows(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("trace directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot read '" + f.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) continue;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 9) throw IoError(f.string() + ":" + std::to_string(lineno) + ": expected 9 fields");
      try {
        groups[{cells[2], std::stoi(cells[1])}].push_back(std::stod(cells[8]));
      } catch (const std::exception&) {
        throw IoError(f.string() + ":" + std::to_string(lineno) + ": malformed number");
      }
    }
  }
  std::vector<PlotRow> rows;
  for (const auto& [key, vals] : groups) {
    PlotRow r{key.first, key.second, static_cast<int>(vals.size()), 0.0, 0.0};
    for (double v : vals) r.mean += v;
    r.mean /= static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - r.mean) * (v - r.mean);
      r.std = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    rows.push_back(r);
  }
  return rows;
}

inline void write_plot_data(const std::filesystem::path& traces, const std::filesystem::path& out_csv) {
  const auto rows = plot_rows(traces);
  if (out_csv.has_parent_path()) std::filesystem::create_directories(out_csv.parent_path());
  auto out = detail::open_out(out_csv);
  out << "method,t,trials,mean,std\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.t << ',' << r.trials << ',' << format_double(r.mean) << ',' << format_double(r.std)
        << '\n';
  if (!out) throw IoError("write failed for '" + out_csv.string() + "'");
}

}  // namespace ugpucb

#endif  // UGPUCB_IO_HPP
