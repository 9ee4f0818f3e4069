#ifndef UGPUCB_ACQUISITION_HPP
#define UGPUCB_ACQUISITION_HPP

#include "gp.hpp"
#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace ugpucb {

enum class BetaMode { fixed, theory };

/// beta_t: a constant, or B + sigma_nu * sqrt(2 (I_{t-1} + 1 + log(1/delta))).
struct BetaSchedule {
  BetaMode mode = BetaMode::fixed;
  double fixed_value = 3.0;
  double norm_b = 0.0;
  double sigma_nu = 0.0;
  double delta = 0.4;

  void validate() const {
    if (mode == BetaMode::fixed) {
      require(fixed_value >= 0.0 && std::isfinite(fixed_value), "BetaSchedule: fixed beta must be >= 0");
    } else {
      require(norm_b >= 0.0 && sigma_nu >= 0.0, "BetaSchedule: norm_b and sigma_nu must be >= 0");
      require(delta > 0.0 && delta < 1.0, "BetaSchedule: delta must lie in (0, 1)");
    }
  }
};

inline double beta_value(const BetaSchedule& sched, double info_gain) {
  require(info_gain >= 0.0, "beta_value: info_gain must be >= 0");
  if (sched.mode == BetaMode::fixed) return sched.fixed_value;
  return sched.norm_b + sched.sigma_nu * std::sqrt(2.0 * (info_gain + 1.0 + std::log(1.0 / sched.delta)));
}

enum class Method { ugp_ucb, igp_ucb, uei };
enum class DatasetInputs { loc_estimate, query_model };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::ugp_ucb: return "ugp_ucb";
    case Method::igp_ucb: return "igp_ucb";
    case Method::uei: return "uei";
  }
  return "?";
}

inline std::optional<Method> method_from_string(const std::string& s) {
  if (s == "ugp_ucb") return Method::ugp_ucb;
  if (s == "igp_ucb") return Method::igp_ucb;
  if (s == "uei") return Method::uei;
  return std::nullopt;
}

struct AcquisitionConfig {
  Method method = Method::ugp_ucb;
  BetaSchedule beta;
  Matrix model_cov;  // covariance of the query model N(x, model_cov)
  int candidates = 1000;
  int refinements = 20;
  std::optional<double> ut_kappa;  // unset: 3 - d
  DatasetInputs dataset_inputs = DatasetInputs::loc_estimate;
  std::string label;  // output name; defaults to the method name

  std::string name() const { return label.empty() ? to_string(method) : label; }

  double kappa(Eigen::Index d) const {
    if (ut_kappa) return *ut_kappa;
    return std::max(3.0 - static_cast<double>(d), 1.0 - static_cast<double>(d));
  }

  void validate() const {
    beta.validate();
    require(candidates >= 1, "AcquisitionConfig: candidates must be >= 1");
    require(refinements >= 0, "AcquisitionConfig: refinements must be >= 0");
    (void)GaussianInput(Vector::Zero(model_cov.rows()), model_cov);
  }
};

inline double ucb_score(const UncertainGP& gp, const GaussianInput& input, double beta) {
  require(beta >= 0.0, "ucb_score: beta must be >= 0");
  return gp.posterior_mean(input) + beta * std::sqrt(gp.posterior_variance(input));
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard expected improvement over `incumbent` for a Gaussian N(mean, variance).
inline double expected_improvement(double mean, double variance, double incumbent) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  const double gain = mean - incumbent;
  if (sigma < 1e-12) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

/// Unscented-transform sigma points x, x +/- column_i(sqrt((d + kappa) cov)) and their weights.
struct SigmaPoints {
  std::vector<Vector> points;
  std::vector<double> weights;
};

/// Columns of sqrt((d + kappa) cov), shared by every sigma-point set of one covariance.
inline Matrix unscented_root(const Matrix& cov, double kappa) {
  const double spread = static_cast<double>(cov.rows()) + kappa;
  require(spread > 0.0, "unscented transform: d + kappa must be > 0");
  require(cov.rows() == cov.cols(), "unscented transform: covariance must be square");
  return psd_sqrt(spread * cov);
}

inline SigmaPoints unscented_sigma_points(const Vector& x, const Matrix& root, double kappa) {
  const auto d = x.size();
  const double spread = static_cast<double>(d) + kappa;
  require(root.rows() == d && root.cols() == d, "unscented transform: covariance dimension mismatch");
  SigmaPoints sp;
  sp.points.reserve(static_cast<std::size_t>(2 * d + 1));
  sp.points.push_back(x);
  sp.weights.push_back(kappa / spread);
  for (Eigen::Index i = 0; i < d; ++i) {
    sp.points.push_back(x + root.col(i));
    sp.weights.push_back(0.5 / spread);
    sp.points.push_back(x - root.col(i));
    sp.weights.push_back(0.5 / spread);
  }
  return sp;
}

/// Expected improvement averaged over the sigma points of N(x, model_cov), on a point-input GP.
inline double uei_score(const UncertainGP& gp, const Vector& x, const Matrix& model_cov, double ut_kappa,
                        double incumbent) {
  const SigmaPoints sp = unscented_sigma_points(x, unscented_root(model_cov, ut_kappa), ut_kappa);
  double score = 0.0;
  for (std::size_t j = 0; j < sp.points.size(); ++j) {
    const GaussianInput p = GaussianInput::dirac(sp.points[j]);
    score += sp.weights[j] * expected_improvement(gp.posterior_mean(p), gp.posterior_variance(p), incumbent);
  }
  return score;
}

/// Batched acquisition values at targets x for one method.
inline Vector score_targets(const UncertainGP& gp, const AcquisitionConfig& cfg, double beta, double incumbent,
                            const std::vector<Vector>& xs) {
  const auto m = static_cast<Eigen::Index>(xs.size());
  Vector out(m);
  if (cfg.method == Method::uei) {
    const auto d = gp.kernel().dim();
    const double kappa = cfg.kappa(d);
    std::vector<GaussianInput> queries;
    std::vector<double> weights;
    queries.reserve(xs.size() * static_cast<std::size_t>(2 * d + 1));
    const GaussianInput point = GaussianInput::dirac(Vector::Zero(d));
    const Matrix root = unscented_root(cfg.model_cov, kappa);
    for (const Vector& x : xs) {
      SigmaPoints sp = unscented_sigma_points(x, root, kappa);
      for (auto& p : sp.points) queries.push_back(point.with_mean(std::move(p)));
      if (weights.empty()) weights = sp.weights;
    }
    const Prediction pred = gp.predict(queries);
    const auto per = static_cast<Eigen::Index>(weights.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (Eigen::Index q = 0; q < per; ++q)
        s += weights[static_cast<std::size_t>(q)] *
             expected_improvement(pred.mean(j * per + q), pred.variance(j * per + q), incumbent);
      out(j) = s;
    }
    return out;
  }
  const auto d = gp.kernel().dim();
  const GaussianInput model = cfg.method == Method::ugp_ucb ? GaussianInput(Vector::Zero(d), cfg.model_cov)
                                                            : GaussianInput::dirac(Vector::Zero(d));
  std::vector<GaussianInput> queries;
  queries.reserve(xs.size());
  for (const Vector& x : xs) queries.push_back(model.with_mean(x));
  const Prediction pred = gp.predict(queries);
  return pred.mean + beta * pred.variance.cwiseSqrt();
}

inline constexpr int kRefinementStarts = 5;

/// Random multistart: score `candidates` uniform targets, then refine the best
/// five by `refinements` sweeps of coordinate golden-section search.
inline Vector maximize_acquisition(const UncertainGP& gp, const AcquisitionConfig& cfg, double beta, double incumbent,
                                   const Bounds& bounds, Rng& rng) {
  bounds.validate();
  require(bounds.dim() == gp.kernel().dim(), "maximize_acquisition: bounds/kernel dimension mismatch");
  std::vector<Vector> cands;
  cands.reserve(static_cast<std::size_t>(cfg.candidates));
  for (int j = 0; j < cfg.candidates; ++j) cands.push_back(bounds.sample(rng));
  const Vector scores = score_targets(gp, cfg, beta, incumbent, cands);

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k = std::min<std::size_t>(kRefinementStarts, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores(static_cast<Eigen::Index>(a));
                      const double sb = scores(static_cast<Eigen::Index>(b));
                      return sa > sb || (sa == sb && a < b);
                    });
  std::vector<LocalResult> starts;
  for (std::size_t i = 0; i < k; ++i) starts.push_back({cands[order[i]], scores(static_cast<Eigen::Index>(order[i]))});

  const BatchObjective fn = [&](const std::vector<Vector>& xs) { return score_targets(gp, cfg, beta, incumbent, xs); };
  starts = golden_coordinate_ascent(fn, std::move(starts), bounds, cfg.refinements, 0.25, 0.8);

  std::size_t best = 0;
  for (std::size_t i = 1; i < starts.size(); ++i)
    if (starts[i].value > starts[best].value) best = i;
  return starts[best].x;
}

}  // namespace ugpucb

#endif  // UGPUCB_ACQUISITION_HPP
