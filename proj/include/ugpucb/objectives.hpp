#ifndef UGPUCB_OBJECTIVES_HPP
#define UGPUCB_OBJECTIVES_HPP

#include "kernels.hpp"
#include "optimize.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace ugpucb {

enum class ObjectiveKind { rkhs_expansion, michalewicz_4d };

inline std::string to_string(ObjectiveKind k) {
  return k == ObjectiveKind::rkhs_expansion ? "rkhs_expansion" : "michalewicz_4d";
}

inline constexpr int kMichalewiczSteepness = 10;

/// Negated Michalewicz function, +sum_i sin(x_i) sin^{2m}(i x_i^2 / pi), so that it is maximized.
inline double michalewicz(const Vector& x, int steepness = kMichalewiczSteepness) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = std::sin(static_cast<double>(i + 1) * x(i) * x(i) / std::numbers::pi);
    v += std::sin(x(i)) * std::pow(s, 2 * steepness);
  }
  return v;
}

struct BenchmarkObjective {
  ObjectiveKind kind = ObjectiveKind::rkhs_expansion;
  std::optional<RKHSObjective> rkhs;
  Bounds bounds;

  static BenchmarkObjective from_rkhs(RKHSObjective f, Bounds bounds) {
    bounds.validate();
    require(f.dim() == bounds.dim(), "BenchmarkObjective: bounds/objective dimension mismatch");
    return {ObjectiveKind::rkhs_expansion, std::move(f), std::move(bounds)};
  }

  static BenchmarkObjective michalewicz_4d() {
    return {ObjectiveKind::michalewicz_4d, std::nullopt, Bounds::uniform(4, 0.0, std::numbers::pi)};
  }

  Eigen::Index dim() const { return bounds.dim(); }
};

/// alpha_i ~ U[-1,1] and x_i ~ U(bounds), drawn interleaved per atom from a seeded generator.
/// `fixed_weight` overrides every alpha_i (degenerate-objective hook).
inline RKHSObjective sample_rkhs_objective(std::uint64_t seed, int m, const Bounds& bounds, const SEKernelParams& kernel,
                                           std::optional<double> fixed_weight = std::nullopt) {
  require(m >= 1, "sample_rkhs_objective: m must be >= 1");
  bounds.validate();
  kernel.validate();
  require(kernel.dim() == bounds.dim(), "sample_rkhs_objective: kernel/bounds dimension mismatch");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix support(m, bounds.dim());
  Vector weights(m);
  for (int i = 0; i < m; ++i) {
    weights(i) = unit(rng);
    support.row(i) = bounds.sample(rng).transpose();
  }
  if (fixed_weight) weights.setConstant(*fixed_weight);
  return RKHSObjective::from_expansion(std::move(support), std::move(weights), kernel);
}

inline double eval_objective(const BenchmarkObjective& obj, const Vector& x) {
  require(x.size() == obj.dim(), "eval_objective: dimension mismatch");
  if (obj.kind == ObjectiveKind::rkhs_expansion) return (*obj.rkhs)(x);
  return michalewicz(x);
}

struct McEstimate {
  double mean;
  double std_error;
};

/// g(x) = E[f(x + eps)], eps ~ N(0, exec_cov). Analytic for RKHS expansions;
/// Monte-Carlo with a fixed set of draws otherwise, so g is a deterministic
/// function of x for a given seed.
class ExpectedObjective {
 public:
  ExpectedObjective(const BenchmarkObjective& obj, const Matrix& exec_cov, int mc_samples, std::uint64_t seed)
      : obj_(&obj), exec_(Vector::Zero(obj.dim()), exec_cov) {
    if (obj.kind == ObjectiveKind::rkhs_expansion) {
      if (!exec_.is_dirac()) rkhs_factor_.emplace(exec_.covariance(), obj.rkhs->kernel);
    } else {
      require(mc_samples >= 1, "expected_objective: mc_samples must be >= 1 for Monte-Carlo objectives");
      if (!exec_.is_dirac()) {
        Rng rng(seed);
        draws_ = psd_sqrt(exec_.covariance()) * [&] {
          Matrix z(obj.dim(), mc_samples);
          for (int j = 0; j < mc_samples; ++j) z.col(j) = sample_standard_normal(rng, obj.dim());
          return z;
        }();
      }
    }
  }

  McEstimate estimate(const Vector& x) const {
    require(x.size() == obj_->dim(), "expected_objective: dimension mismatch");
    if (exec_.is_dirac()) return {eval_objective(*obj_, x), 0.0};
    if (obj_->kind == ObjectiveKind::rkhs_expansion) {
      const auto& f = *obj_->rkhs;
      double v = 0.0;
      for (Eigen::Index i = 0; i < f.size(); ++i) v += f.weights(i) * (*rkhs_factor_)(x, f.support_points.row(i).transpose());
      return {v, 0.0};
    }
    const auto n = draws_.cols();
    double sum = 0.0, sum2 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = eval_objective(*obj_, x + draws_.col(j));
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / static_cast<double>(n - 1)) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }

  double operator()(const Vector& x) const { return estimate(x).mean; }

  bool analytic() const { return exec_.is_dirac() || obj_->kind == ObjectiveKind::rkhs_expansion; }

 private:
  const BenchmarkObjective* obj_;
  GaussianInput exec_;
  std::optional<detail::PairFactor> rkhs_factor_;  // same computation as expected_rkhs_value
  Matrix draws_;
};

inline double expected_objective(const BenchmarkObjective& obj, const Vector& x, const Matrix& exec_cov, int mc_samples,
                                 std::uint64_t seed) {
  return ExpectedObjective(obj, exec_cov, mc_samples, seed)(x);
}

inline McEstimate expected_objective_mc(const BenchmarkObjective& obj, const Vector& x, const Matrix& exec_cov,
                                        int mc_samples, std::uint64_t seed) {
  return ExpectedObjective(obj, exec_cov, mc_samples, seed).estimate(x);
}

struct OptimumResult {
  Vector location;
  double value = 0.0;
  double search_value = 0.0;  // best raw grid / random-search value before local polishing
  std::string search;         // "grid" or "random"
  int points_scored = 0;
  // Upper bound on max g - value; +inf when no bound is available.
  double tolerance = std::numeric_limits<double>::infinity();
};

inline constexpr int kGridPointsPerAxis = 201;

/// Maximizes g over the bounds: a 201-per-axis grid for d <= 2, otherwise
/// `search_budget` seeded uniform points; the winner is then polished by a
/// short coordinate golden-section ascent.
inline OptimumResult expected_optimum(const BenchmarkObjective& obj, const ExpectedObjective& g, int search_budget,
                                      std::uint64_t seed) {
  require(search_budget >= 1, "expected_optimum: search_budget must be >= 1");
  const auto d = obj.dim();
  OptimumResult out;
  out.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& x) {
    const double v = g(x);
    ++out.points_scored;
    if (v > out.value) {
      out.value = v;
      out.location = x;
    }
  };
  double cell = 0.0;
  if (d <= 2) {
    out.search = "grid";
    const int n = kGridPointsPerAxis;
    Vector x(d);
    const int total = d == 1 ? n : n * n;
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      for (Eigen::Index i = 0; i < d; ++i) {
        const int k = rem % n;
        rem /= n;
        x(i) = obj.bounds.lower(i) + obj.bounds.width(i) * static_cast<double>(k) / (n - 1);
      }
      consider(x);
    }
    cell = 1.0 / (n - 1);
  } else {
    out.search = "random";
    Rng rng(seed);
    for (int j = 0; j < search_budget; ++j) consider(obj.bounds.sample(rng));
    cell = std::pow(static_cast<double>(search_budget), -1.0 / static_cast<double>(d));
  }
  out.search_value = out.value;

  const BatchObjective batch = [&](const std::vector<Vector>& xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t j = 0; j < xs.size(); ++j) v(static_cast<Eigen::Index>(j)) = g(xs[j]);
    return v;
  };
  auto polished = golden_coordinate_ascent(batch, {{out.location, out.value}}, obj.bounds, 6, cell, 0.5, 20);
  out.location = polished.front().x;
  out.value = polished.front().value;

  if (obj.kind == ObjectiveKind::rkhs_expansion && out.search == "grid") {
    // g has RKHS norm <= B, hence Lipschitz constant <= B * sf / min(l); the
    // grid leaves every point within half a cell diagonal of a scored node.
    const auto& f = *obj.rkhs;
    double half_diag2 = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) half_diag2 += std::pow(0.5 * obj.bounds.width(i) * cell, 2);
    const double lip = f.norm_b * std::sqrt(f.kernel.signal_variance) / f.kernel.lengthscales.minCoeff();
    out.tolerance = std::max(0.0, lip * std::sqrt(half_diag2) - (out.value - out.search_value));
  }
  return out;
}

inline OptimumResult expected_optimum(const BenchmarkObjective& obj, const Matrix& exec_cov, int search_budget,
                                      std::uint64_t seed, int mc_samples = 1000) {
  const ExpectedObjective g(obj, exec_cov, mc_samples, derive_seed(seed, 0x6d63));
  return expected_optimum(obj, g, search_budget, seed);
}

}  // namespace ugpucb

#endif  // UGPUCB_OBJECTIVES_HPP
