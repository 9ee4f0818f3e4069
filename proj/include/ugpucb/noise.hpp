#ifndef UGPUCB_NOISE_HPP
#define UGPUCB_NOISE_HPP

#include "objectives.hpp"

#include <cmath>

namespace ugpucb {

/// Querying-process noise. exec_cov is the true execution noise, model_cov the
/// covariance the optimizer assumes, loc_cov the covariance reported with each
/// localization estimate, obs_sigma the observation-noise std.
struct NoiseConfig {
  Matrix exec_cov;
  Matrix model_cov;
  Matrix loc_cov;
  double obs_sigma = 0.0;

  /// Isotropic defaults: model std = exec std, localization std = half the exec std.
  static NoiseConfig isotropic(Eigen::Index dim, double exec_sigma, double obs_sigma) {
    const Matrix eye = Matrix::Identity(dim, dim);
    return {exec_sigma * exec_sigma * eye, exec_sigma * exec_sigma * eye, 0.25 * exec_sigma * exec_sigma * eye,
            obs_sigma};
  }

  Eigen::Index dim() const { return exec_cov.rows(); }

  void validate() const {
    const auto d = dim();
    for (const Matrix* m : {&exec_cov, &model_cov, &loc_cov}) {
      require(m->rows() == d && m->cols() == d, "NoiseConfig: covariance shapes disagree");
      // GaussianInput performs the PSD check.
      (void)GaussianInput(Vector::Zero(d), *m);
    }
    require(obs_sigma >= 0.0 && std::isfinite(obs_sigma), "NoiseConfig: obs_sigma must be >= 0");
  }
};

struct QueryOutcome {
  Vector target;
  Vector true_location;
  GaussianInput loc_estimate;
  double observation;
};

/// True location x~ = x + eps, eps ~ N(0, exec_cov); y = f(x~) + zeta; the
/// localization estimate is N(x~ + eta, loc_cov) with eta ~ N(0, loc_cov).
/// Always consumes 2d + 1 standard normals so noiseless and noisy runs stay
/// in step on the same generator.
inline QueryOutcome execute_query(const Vector& target, const BenchmarkObjective& obj, const NoiseConfig& cfg, Rng& rng) {
  require(target.size() == obj.dim() && cfg.dim() == obj.dim(), "execute_query: dimension mismatch");
  const auto d = obj.dim();
  const Vector z_exec = sample_standard_normal(rng, d);
  const double z_obs = sample_standard_normal(rng, 1)(0);
  const Vector z_loc = sample_standard_normal(rng, d);

  Vector true_location = target;
  if (!cfg.exec_cov.isZero(0.0)) true_location += psd_sqrt(cfg.exec_cov) * z_exec;
  double y = eval_objective(obj, true_location);
  if (cfg.obs_sigma > 0.0) y += cfg.obs_sigma * z_obs;
  Vector loc_mean = true_location;
  if (!cfg.loc_cov.isZero(0.0)) loc_mean += psd_sqrt(cfg.loc_cov) * z_loc;
  return {target, std::move(true_location), GaussianInput(std::move(loc_mean), cfg.loc_cov), y};
}

/// Sub-Gaussian constant of f(X) - E f(X) for Gaussian X with covariance `cov`.
inline double subgaussian_sigma_gaussian(double norm_b, double lip_k, const Matrix& cov) {
  require(norm_b >= 0.0 && lip_k >= 0.0, "subgaussian_sigma_gaussian: norm_b and lip_k must be >= 0");
  return norm_b * lip_k * std::sqrt(std::max(0.0, cov.trace()));
}

/// Same for X supported in a box with |x_i - mean_i| <= side_i / 2.
inline double subgaussian_sigma_bounded(double norm_b, double lip_k, const Vector& side_lengths) {
  require(norm_b >= 0.0 && lip_k >= 0.0, "subgaussian_sigma_bounded: norm_b and lip_k must be >= 0");
  require((side_lengths.array() >= 0.0).all(), "subgaussian_sigma_bounded: side lengths must be >= 0");
  return 0.5 * norm_b * lip_k * side_lengths.norm();
}

/// L_k with L_k^2 = sup_i d^2 k / dx_i dx'_i at x = x', which is sf2 / l_i^2 for the SE kernel.
inline double se_lipschitz_constant(const SEKernelParams& params) {
  params.validate();
  return std::sqrt(params.signal_variance) / params.lengthscales.minCoeff();
}

/// (B/2) sqrt(tr(S_model^{-1} S_exec) - d + log(|S_model| / |S_exec|)), i.e. B * sqrt(KL(exec || model) / 2).
inline double pinsker_bound(double norm_b, const Matrix& model_cov, const Matrix& exec_cov) {
  require(norm_b >= 0.0, "pinsker_bound: norm_b must be >= 0");
  require(model_cov.rows() == exec_cov.rows() && model_cov.cols() == exec_cov.cols() &&
              model_cov.rows() == model_cov.cols(),
          "pinsker_bound: covariance shapes disagree");
  const Eigen::LLT<Matrix> model(model_cov);
  const Eigen::LLT<Matrix> exec(exec_cov);
  require(model.info() == Eigen::Success && exec.info() == Eigen::Success,
          "pinsker_bound: covariances must be positive definite");
  if (model_cov == exec_cov) return 0.0;
  const auto d = static_cast<double>(model_cov.rows());
  const double tr = model.solve(exec_cov).trace();
  auto logdet = [](const Eigen::LLT<Matrix>& f) {
    return 2.0 * f.matrixLLT().diagonal().array().log().sum();
  };
  const double two_kl = tr - d + logdet(model) - logdet(exec);
  return 0.5 * norm_b * std::sqrt(std::max(0.0, two_kl));
}

}  // namespace ugpucb

#endif  // UGPUCB_NOISE_HPP
