#ifndef UGPUCB_KERNELS_HPP
#define UGPUCB_KERNELS_HPP

#include "common.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ugpucb {

/// Squared-exponential kernel hyperparameters: sf2 * exp(-0.5 * sum((x_i - x'_i)^2 / l_i^2)).
struct SEKernelParams {
  double signal_variance = 1.0;
  Vector lengthscales;

  static SEKernelParams isotropic(Eigen::Index dim, double lengthscale, double signal_variance = 1.0) {
    return {signal_variance, Vector::Constant(dim, lengthscale)};
  }

  Eigen::Index dim() const { return lengthscales.size(); }

  void validate() const {
    require(signal_variance > 0.0, "SEKernelParams: signal_variance must be > 0");
    require(lengthscales.size() > 0, "SEKernelParams: lengthscales must be non-empty");
    require((lengthscales.array() > 0.0).all(), "SEKernelParams: lengthscales must be > 0");
  }
};

/// A Gaussian probability measure on R^d. Zero covariance is the Dirac measure at the mean.
class GaussianInput {
 public:
  GaussianInput() = default;

  GaussianInput(Vector mean, const Matrix& covariance) : mean_(std::move(mean)) {
    const auto d = mean_.size();
    if (covariance.rows() != d || covariance.cols() != d)
      throw InvalidArgument("GaussianInput: covariance must be " + std::to_string(d) + "x" + std::to_string(d));
    require(covariance.allFinite() && mean_.allFinite(), "GaussianInput: non-finite entries");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
            "GaussianInput: covariance is not symmetric");
    cov_ = 0.5 * (covariance + covariance.transpose());
    dirac_ = cov_.isZero(0.0);
    if (!dirac_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(cov_);
      const Vector& ev = es.eigenvalues();
      require(ev.minCoeff() >= -1e-9 * scale, "GaussianInput: covariance is not positive semidefinite");
      if (ev.minCoeff() < 0.0) {
        cov_ = es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
        cov_ = 0.5 * (cov_ + cov_.transpose());
        dirac_ = cov_.isZero(0.0);
      }
    }
  }

  static GaussianInput dirac(Vector mean) {
    const auto d = mean.size();
    return GaussianInput(std::move(mean), Matrix::Zero(d, d));
  }

  /// Same (already validated) covariance, different mean.
  GaussianInput with_mean(Vector mean) const {
    require(mean.size() == dim(), "GaussianInput::with_mean: dimension mismatch");
    GaussianInput out;
    out.mean_ = std::move(mean);
    out.cov_ = cov_;
    out.dirac_ = dirac_;
    return out;
  }

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }
  bool is_dirac() const { return dirac_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
  bool dirac_ = true;
};

inline double se_kernel(const Vector& x, const Vector& x2, const SEKernelParams& params) {
  require(x.size() == params.dim() && x2.size() == params.dim(),
          "se_kernel: dimension mismatch with kernel parameters");
  double q = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = (x(i) - x2(i)) / params.lengthscales(i);
    q += r * r;
  }
  return params.signal_variance * std::exp(-0.5 * q);
}

namespace detail {

// Factorization of I + W^{-1/2} S W^{-1/2} for a fixed covariance sum S.
// Both the determinant and the quadratic form of the uncertain SE kernel come
// from this well-conditioned matrix rather than from W + S directly.
class PairFactor {
 public:
  PairFactor(const Matrix& cov_sum, const SEKernelParams& params) {
    const Vector inv_l = params.lengthscales.cwiseInverse();
    Matrix scaled = inv_l.asDiagonal() * cov_sum * inv_l.asDiagonal();
    scaled.diagonal().array() += 1.0;
    llt_.compute(scaled);
    if (llt_.info() != Eigen::Success)
      throw NumericalError("uncertain_se_kernel: (W + S) is not positive definite");
    const Matrix& l = llt_.matrixLLT();
    double sqrt_det = 1.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) sqrt_det *= l(i, i);
    if (!(sqrt_det > 0.0) || !std::isfinite(sqrt_det))
      throw NumericalError("uncertain_se_kernel: degenerate determinant");
    scale_ = params.signal_variance / sqrt_det;
    // Fold the lengthscales into L^{-1} so evaluation is one small lower-triangular product.
    const auto d = cov_sum.rows();
    linv_ = llt_.matrixL().solve(Matrix::Identity(d, d)) * inv_l.asDiagonal();
  }

  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    const auto d = linv_.rows();
    double q = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j <= i; ++j) s += linv_(i, j) * (a(j) - b(j));
      q += s * s;
    }
    return scale_ * std::exp(-0.5 * q);
  }

  // L^{-1} W^{-1/2}: the kernel is scale() * exp(-0.5 |whiten() (a - b)|^2).
  const Matrix& whiten() const { return linv_; }
  double scale() const { return scale_; }

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix linv_;
  double scale_ = 0.0;
};

}  // namespace detail

inline void check_dims(const GaussianInput& p, const SEKernelParams& params, const char* who) {
  if (p.dim() != params.dim()) throw InvalidArgument(std::string(who) + ": dimension mismatch with kernel parameters");
}

/// Closed-form inner product of the SE mean embeddings of two Gaussians:
///   sf2 * exp(-0.5 d^T (W + S + S')^{-1} d) / |I + W^{-1}(S + S')|^{1/2},  W = diag(l^2).
/// Two Dirac inputs take the plain se_kernel path, so the reduction is exact.
inline double uncertain_se_kernel(const GaussianInput& p, const GaussianInput& q, const SEKernelParams& params) {
  check_dims(p, params, "uncertain_se_kernel");
  check_dims(q, params, "uncertain_se_kernel");
  if (p.is_dirac() && q.is_dirac()) return se_kernel(p.mean(), q.mean(), params);
  const detail::PairFactor factor(p.covariance() + q.covariance(), params);
  return factor(p.mean(), q.mean());
}

/// Evaluates k~ between many pairs, refactoring only when the covariance sum changes.
class UncertainSECache {
 public:
  explicit UncertainSECache(const SEKernelParams& params) : params_(&params) {}

  double operator()(const GaussianInput& p, const GaussianInput& q) {
    if (p.is_dirac() && q.is_dirac()) return se_kernel(p.mean(), q.mean(), *params_);
    check_dims(p, *params_, "uncertain_se_kernel");
    check_dims(q, *params_, "uncertain_se_kernel");
    if (!factor_ || p.covariance() != cov_p_ || q.covariance() != cov_q_) {
      cov_p_ = p.covariance();
      cov_q_ = q.covariance();
      factor_.emplace(cov_p_ + cov_q_, *params_);
    }
    return (*factor_)(p.mean(), q.mean());
  }

 private:
  const SEKernelParams* params_;
  Matrix cov_p_, cov_q_;
  std::optional<detail::PairFactor> factor_;
};

namespace detail {

// Maximal runs [begin, end) of consecutive inputs sharing one covariance.
inline std::vector<std::pair<std::size_t, std::size_t>> covariance_runs(std::span<const GaussianInput> xs) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= xs.size(); ++i) {
    if (i == xs.size() || xs[i].is_dirac() != xs[begin].is_dirac() ||
        (!xs[i].is_dirac() && xs[i].covariance() != xs[begin].covariance())) {
      if (i > begin) runs.emplace_back(begin, i);
      begin = i;
    }
  }
  return runs;
}

}  // namespace detail

/// Cross-covariance block K(i, j) = k~(rows[i], cols[j]).
///
/// Inputs are grouped into runs of equal covariance; within a pair of runs the
/// kernel is scale * exp(-0.5 |T a - T b|^2) for one whitening map T, so each
/// block is a batched squared distance followed by a vectorized exp.
inline Matrix uncertain_cross(std::span<const GaussianInput> rows, std::span<const GaussianInput> cols,
                              const SEKernelParams& params) {
  const auto d = params.dim();
  for (const auto& p : rows) check_dims(p, params, "uncertain_cross");
  for (const auto& p : cols) check_dims(p, params, "uncertain_cross");
  Matrix k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  const auto row_runs = detail::covariance_runs(rows);
  const auto col_runs = detail::covariance_runs(cols);
  Matrix ta, tb;
  for (const auto& [r0, r1] : row_runs) {
    for (const auto& [c0, c1] : col_runs) {
      Matrix whiten;
      double scale = params.signal_variance;
      if (rows[r0].is_dirac() && cols[c0].is_dirac()) {
        whiten = params.lengthscales.cwiseInverse().asDiagonal();
      } else {
        const detail::PairFactor f(rows[r0].covariance() + cols[c0].covariance(), params);
        whiten = f.whiten();
        scale = f.scale();
      }
      const auto nr = static_cast<Eigen::Index>(r1 - r0);
      const auto nc = static_cast<Eigen::Index>(c1 - c0);
      ta.resize(d, nr);
      tb.resize(d, nc);
      for (Eigen::Index i = 0; i < nr; ++i) ta.col(i) = whiten * rows[r0 + static_cast<std::size_t>(i)].mean();
      for (Eigen::Index j = 0; j < nc; ++j) tb.col(j) = whiten * cols[c0 + static_cast<std::size_t>(j)].mean();
      auto block = k.block(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(c0), nr, nc);
      for (Eigen::Index j = 0; j < nc; ++j) {
        for (Eigen::Index i = 0; i < nr; ++i) {
          double q = 0.0;
          for (Eigen::Index c = 0; c < d; ++c) {
            const double diff = ta(c, i) - tb(c, j);
            q += diff * diff;
          }
          block(i, j) = -0.5 * q;
        }
      }
      block = scale * block.array().exp();
    }
  }
  return k;
}

inline Matrix uncertain_gram(std::span<const GaussianInput> inputs, const SEKernelParams& params) {
  Matrix k = uncertain_cross(inputs, inputs, params);
  return 0.5 * (k + k.transpose());
}

/// f = sum_i alpha_i k(., x_i) with its RKHS norm B = sqrt(alpha^T K alpha).
struct RKHSObjective {
  Matrix support_points;  // m x d
  Vector weights;         // m
  SEKernelParams kernel;
  double norm_b = 0.0;

  Eigen::Index dim() const { return support_points.cols(); }
  Eigen::Index size() const { return support_points.rows(); }

  double operator()(const Vector& x) const {
    require(x.size() == dim(), "RKHSObjective: dimension mismatch");
    double v = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i)
      v += weights(i) * se_kernel(x, support_points.row(i).transpose(), kernel);
    return v;
  }

  Matrix gram() const {
    Matrix k(size(), size());
    for (Eigen::Index i = 0; i < size(); ++i)
      for (Eigen::Index j = 0; j < size(); ++j)
        k(i, j) = se_kernel(support_points.row(i).transpose(), support_points.row(j).transpose(), kernel);
    return k;
  }

  static RKHSObjective from_expansion(Matrix support, Vector weights, SEKernelParams kernel) {
    kernel.validate();
    require(support.cols() == kernel.dim(), "RKHSObjective: support dimension mismatch");
    require(support.rows() == weights.size(), "RKHSObjective: weights/support size mismatch");
    RKHSObjective f{std::move(support), std::move(weights), std::move(kernel), 0.0};
    f.norm_b = std::sqrt(std::max(0.0, f.weights.dot(f.gram() * f.weights)));
    return f;
  }
};

/// E_P[f] = <mu_P, f> = sum_i alpha_i k~(P, delta_{x_i}), exact for Gaussian P.
inline double expected_rkhs_value(const RKHSObjective& f, const GaussianInput& p) {
  check_dims(p, f.kernel, "expected_rkhs_value");
  if (p.is_dirac()) return f(p.mean());
  const detail::PairFactor factor(p.covariance(), f.kernel);
  double v = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    v += f.weights(i) * factor(p.mean(), f.support_points.row(i).transpose());
  return v;
}

}  // namespace ugpucb

#endif  // UGPUCB_KERNELS_HPP
