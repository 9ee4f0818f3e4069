#ifndef UGPUCB_GP_HPP
#define UGPUCB_GP_HPP

#include "kernels.hpp"

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace ugpucb {

struct Prediction {
  Vector mean;
  Vector variance;
};

/// Zero-mean GP over Gaussian input measures with regularizer lambda:
///   mu(P)   = k(P)^T (K + lambda I)^{-1} y
///   var(P)  = k~(P,P) - k(P)^T (K + lambda I)^{-1} k(P)
/// Dirac inputs reduce it to the ordinary point-input GP.
///
/// Values are immutable; update() returns a new state. The lower Cholesky
/// factor of (K + lambda I) is extended by bordering on every update.
class UncertainGP {
 public:
  static constexpr double kJitterFactor = 1e-10;
  static constexpr int kJitterRetries = 3;

  UncertainGP(SEKernelParams kernel, double lambda) : kernel_(std::move(kernel)), lambda_(lambda) {
    kernel_.validate();
    require(lambda_ > 0.0 && std::isfinite(lambda_), "UncertainGP: lambda must be positive");
  }

  /// Batch construction from a full factorization (used as a reference path).
  static UncertainGP fit(std::span<const GaussianInput> inputs, const Vector& y, SEKernelParams kernel,
                         double lambda) {
    require(static_cast<Eigen::Index>(inputs.size()) == y.size(), "UncertainGP::fit: inputs/observations size mismatch");
    UncertainGP gp(std::move(kernel), lambda);
    for (const auto& p : inputs) gp.check_input(p);
    Matrix a = uncertain_gram(inputs, gp.kernel_);
    a.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(a);
    double jitter = kJitterFactor * gp.kernel_.signal_variance;
    for (int r = 0; llt.info() != Eigen::Success && r < kJitterRetries; ++r, jitter *= 2.0) {
      a.diagonal().array() += jitter;
      llt.compute(a);
    }
    if (llt.info() != Eigen::Success) throw NumericalError("UncertainGP::fit: Cholesky failed after jitter");
    gp.inputs_.assign(inputs.begin(), inputs.end());
    gp.y_ = y;
    gp.chol_ = llt.matrixL();
    gp.alpha_ = llt.solve(y);
    return gp;
  }

  UncertainGP update(const GaussianInput& p, double y) const& {
    UncertainGP next(*this);
    next.append(p, y);
    return next;
  }

  UncertainGP update(const GaussianInput& p, double y) && {
    append(p, y);
    return std::move(*this);
  }

  std::size_t size() const { return inputs_.size(); }
  double lambda() const { return lambda_; }
  const SEKernelParams& kernel() const { return kernel_; }
  const std::vector<GaussianInput>& inputs() const { return inputs_; }
  const Vector& observations() const { return y_; }
  const Matrix& cholesky() const { return chol_; }

  double posterior_mean(const GaussianInput& p) const {
    check_input(p);
    if (inputs_.empty()) return 0.0;
    return cross(p).dot(alpha_);
  }

  double posterior_variance(const GaussianInput& p) const {
    check_input(p);
    const double prior = uncertain_se_kernel(p, p, kernel_);
    if (inputs_.empty()) return prior;
    Vector v = cross(p);
    chol_.triangularView<Eigen::Lower>().solveInPlace(v);
    return std::max(0.0, prior - v.squaredNorm());
  }

  /// Mean and variance at many inputs with one multi-RHS triangular solve.
  Prediction predict(std::span<const GaussianInput> queries) const {
    const auto m = static_cast<Eigen::Index>(queries.size());
    Prediction out{Vector::Zero(m), Vector(m)};
    UncertainSECache kern(kernel_);
    for (Eigen::Index j = 0; j < m; ++j) {
      check_input(queries[static_cast<std::size_t>(j)]);
      out.variance(j) = kern(queries[static_cast<std::size_t>(j)], queries[static_cast<std::size_t>(j)]);
    }
    if (inputs_.empty()) return out;
    Matrix ks = uncertain_cross(inputs_, queries, kernel_);
    out.mean = ks.transpose() * alpha_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
    out.variance = (out.variance - ks.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    return out;
  }

  /// 0.5 * log|I + K / lambda| from the Cholesky diagonal.
  double information_gain() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) s += std::log(chol_(i, i) * chol_(i, i) / lambda_);
    return 0.5 * s;
  }

 private:
  void check_input(const GaussianInput& p) const {
    if (p.dim() != kernel_.dim())
      throw InvalidArgument("UncertainGP: input dimension " + std::to_string(p.dim()) +
                            " does not match kernel dimension " + std::to_string(kernel_.dim()));
  }

  Vector cross(const GaussianInput& p) const { return uncertain_cross(inputs_, std::span(&p, 1), kernel_).col(0); }

  void append(const GaussianInput& p, double y) {
    check_input(p);
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Vector border = cross(p);
    const double diag = uncertain_se_kernel(p, p, kernel_) + lambda_;
    if (n > 0) chol_.triangularView<Eigen::Lower>().solveInPlace(border);
    double pivot2 = diag - border.squaredNorm();
    double jitter = kJitterFactor * kernel_.signal_variance;
    for (int r = 0; !(pivot2 > 0.0) && r < kJitterRetries; ++r, jitter *= 2.0)
      pivot2 = diag + jitter - border.squaredNorm();
    if (!(pivot2 > 0.0) || !std::isfinite(pivot2))
      throw NumericalError("UncertainGP::update: non-positive Cholesky pivot after jitter");

    chol_.conservativeResize(n + 1, n + 1);
    chol_.col(n).setZero();
    chol_.row(n).head(n) = border.transpose();
    chol_(n, n) = std::sqrt(pivot2);
    inputs_.push_back(p);
    y_.conservativeResize(n + 1);
    y_(n) = y;
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(y_);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
  }

  SEKernelParams kernel_;
  double lambda_;
  std::vector<GaussianInput> inputs_;
  Vector y_ = Vector(0);
  Matrix chol_ = Matrix(0, 0);
  Vector alpha_ = Vector(0);
};

}  // namespace ugpucb

#endif  // UGPUCB_GP_HPP
