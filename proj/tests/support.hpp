#ifndef UGPUCB_TESTS_SUPPORT_HPP
#define UGPUCB_TESTS_SUPPORT_HPP

// Shared fixtures and independent reference implementations for the tests.
// Oracles here deliberately avoid the library's kernel and GP code paths.

#include <ugpucb/ugpucb.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

using ugpucb::Matrix;
using ugpucb::Rng;
using ugpucb::Vector;

inline double unif(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector unif_vec(Rng& rng, Eigen::Index d, double lo = 0.0, double hi = 1.0) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = unif(rng, lo, hi);
  return v;
}

inline Matrix random_spd(Rng& rng, Eigen::Index d, double scale) {
  std::normal_distribution<double> n01;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = scale * n01(rng);
  Matrix s = a * a.transpose();
  s.diagonal().array() += 1e-4 * scale * scale;
  return s;
}

/// Plain scalar-loop SE kernel.
inline double naive_se(const Vector& a, const Vector& b, const Vector& l, double sf2) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) r += (a(i) - b(i)) * (a(i) - b(i)) / (l(i) * l(i));
  return sf2 * std::exp(-0.5 * r);
}

/// The closed-form uncertain SE kernel written directly with inverse and determinant.
inline double direct_uncertain_se(const Vector& a, const Matrix& sa, const Vector& b, const Matrix& sb, const Vector& l,
                                  double sf2) {
  const Eigen::Index d = a.size();
  Matrix w = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) w(i, i) = l(i) * l(i);
  const Matrix s = sa + sb;
  const Vector diff = a - b;
  const double q = diff.dot((w + s).inverse() * diff);
  const double det = (Matrix::Identity(d, d) + w.inverse() * s).determinant();
  return sf2 * std::exp(-0.5 * q) / std::sqrt(det);
}

/// Point-input GP with explicit LU solves.
struct PointGP {
  std::vector<Vector> x;
  Vector y;
  Vector l;
  double sf2;
  double lambda;

  Matrix gram() const {
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = naive_se(x[i], x[j], l, sf2);
    return k;
  }

  Vector kvec(const Vector& q) const {
    Vector k(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) k(static_cast<Eigen::Index>(i)) = naive_se(x[i], q, l, sf2);
    return k;
  }

  Matrix reg() const {
    Matrix a = gram();
    a.diagonal().array() += lambda;
    return a;
  }

  double mean(const Vector& q) const {
    if (x.empty()) return 0.0;
    return kvec(q).dot(reg().fullPivLu().solve(y));
  }

  double variance(const Vector& q) const {
    const double prior = sf2;
    if (x.empty()) return prior;
    const Vector k = kvec(q);
    return std::max(0.0, prior - k.dot(reg().fullPivLu().solve(k)));
  }
};

inline std::vector<ugpucb::GaussianInput> random_inputs(Rng& rng, int n, Eigen::Index d, double cov_scale) {
  std::vector<ugpucb::GaussianInput> out;
  for (int i = 0; i < n; ++i) {
    if (cov_scale == 0.0) {
      out.push_back(ugpucb::GaussianInput::dirac(unif_vec(rng, d)));
    } else {
      out.emplace_back(unif_vec(rng, d), random_spd(rng, d, cov_scale));
    }
  }
  return out;
}

}  // namespace testing_support

#endif  // UGPUCB_TESTS_SUPPORT_HPP
