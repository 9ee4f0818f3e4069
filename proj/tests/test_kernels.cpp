#include "support.hpp"

#include <gtest/gtest.h>

using namespace ugpucb;
using namespace testing_support;

TEST(SEKernel, IdentityIsSignalVariance) {
  const auto p = SEKernelParams::isotropic(2, 0.3);
  Vector x(2);
  x << 0.3, 0.7;
  EXPECT_EQ(se_kernel(x, x, p), 1.0);
}

TEST(SEKernel, UnitDistance) {
  const auto p = SEKernelParams::isotropic(1, 1.0);
  const Vector a = Vector::Constant(1, 0.0);
  const Vector b = Vector::Constant(1, 1.0);
  EXPECT_NEAR(se_kernel(a, b, p), 0.6065306597126334, 1e-15);
  EXPECT_EQ(se_kernel(a, b, p), se_kernel(b, a, p));
}

TEST(SEKernel, MatchesScalarLoop) {
  Rng rng(1);
  const auto p = SEKernelParams::isotropic(2, 0.1);
  for (int i = 0; i < 20; ++i) {
    const Vector a = unif_vec(rng, 2), b = unif_vec(rng, 2);
    EXPECT_NEAR(se_kernel(a, b, p), naive_se(a, b, p.lengthscales, 1.0), 1e-14);
  }
}

TEST(SEKernel, AnisotropicAndSignalVariance) {
  Rng rng(2);
  SEKernelParams p{2.5, Vector(3)};
  p.lengthscales << 0.2, 0.5, 1.5;
  for (int i = 0; i < 20; ++i) {
    const Vector a = unif_vec(rng, 3), b = unif_vec(rng, 3);
    const double k = se_kernel(a, b, p);
    EXPECT_NEAR(k, naive_se(a, b, p.lengthscales, 2.5), 1e-14);
    EXPECT_LE(k, 2.5);
  }
}

TEST(SEKernel, DimensionMismatchThrows) {
  const auto p = SEKernelParams::isotropic(2, 0.1);
  EXPECT_THROW(se_kernel(Vector::Zero(3), Vector::Zero(3), p), InvalidArgument);
  EXPECT_THROW(se_kernel(Vector::Zero(2), Vector::Zero(3), p), InvalidArgument);
}

TEST(SEKernelParams, RejectsNonPositive) {
  EXPECT_THROW(SEKernelParams::isotropic(2, 0.0).validate(), InvalidArgument);
  EXPECT_THROW((SEKernelParams{0.0, Vector::Ones(2)}.validate()), InvalidArgument);
  EXPECT_THROW((SEKernelParams{1.0, Vector()}.validate()), InvalidArgument);
}

TEST(GaussianInput, SymmetrizesRoundoff) {
  Matrix c(2, 2);
  c << 0.01, 0.002 + 1e-15, 0.002, 0.02;
  const GaussianInput p(Vector::Zero(2), c);
  EXPECT_EQ(p.covariance()(0, 1), p.covariance()(1, 0));
}

TEST(GaussianInput, ClampsTinyNegativeEigenvalues) {
  Matrix c(2, 2);
  c << 1.0, 1.0, 1.0, 1.0 - 1e-13;  // eigenvalue ~ -5e-14
  const GaussianInput p(Vector::Zero(2), c);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.covariance());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-15);  // exact zero up to reconstruction roundoff
}

TEST(GaussianInput, RejectsInvalid) {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(GaussianInput(Vector::Zero(2), asym), InvalidArgument);
  EXPECT_THROW(GaussianInput(Vector::Zero(2), -Matrix::Identity(2, 2)), InvalidArgument);
  EXPECT_THROW(GaussianInput(Vector::Zero(3), Matrix::Identity(2, 2)), InvalidArgument);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(GaussianInput(Vector::Zero(2), nan), InvalidArgument);
}

TEST(GaussianInput, ZeroCovarianceIsDirac) {
  EXPECT_TRUE(GaussianInput(Vector::Zero(2), Matrix::Zero(2, 2)).is_dirac());
  EXPECT_TRUE(GaussianInput::dirac(Vector::Ones(3)).is_dirac());
  EXPECT_FALSE(GaussianInput(Vector::Zero(2), 1e-6 * Matrix::Identity(2, 2)).is_dirac());
}

TEST(UncertainSEKernel, DiracReductionMatchesPointKernel) {
  Rng rng(3);
  const auto p = SEKernelParams::isotropic(2, 0.1);
  for (int i = 0; i < 20; ++i) {
    const Vector a = unif_vec(rng, 2), b = unif_vec(rng, 2);
    // Same arithmetic, but FMA contraction may differ between call sites.
    const double k = se_kernel(a, b, p);
    EXPECT_NEAR(uncertain_se_kernel(GaussianInput::dirac(a), GaussianInput::dirac(b), p), k, 1e-13 * k);
    // A zero covariance through the general factorization path agrees to rounding.
    const detail::PairFactor zero(Matrix::Zero(2, 2), p);
    EXPECT_NEAR(zero(a, b), se_kernel(a, b, p), 1e-14);
  }
}

TEST(UncertainSEKernel, OneDimensionalClosedForm) {
  const auto p = SEKernelParams::isotropic(1, 1.0);
  const GaussianInput g(Vector::Constant(1, 0.4), Matrix::Constant(1, 1, 0.5));
  EXPECT_NEAR(uncertain_se_kernel(g, g, p), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(UncertainSEKernel, MatchesDirectInverseDeterminant) {
  Rng rng(4);
  SEKernelParams p{1.7, Vector(3)};
  p.lengthscales << 0.1, 0.3, 0.8;
  for (int i = 0; i < 30; ++i) {
    const Vector a = unif_vec(rng, 3), b = unif_vec(rng, 3);
    const Matrix sa = random_spd(rng, 3, 0.1), sb = random_spd(rng, 3, 0.2);
    const double k = uncertain_se_kernel(GaussianInput(a, sa), GaussianInput(b, sb), p);
    EXPECT_NEAR(k, direct_uncertain_se(a, sa, b, sb, p.lengthscales, 1.7), 1e-12);
  }
}

TEST(UncertainSEKernel, MonteCarloDoubleIntegral) {
  Rng rng(5);
  const auto p = SEKernelParams::isotropic(2, 0.1);
  constexpr int kSamples = 1'000'000;
  std::normal_distribution<double> n01;
  for (int pair = 0; pair < 20; ++pair) {
    const Vector a = unif_vec(rng, 2), b = unif_vec(rng, 2, 0.0, 0.3) + a;
    const Matrix sa = random_spd(rng, 2, 0.08), sb = random_spd(rng, 2, 0.08);
    const Matrix la = Eigen::LLT<Matrix>(sa).matrixL(), lb = Eigen::LLT<Matrix>(sb).matrixL();
    double sum = 0.0;
    Vector za(2), zb(2);
    for (int s = 0; s < kSamples; ++s) {
      za << n01(rng), n01(rng);
      zb << n01(rng), n01(rng);
      sum += naive_se(a + la * za, b + lb * zb, p.lengthscales, 1.0);
    }
    EXPECT_NEAR(uncertain_se_kernel(GaussianInput(a, sa), GaussianInput(b, sb), p), sum / kSamples, 5e-3);
  }
}

TEST(UncertainSEKernel, SymmetricInArguments) {
  Rng rng(6);
  const auto p = SEKernelParams::isotropic(2, 0.2);
  for (int i = 0; i < 20; ++i) {
    const GaussianInput a(unif_vec(rng, 2), random_spd(rng, 2, 0.1));
    const GaussianInput b(unif_vec(rng, 2), random_spd(rng, 2, 0.1));
    EXPECT_EQ(uncertain_se_kernel(a, b, p), uncertain_se_kernel(b, a, p));
  }
}

TEST(UncertainSEKernel, GramIsPositiveSemidefinite) {
  Rng rng(7);
  const auto p = SEKernelParams::isotropic(2, 0.1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inputs = random_inputs(rng, 30, 2, trial % 2 ? 0.05 : 0.2);
    const Matrix k = uncertain_gram(inputs, p);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(UncertainSEKernel, NoiseShrinksSelfSimilarity) {
  const auto p = SEKernelParams::isotropic(2, 0.1);
  const Vector x = Vector::Constant(2, 0.5);
  EXPECT_EQ(uncertain_se_kernel(GaussianInput::dirac(x), GaussianInput::dirac(x), p), 1.0);
  double prev = 1.0;
  for (double s : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
    const GaussianInput g(x, s * Matrix::Identity(2, 2));
    const double k = uncertain_se_kernel(g, g, p);
    EXPECT_LT(k, prev);
    prev = k;
  }
}

TEST(UncertainSEKernel, CrossMatchesPairwise) {
  Rng rng(8);
  const auto p = SEKernelParams::isotropic(2, 0.15);
  auto rows = random_inputs(rng, 7, 2, 0.1);
  auto cols = random_inputs(rng, 5, 2, 0.0);
  const Matrix shared = random_spd(rng, 2, 0.1);
  for (int i = 0; i < 4; ++i) cols.emplace_back(unif_vec(rng, 2), shared);
  const Matrix k = uncertain_cross(rows, cols, p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      EXPECT_NEAR(k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                  uncertain_se_kernel(rows[i], cols[j], p), 1e-14);
}

TEST(UncertainSEKernel, DimensionMismatchThrows) {
  const auto p = SEKernelParams::isotropic(2, 0.1);
  EXPECT_THROW(uncertain_se_kernel(GaussianInput::dirac(Vector::Zero(3)), GaussianInput::dirac(Vector::Zero(3)), p),
               InvalidArgument);
}

TEST(ExpectedRkhsValue, DiracEqualsPointEvaluation) {
  Rng rng(9);
  const auto f = sample_rkhs_objective(9, 30, Bounds::uniform(2, 0, 1), SEKernelParams::isotropic(2, 0.1));
  for (int i = 0; i < 100; ++i) {
    const Vector x = unif_vec(rng, 2);
    EXPECT_NEAR(expected_rkhs_value(f, GaussianInput::dirac(x)), f(x), 1e-12);
  }
}

TEST(ExpectedRkhsValue, SingleAtomClosedForm) {
  for (int d = 1; d <= 3; ++d) {
    const auto kernel = SEKernelParams::isotropic(d, 0.1);
    const Vector x1 = Vector::Constant(d, 0.4);
    const auto f = RKHSObjective::from_expansion(x1.transpose(), Vector::Ones(1), kernel);
    const double s2 = 0.01;
    const double expect = 1.0 / std::pow(1.0 + s2 / 0.01, 0.5 * d);
    EXPECT_NEAR(expected_rkhs_value(f, GaussianInput(x1, s2 * Matrix::Identity(d, d))), expect, 1e-14);
  }
}

TEST(ExpectedRkhsValue, MonteCarloMean) {
  Rng rng(10);
  const auto f = sample_rkhs_objective(10, 30, Bounds::uniform(2, 0, 1), SEKernelParams::isotropic(2, 0.1));
  constexpr int kSamples = 1'000'000;
  std::normal_distribution<double> n01;
  for (int c = 0; c < 3; ++c) {
    const Vector x = unif_vec(rng, 2);
    const Matrix s = random_spd(rng, 2, 0.1);
    const Matrix l = Eigen::LLT<Matrix>(s).matrixL();
    double sum = 0.0, sum2 = 0.0;
    Vector z(2);
    for (int k = 0; k < kSamples; ++k) {
      z << n01(rng), n01(rng);
      const double v = f(x + l * z);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / kSamples;
    const double se = std::sqrt((sum2 / kSamples - mean * mean) / kSamples);
    EXPECT_NEAR(expected_rkhs_value(f, GaussianInput(x, s)), mean, 3.0 * se);
  }
}

TEST(RKHSObjective, NormMatchesDoubleLoop) {
  const auto f = sample_rkhs_objective(11, 30, Bounds::uniform(2, 0, 1), SEKernelParams::isotropic(2, 0.1));
  double q = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    for (Eigen::Index j = 0; j < f.size(); ++j)
      q += f.weights(i) * f.weights(j) *
           naive_se(f.support_points.row(i).transpose(), f.support_points.row(j).transpose(), f.kernel.lengthscales, 1.0);
  EXPECT_NEAR(f.norm_b, std::sqrt(q), 1e-12);
}
