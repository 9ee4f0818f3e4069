#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ugpucb;
using namespace testing_support;

namespace {

AcquisitionConfig config(Method m, Eigen::Index d, double sigma) {
  AcquisitionConfig c;
  c.method = m;
  c.model_cov = sigma * sigma * Matrix::Identity(d, d);
  return c;
}

UncertainGP random_gp(Rng& rng, int n, Eigen::Index d, double cov_scale, double lambda = 0.1) {
  UncertainGP gp(SEKernelParams::isotropic(d, 0.2), lambda);
  std::normal_distribution<double> n01;
  for (const auto& p : random_inputs(rng, n, d, cov_scale)) gp = std::move(gp).update(p, n01(rng));
  return gp;
}

}  // namespace

TEST(BetaValue, FixedMode) {
  BetaSchedule s;
  s.fixed_value = 3.0;
  EXPECT_EQ(beta_value(s, 0.0), 3.0);
  EXPECT_EQ(beta_value(s, 17.0), 3.0);
}

TEST(BetaValue, TheoryMode) {
  BetaSchedule s{BetaMode::theory, 0.0, 1.0, 0.0, 0.4};
  EXPECT_EQ(beta_value(s, 5.0), 1.0);
  s.sigma_nu = 0.2;
  EXPECT_NEAR(beta_value(s, 0.0), 1.391540, 1e-6);
  EXPECT_NEAR(beta_value(s, 0.0), 1.0 + 0.2 * std::sqrt(2.0 * (1.0 + std::log(2.5))), 1e-15);
  EXPECT_GT(beta_value(s, 3.0), beta_value(s, 1.0));
}

TEST(BetaValue, RejectsInvalid) {
  BetaSchedule s{BetaMode::theory, 0.0, 1.0, 0.1, 1.0};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.delta = 0.4;
  s.sigma_nu = -1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_THROW(beta_value(BetaSchedule{}, -1.0), InvalidArgument);
}

TEST(UcbScore, PriorValues) {
  const UncertainGP gp(SEKernelParams::isotropic(1, 1.0), 1.0);
  EXPECT_EQ(ucb_score(gp, GaussianInput::dirac(Vector::Zero(1)), 1.0), 1.0);
  // k~(P,P) = 1/sqrt(1 + 2 s) in 1D with unit lengthscale, so s = 1.5 gives 0.5.
  const GaussianInput h(Vector::Zero(1), Matrix::Constant(1, 1, 1.5));
  EXPECT_NEAR(uncertain_se_kernel(h, h, gp.kernel()), 0.5, 1e-15);
  EXPECT_NEAR(ucb_score(gp, h, 2.0), 1.4142135623730951, 1e-15);
}

TEST(UcbScore, ZeroBetaIsMean) {
  Rng rng(1);
  const UncertainGP gp = random_gp(rng, 10, 2, 0.05);
  for (const auto& p : random_inputs(rng, 5, 2, 0.05)) EXPECT_EQ(ucb_score(gp, p, 0.0), gp.posterior_mean(p));
}

TEST(UcbScore, DiracMatchesPointUcb) {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const auto k = SEKernelParams::isotropic(2, 0.2);
    PointGP oracle{{}, Vector(n), k.lengthscales, 1.0, 0.1};
    UncertainGP gp(k, 0.1);
    std::normal_distribution<double> n01;
    for (int i = 0; i < n; ++i) {
      oracle.x.push_back(unif_vec(rng, 2));
      oracle.y(i) = n01(rng);
      gp = std::move(gp).update(GaussianInput::dirac(oracle.x.back()), oracle.y(i));
    }
    const double beta = unif(rng, 0.0, 3.0);
    const Vector x = unif_vec(rng, 2);
    EXPECT_NEAR(ucb_score(gp, GaussianInput::dirac(x), beta), oracle.mean(x) + beta * std::sqrt(oracle.variance(x)),
                1e-10);
  }
}

TEST(UcbScore, ConstantShiftOfObservations) {
  // mu is linear in y, so shifting y by c shifts the score by c * mu(1); the
  // variance term is independent of y.
  Rng rng(3);
  const auto k = SEKernelParams::isotropic(2, 0.2);
  const auto xs = random_inputs(rng, 12, 2, 0.03);
  Vector y(12);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 12; ++i) y(i) = n01(rng);
  const double c = 2.5;
  UncertainGP a(k, 0.1), b(k, 0.1), ones(k, 0.1);
  for (int i = 0; i < 12; ++i) {
    a = std::move(a).update(xs[static_cast<std::size_t>(i)], y(i));
    b = std::move(b).update(xs[static_cast<std::size_t>(i)], y(i) + c);
    ones = std::move(ones).update(xs[static_cast<std::size_t>(i)], 1.0);
  }
  for (const auto& p : random_inputs(rng, 10, 2, 0.03)) {
    EXPECT_NEAR(ucb_score(b, p, 2.0), ucb_score(a, p, 2.0) + c * ones.posterior_mean(p), 1e-12);
    EXPECT_NEAR(b.posterior_variance(p), a.posterior_variance(p), 1e-15);
  }
}

TEST(ExpectedImprovement, Basics) {
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_EQ(expected_improvement(0.3, 0.0, 0.1), 0.3 - 0.1);
  EXPECT_EQ(expected_improvement(0.0, 0.0, 0.1), 0.0);
  EXPECT_GE(expected_improvement(-5.0, 0.01, 0.0), 0.0);
}

TEST(UeiScore, EmptyGpIsStandardNormalEi) {
  const UncertainGP gp(SEKernelParams::isotropic(2, 0.1), 1.0);
  const Vector x = Vector::Constant(2, 0.4);
  EXPECT_NEAR(uei_score(gp, x, 0.01 * Matrix::Identity(2, 2), 1.0, 0.0), 0.3989422804014327, 1e-15);
}

TEST(UeiScore, ZeroCovarianceIsPlainEi) {
  Rng rng(4);
  const UncertainGP gp = random_gp(rng, 10, 2, 0.0);
  for (int i = 0; i < 10; ++i) {
    const Vector x = unif_vec(rng, 2);
    const GaussianInput p = GaussianInput::dirac(x);
    EXPECT_NEAR(uei_score(gp, x, Matrix::Zero(2, 2), 1.0, 0.2),
                expected_improvement(gp.posterior_mean(p), gp.posterior_variance(p), 0.2), 1e-15);
  }
}

TEST(UeiScore, WeightsSumToOne) {
  for (int d = 1; d <= 5; ++d) {
    for (double kappa : {-0.5, 0.0, 1.0, 3.0 - d, 2.5}) {
      if (d + kappa <= 0.0) continue;
      const Matrix cov = 0.01 * Matrix::Identity(d, d);
      const auto sp = unscented_sigma_points(Vector::Zero(d), unscented_root(cov, kappa), kappa);
      ASSERT_EQ(sp.points.size(), static_cast<std::size_t>(2 * d + 1));
      double s = 0.0;
      for (double w : sp.weights) s += w;
      EXPECT_NEAR(s, 1.0, 1e-15);
    }
  }
}

TEST(UeiScore, SigmaPointsReproduceCovariance) {
  Rng rng(5);
  const Matrix cov = random_spd(rng, 3, 0.1);
  const double kappa = 0.0;
  const Vector x = unif_vec(rng, 3);
  const auto sp = unscented_sigma_points(x, unscented_root(cov, kappa), kappa);
  Vector mean = Vector::Zero(3);
  Matrix c = Matrix::Zero(3, 3);
  for (std::size_t j = 0; j < sp.points.size(); ++j) mean += sp.weights[j] * sp.points[j];
  for (std::size_t j = 0; j < sp.points.size(); ++j)
    c += sp.weights[j] * (sp.points[j] - x) * (sp.points[j] - x).transpose();
  EXPECT_LT((mean - x).norm(), 1e-14);
  EXPECT_LT((c - cov).norm(), 1e-12);
}

TEST(UeiScore, NonNegativeAndBatchConsistent) {
  Rng rng(6);
  const UncertainGP gp = random_gp(rng, 15, 2, 0.0);
  const auto cfg = config(Method::uei, 2, 0.1);
  std::vector<Vector> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(unif_vec(rng, 2));
  const Vector batch = score_targets(gp, cfg, 0.0, 0.5, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double s = uei_score(gp, xs[i], cfg.model_cov, cfg.kappa(2), 0.5);
    EXPECT_GE(s, 0.0);
    EXPECT_NEAR(batch(static_cast<Eigen::Index>(i)), s, 1e-14);
  }
}

TEST(UeiScore, InvalidSpreadThrows) {
  const UncertainGP gp(SEKernelParams::isotropic(2, 0.1), 1.0);
  EXPECT_THROW(uei_score(gp, Vector::Zero(2), Matrix::Identity(2, 2), -2.0, 0.0), InvalidArgument);
}

TEST(AcquisitionConfig, KappaDefault) {
  AcquisitionConfig c;
  EXPECT_EQ(c.kappa(1), 2.0);
  EXPECT_EQ(c.kappa(2), 1.0);
  EXPECT_EQ(c.kappa(4), -1.0);
  EXPECT_EQ(c.kappa(6), -3.0);
  c.ut_kappa = 0.5;
  EXPECT_EQ(c.kappa(4), 0.5);
}

TEST(ScoreTargets, MatchesScalarUcb) {
  Rng rng(7);
  const UncertainGP gp = random_gp(rng, 12, 2, 0.02);
  for (Method m : {Method::ugp_ucb, Method::igp_ucb}) {
    const auto cfg = config(m, 2, 0.1);
    std::vector<Vector> xs;
    for (int i = 0; i < 10; ++i) xs.push_back(unif_vec(rng, 2));
    const Vector s = score_targets(gp, cfg, 1.7, 0.0, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const GaussianInput p = m == Method::ugp_ucb ? GaussianInput(xs[i], cfg.model_cov) : GaussianInput::dirac(xs[i]);
      EXPECT_NEAR(s(static_cast<Eigen::Index>(i)), ucb_score(gp, p, 1.7), 1e-12);
    }
  }
}

TEST(MaximizeAcquisition, SingleCandidateNoRefinement) {
  Rng rng(8);
  const UncertainGP gp = random_gp(rng, 5, 2, 0.0);
  auto cfg = config(Method::igp_ucb, 2, 0.1);
  cfg.candidates = 1;
  cfg.refinements = 0;
  const auto bounds = Bounds::uniform(2, 0, 1);
  Rng a(42), b(42);
  const Vector expect = bounds.sample(b);
  EXPECT_EQ(maximize_acquisition(gp, cfg, 2.0, 0.0, bounds, a), expect);
}

TEST(MaximizeAcquisition, EmptyGpIsFlat) {
  const UncertainGP gp(SEKernelParams::isotropic(2, 0.1), 0.1);
  const auto cfg = config(Method::ugp_ucb, 2, 0.1);
  const auto bounds = Bounds::uniform(2, 0, 1);
  Rng rng(9);
  const Vector x = maximize_acquisition(gp, cfg, 2.0, 0.0, bounds, rng);
  EXPECT_TRUE(bounds.contains(x));
  const GaussianInput m(x, cfg.model_cov);
  const double flat = 2.0 * std::sqrt(uncertain_se_kernel(m, m, gp.kernel()));
  Rng probe(10);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(ucb_score(gp, m.with_mean(bounds.sample(probe)), 2.0), flat, 1e-14);
}

TEST(MaximizeAcquisition, DominatesRandomProbes) {
  const auto bounds = Bounds::uniform(2, 0, 1);
  for (Method m : {Method::ugp_ucb, Method::igp_ucb, Method::uei}) {
    UncertainGP gp(SEKernelParams::isotropic(2, 0.1), 0.01);
    Rng rng(11);
    for (int i = 0; i < 6; ++i) gp = std::move(gp).update(GaussianInput::dirac(bounds.sample(rng)), 0.0);
    gp = std::move(gp).update(GaussianInput::dirac(Vector::Constant(2, 0.63)), 2.0);
    const auto cfg = config(m, 2, 0.05);
    const double beta = 1.0;
    const double inc = 2.0;
    const Vector x = maximize_acquisition(gp, cfg, beta, inc, bounds, rng);
    EXPECT_TRUE(bounds.contains(x));
    std::vector<Vector> probes{x};
    for (int i = 0; i < 1000; ++i) probes.push_back(bounds.sample(rng));
    const Vector s = score_targets(gp, cfg, beta, inc, probes);
    EXPECT_GE(s(0), s.tail(1000).maxCoeff() - 1e-12) << to_string(m);
  }
}

TEST(MaximizeAcquisition, DeterministicPerSeed) {
  Rng g(12);
  const UncertainGP gp = random_gp(g, 10, 2, 0.02);
  const auto cfg = config(Method::ugp_ucb, 2, 0.1);
  const auto bounds = Bounds::uniform(2, 0, 1);
  Rng a(5), b(5);
  EXPECT_EQ(maximize_acquisition(gp, cfg, 2.0, 0.0, bounds, a), maximize_acquisition(gp, cfg, 2.0, 0.0, bounds, b));
}

TEST(MaximizeAcquisition, ZeroModelCovarianceMatchesPointUcb) {
  Rng g(13);
  const UncertainGP gp = random_gp(g, 10, 2, 0.0);
  const auto bounds = Bounds::uniform(2, 0, 1);
  const auto u = config(Method::ugp_ucb, 2, 0.0);
  const auto i = config(Method::igp_ucb, 2, 0.0);
  Rng a(6), b(6);
  EXPECT_EQ(maximize_acquisition(gp, u, 2.0, 0.0, bounds, a), maximize_acquisition(gp, i, 2.0, 0.0, bounds, b));
}

TEST(Method, StringRoundTrip) {
  for (Method m : {Method::ugp_ucb, Method::igp_ucb, Method::uei}) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_FALSE(method_from_string("gp_ucb").has_value());
}
