#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/experiments.hpp"

using namespace sepcov;

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(quantile(v, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.1), 7.0);
  EXPECT_THROW(quantile({}, 0.5), DomainError);
  EXPECT_THROW(quantile(v, 1.5), DomainError);
}

TEST(KolmogorovDistance, AgainstBruteForce) {
  const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> cdf{0.0, 0.5, 0.9, 1.0};
  const std::vector<double> samples{0.5, 1.5, 1.7, 2.5};
  // brute force over a fine mesh of both one-sided limits
  double brute = 0.0;
  for (int k = -100; k <= 400; ++k) {
    const double x = k / 100.0;
    double f = 0.0;
    if (x >= 3.0)
      f = 1.0;
    else if (x > 0.0) {
      const int i = static_cast<int>(x);
      f = cdf[i] + (x - i) * (cdf[i + 1] - cdf[i]);
    }
    const double below = std::count_if(samples.begin(), samples.end(), [&](double s) { return s < x; }) / 4.0;
    const double upto = std::count_if(samples.begin(), samples.end(), [&](double s) { return s <= x; }) / 4.0;
    brute = std::max({brute, std::abs(f - below), std::abs(f - upto)});
  }
  EXPECT_NEAR(kolmogorov_distance(samples, grid, cdf), brute, 1e-12);
}

TEST(DensityOverlay, MarchenkoPasturSanity) {
  const Eigen::Index n = 400;
  const MixtureModel m({CMatrix::Identity(n, n)}, {CMatrix::Identity(n, n)});
  const DensityOverlay ov = run_density_overlay(m, EntryDistribution::complex_gaussian(), 0.05, 50, 3);
  std::vector<double> ev(ov.eigenvalues.data(), ov.eigenvalues.data() + n);
  std::sort(ev.begin(), ev.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = oracle::mp_cdf(1.0, ev[i]);
    ks = std::max({ks, std::abs(f - i / static_cast<double>(n)), std::abs(f - (i + 1) / static_cast<double>(n))});
  }
  EXPECT_LE(ks, 0.08);
}

TEST(DensityOverlay, ExampleShapes) {
  const DensityOverlay ov = run_density_overlay(ExampleSpec{Example::MovingAverage, 30}, 0.05, 80, kDefaultSeed);
  EXPECT_EQ(ov.eigenvalues.size(), 30);
  EXPECT_EQ(ov.curve.xs.size(), 80u);
  for (Eigen::Index k = 1; k < ov.eigenvalues.size(); ++k) EXPECT_LE(ov.eigenvalues(k - 1), ov.eigenvalues(k));
  EXPECT_LE(ov.curve.xs.front(), std::min(0.0, ov.eigenvalues(0)));
  EXPECT_GE(ov.curve.xs.back(), ov.eigenvalues(29));
  for (const double y : ov.curve.ys) EXPECT_GE(y, -1e-12);
}

TEST(ErrorStudy, SingleRealizationCollapsesQuantiles) {
  const std::vector<Eigen::Index> ns{8};
  const std::vector<Complex> zs{Complex(1.5, 1.0)};
  const ConvergenceTable t = run_error_study(ExampleSpec{Example::CovarianceMixture}, ns, 1, zs, 4);
  ASSERT_EQ(t.rows.size(), 1u);
  const ConvergenceRow& row = t.rows.front();
  EXPECT_EQ(row.q10_a, row.mean_a);
  EXPECT_EQ(row.q90_a, row.mean_a);
  EXPECT_EQ(row.q10_b, row.mean_b);
  EXPECT_EQ(row.q90_b, row.mean_b);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records.front().dist_label, "complex_gaussian");
}

TEST(ErrorStudy, ReproducibleAndThreadIndependent) {
  const std::vector<Eigen::Index> ns{6, 12};
  const std::vector<Complex> zs{Complex(0.0, 0.1), Complex(2.0, 0.1)};
  const ExampleSpec spec{Example::PermutationMixture};
  const ConvergenceTable a = run_error_study(spec, ns, 6, zs, 9);
  StudyOptions threaded;
  threaded.threads = 3;
  const ConvergenceTable b = run_error_study(spec, ns, 6, zs, 9, threaded);
  ASSERT_EQ(a.rows.size(), 4u);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].a_error, b.records[k].a_error);
    EXPECT_EQ(a.records[k].b_error, b.records[k].b_error);
  }
  for (const auto& row : a.rows) {
    EXPECT_LE(row.q10_a, row.q90_a);
    EXPECT_LE(row.q10_b, row.q90_b);
    EXPECT_EQ(row.failures, 0);
  }
}

TEST(ErrorStudy, DistributionOverride) {
  const std::vector<Eigen::Index> ns{5};
  const std::vector<Complex> zs{Complex(1.5, 1.0)};
  StudyOptions opts;
  opts.dist = EntryDistribution::rademacher();
  const ConvergenceTable t = run_error_study(ExampleSpec{Example::CovarianceMixture}, ns, 2, zs, 1, opts);
  EXPECT_EQ(t.records.front().dist_label, "rademacher");
}

TEST(ErrorStudy, ErrorDecreasesWithN) {
  // n doubled from 40 to 160; the slope is checked only for sign and
  // monotonicity since at this scale the fluctuations decay close to 1/n
  const std::vector<Eigen::Index> ns{40, 80, 160};
  const std::vector<Complex> zs{Complex(1.5, 1.0)};
  const ConvergenceTable t = run_error_study(ExampleSpec{Example::CovarianceMixture}, ns, 10, zs, kDefaultSeed);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : t.rows) {
    x.push_back(static_cast<double>(row.n));
    y.push_back(row.mean_a);
  }
  EXPECT_LT(y[2], y[0]);
  EXPECT_LT(oracle::loglog_slope(x, y), -0.25);
}

TEST(ErrorStudy, RejectsBadInput) {
  const std::vector<Eigen::Index> ns{5};
  const std::vector<Complex> below{Complex(1.0, 0.0)};
  const std::vector<Complex> ok{Complex(1.0, 1.0)};
  EXPECT_THROW(run_error_study(ExampleSpec{}, ns, 2, below, 1), DomainError);
  EXPECT_THROW(run_error_study(ExampleSpec{}, ns, 0, ok, 1), DomainError);
}

TEST(Universality, StudentTSmoke) {
  const UniversalitySummary s =
      run_universality(ExampleSpec{Example::PermutationMixture, 100}, 100, 10, Complex(2.0, 0.1), 3);
  EXPECT_EQ(s.reps, 10);
  EXPECT_EQ(s.failures, 0);
  EXPECT_EQ(s.diff_a.size(), 10u);
  EXPECT_TRUE(std::isfinite(s.mean_a) && std::isfinite(s.mean_b));
  EXPECT_LE(s.q10_a, s.q90_a);
  EXPECT_EQ(s.native_label, "student_t");
}

TEST(Universality, GaussianNativeMatchesIndependentBaseline) {
  // X and Z have the same law: the difference behaves like two independent
  // draws of X, and both are of order 1/n
  const ExampleSpec spec{Example::CovarianceMixture, 20};
  const UniversalitySummary s = run_universality(spec, 20, 20, Complex(1.5, 0.5), 5);
  std::vector<double> base;
  const BuiltExample ex = build_example(spec);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Realization r1 = simulate(ex.model, ex.dist, derive_seed(77, {k, 0}));
    const Realization r2 = simulate(ex.model, ex.dist, derive_seed(77, {k, 1}));
    const Complex z(1.5, 0.5);
    base.push_back(std::abs(empirical_trace(ex.model, r1.eig_s, z, ex.m, Side::A) -
                            empirical_trace(ex.model, r2.eig_s, z, ex.m, Side::A)));
  }
  const double baseline = mean(base);
  EXPECT_LE(s.mean_a, 3.0 * baseline);
  EXPECT_GE(s.mean_a, baseline / 3.0);
}
