#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sepcov/detequiv.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/examples.hpp"

using namespace sepcov;

namespace {

MixtureModel identity_model(Eigen::Index d, Eigen::Index n) {
  return MixtureModel({CMatrix::Identity(d, d)}, {CMatrix::Identity(n, n)});
}

// Root of z m^2 + z m + 1 = 0 with Im m > 0.
Complex square_mp_root(Complex z) {
  const Complex disc = std::sqrt(z * z - 4.0 * z);
  const Complex m1 = (-z + disc) / (2.0 * z);
  const Complex m2 = (-z - disc) / (2.0 * z);
  return m1.imag() > m2.imag() ? m1 : m2;
}

CMatrix scalar(Complex v) { return CMatrix::Constant(1, 1, v); }

}  // namespace

TEST(ScalarRoot, SolvesTheQuadratic) {
  const Complex z(0, 1);
  const Complex m = square_mp_root(z);
  EXPECT_LE(std::abs(z * m * m + z * m + 1.0), 1e-15);
  EXPECT_NEAR(m.real(), 0.30024259022012045, 1e-15);
  EXPECT_NEAR(m.imag(), 0.62481053384382657, 1e-15);
  // commonly quoted to four digits as 0.30028 + 0.62491i
  EXPECT_NEAR(std::abs(m - Complex(0.30028, 0.62491)), 0.0, 2e-4);
}

TEST(DualResidual, ExactScalarFixedPoint) {
  const Complex z(0, 1);
  const Complex m = square_mp_root(z);
  const DualResidual q = dual_residual(identity_model(4, 4), z, scalar(m), scalar(m));
  EXPECT_LE(q.sup(), 1e-14);
}

TEST(DualResidual, ZeroDeltaGivesGramOverZ) {
  const BuiltExample ex = build_example({Example::MovingAverage, 8, 3});
  const Complex z(0.5, 2.0);
  const std::size_t r = ex.model.terms();
  const DualResidual q = dual_residual(ex.model, z, CMatrix::Zero(r, r), CMatrix::Zero(r, r));
  const GramMatrices g = gram_matrices(ex.model);
  EXPECT_LE((q.a - g.a / z).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((q.b - g.b / z).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DualResidual, FirstOrderAsymptotics) {
  const BuiltExample ex = build_example({Example::PermutationMixture, 6});
  const AssumptionReport rep = check_assumptions(ex.model);
  const Complex z(0, 1e6);
  const GramMatrices g = gram_matrices(ex.model);
  const DualResidual q = dual_residual(ex.model, z, -g.a / z, -g.b / z);
  const double bound = 10.0 * rep.sigma_sq * rep.sigma_sq * rep.c_star / 1e12;
  EXPECT_LE(spectral_norm(q.a), bound);
  EXPECT_LE(spectral_norm(q.b), bound);
}

TEST(DualResidual, SingularInnerMatrixNamesSide) {
  // 1 + delta = 0 makes the side-A inner matrix singular
  try {
    dual_residual(identity_model(2, 2), Complex(0, 1), scalar(0.5), scalar(-1.0));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("A"), std::string::npos);
  }
}

TEST(SolveDualSystem, SquareIdentityAtI) {
  const DualSolution sol = solve_dual_system(identity_model(5, 5), Complex(0, 1));
  const Complex m = square_mp_root(Complex(0, 1));
  EXPECT_NEAR(std::abs(sol.delta_a(0, 0) - m), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(sol.delta_b(0, 0) - m), 0.0, 1e-12);
  EXPECT_LE(sol.residual, 1e-12);
}

TEST(SolveDualSystem, MarchenkoPasturCompanion) {
  for (const double c : {0.5, 1.0, 2.0}) {
    const auto d = static_cast<Eigen::Index>(10 * c);
    const MixtureModel m = identity_model(d, 10);
    for (const Complex z : {Complex(1.5, 0.1), Complex(-0.5, 0.2), Complex(4.0, 0.1), Complex(0.01, 3.0)}) {
      const DualSolution sol = solve_dual_system(m, z);
      EXPECT_NEAR(std::abs(companion_stieltjes(sol) - oracle::mp_companion(c, z)), 0.0, 1e-8) << c << " " << z;
      EXPECT_NEAR(std::abs(sol.delta_b(0, 0) - oracle::mp_companion(c, z)), 0.0, 1e-8);
    }
  }
}

TEST(SolveDualSystem, LargeImaginaryPart) {
  for (const Example which : {Example::CovarianceMixture, Example::MovingAverage, Example::PermutationMixture}) {
    const BuiltExample ex = build_example({which, 12});
    const Complex z(0, 1e6);
    const DualSolution sol = solve_dual_system(ex.model, z);
    const GramMatrices g = gram_matrices(ex.model);
    EXPECT_LE(spectral_norm(CMatrix(sol.delta_a + g.a / z)), 1e-8);
    EXPECT_LE(spectral_norm(CMatrix(sol.delta_b + g.b / z)), 1e-8);
    EXPECT_NEAR(std::abs(companion_stieltjes(sol) + 1.0 / z), 0.0, 1e-8);
  }
}

TEST(SolveDualSystem, PositivityAndFixedPointOnExamples) {
  for (const Example which : {Example::CovarianceMixture, Example::MovingAverage, Example::PermutationMixture}) {
    const BuiltExample ex = build_example({which, 16});
    const DualSystem sys(ex.model);
    for (const Complex z : {Complex(0.1, 0.05), Complex(3.0, 0.05), Complex(-2.0, 1.0), Complex(8.0, 0.5)}) {
      const DualSolution sol = solve_dual_system(sys, z);
      EXPECT_LE(dual_residual(sys, z, sol.delta_a, sol.delta_b).sup(), 1e-12);
      EXPECT_GE(min_imaginary_eigenvalue(sol.delta_a), -1e-8);
      EXPECT_GE(min_imaginary_eigenvalue(sol.delta_b), -1e-8);
      EXPECT_GT(companion_stieltjes(sol).imag(), 0.0);
      // substituting back reproduces delta
      EXPECT_LE((sys.map(Side::A, sol.delta_b, z) - sol.delta_a).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(SolveDualSystem, ContinuationAgreesWithDirectSolve) {
  const BuiltExample ex = build_example({Example::MovingAverage, 20});
  const Complex z(1.0, 0.05);
  SolverOptions ladder;
  ladder.continuation_steps = 6;
  const DualSolution direct = solve_dual_system(ex.model, z);
  const DualSolution walked = solve_dual_system(ex.model, z, ladder);
  EXPECT_LE((direct.delta_b - walked.delta_b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveDualSystem, PlainIterationConverges) {
  SolverOptions plain;
  plain.anderson_depth = 0;
  const DualSolution sol = solve_dual_system(identity_model(6, 12), Complex(1.0, 0.5), plain);
  EXPECT_NEAR(std::abs(companion_stieltjes(sol) - oracle::mp_companion(0.5, Complex(1.0, 0.5))), 0.0, 1e-10);
}

TEST(SolveDualSystem, Errors) {
  const MixtureModel m = identity_model(3, 3);
  EXPECT_THROW(solve_dual_system(m, Complex(1.0, 0.0)), DomainError);
  EXPECT_THROW(solve_dual_system(m, Complex(1.0, -0.1)), DomainError);
  SolverOptions opts;
  opts.tolerance = 0.0;
  EXPECT_THROW(solve_dual_system(m, Complex(0, 1), opts), DomainError);
  opts = {};
  opts.initial_damping = 1.5;
  EXPECT_THROW(solve_dual_system(m, Complex(0, 1), opts), DomainError);
  opts = {};
  opts.max_iterations = 1;
  opts.tolerance = 1e-15;
  try {
    solve_dual_system(m, Complex(0.3, 0.01), opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(DetResolventTrace, ProductTestMatrixReturnsDelta) {
  const BuiltExample ex = build_example({Example::PermutationMixture, 10});
  const DualSystem sys(ex.model);
  const DualSolution sol = solve_dual_system(sys, Complex(1.0, 0.3));
  for (std::size_t r = 0; r < sys.terms(); ++r)
    for (std::size_t s = 0; s < sys.terms(); ++s) {
      EXPECT_NEAR(std::abs(det_resolvent_trace(sys, sol, a_product(ex.model, r, s), Side::A) - sol.delta_a(r, s)), 0.0,
                  1e-12);
      EXPECT_NEAR(std::abs(det_resolvent_trace(sys, sol, b_product(ex.model, r, s), Side::B) - sol.delta_b(r, s)), 0.0,
                  1e-12);
    }
}

TEST(DetResolventTrace, IdentityOnSideBIsCompanionTransform) {
  const BuiltExample ex = build_example({Example::CovarianceMixture, 10});
  const DualSystem sys(ex.model);
  const DualSolution sol = solve_dual_system(sys, Complex(2.0, 0.2));
  const Complex trace = det_resolvent_trace(sys, sol, CMatrix::Identity(10, 10), Side::B);
  EXPECT_NEAR(std::abs(trace - companion_stieltjes(sol)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(companion_stieltjes_trace(sys, sol) - companion_stieltjes(sol)), 0.0, 1e-10);
}

TEST(DetResolventTrace, ScalarFixedPoint) {
  const MixtureModel m = identity_model(4, 4);
  const DualSolution sol = solve_dual_system(m, Complex(0, 1));
  const Complex v = det_resolvent_trace(m, sol, CMatrix::Identity(4, 4), Side::A);
  EXPECT_NEAR(std::abs(v - square_mp_root(Complex(0, 1))), 0.0, 1e-12);
  EXPECT_THROW(det_resolvent_trace(m, sol, CMatrix::Identity(3, 3), Side::A), DimensionError);
}

TEST(SupportBound, PlugIn) {
  EXPECT_NEAR(support_bound(1.0, 1.0), 32.0, 1e-12);
  EXPECT_NEAR(support_bound(1.0, 4.0), 72.0, 1e-12);
  EXPECT_NEAR(support_bound(1.0, 5.0), 8.0 * (1.0 + std::sqrt(5.0)) * (1.0 + std::sqrt(5.0)), 1e-12);
  EXPECT_NEAR(support_bound(1.0, 5.0), 83.777, 1e-3);
}

TEST(SupportBound, CoversTheSpectrum) {
  for (const Example which : {Example::CovarianceMixture, Example::MovingAverage, Example::PermutationMixture}) {
    const BuiltExample ex = build_example({which, 30});
    const double b = support_bound(ex.model);
    const std::vector<double> xs{b + 2.0};
    EXPECT_LE(density_curve(ex.model, 0.05, xs).ys.front(), 0.05 / std::numbers::pi + 1e-6);
  }
}

TEST(DensityCurve, NonNegativeOnExamples) {
  for (const Example which : {Example::CovarianceMixture, Example::MovingAverage, Example::PermutationMixture}) {
    const BuiltExample ex = build_example({which, 12});
    const std::vector<double> xs = default_density_grid(ex.model, 60);
    const DensityCurve curve = density_curve(ex.model, 0.05, xs);
    ASSERT_EQ(curve.ys.size(), 60u);
    for (const double y : curve.ys) EXPECT_GE(y, -1e-12);
  }
}

TEST(DensityCurve, MarchenkoPasturDensityAtTwo) {
  const std::vector<double> xs{2.0};
  const DensityCurve curve = density_curve(identity_model(20, 20), 1e-4, xs);
  EXPECT_NEAR(curve.ys.front(), 1.0 / (2.0 * std::numbers::pi), 2e-3);
  EXPECT_NEAR(curve.ys.front(), oracle::mp_companion_density(1.0, 2.0), 2e-3);
}

TEST(DensityCurve, MassAndShapeAgainstOracle) {
  const MixtureModel m = identity_model(10, 20);
  const std::vector<double> xs = linear_grid(-0.5, 4.0, 400);
  const DensityCurve curve = density_curve(m, 1e-3, xs);
  // c = 0.5: the companion law puts mass 1/2 at zero, the rest on [0.086, 2.914]
  const std::vector<double> wide = linear_grid(-10.0, 14.0, 2000);
  EXPECT_NEAR(trapezoid_mass(density_curve(m, 0.05, wide)), 1.0, 0.02);
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k] > 0.3 && std::abs(xs[k] - 2.914) > 0.1) EXPECT_NEAR(curve.ys[k], oracle::mp_companion_density(0.5, xs[k]), 5e-3);
  const std::vector<double> cum = cumulative_mass(curve);
  EXPECT_EQ(cum.front(), 0.0);
  EXPECT_NEAR(cum.back(), trapezoid_mass(curve), 1e-12);
}

TEST(DensityCurve, ThreadedMatchesSerial) {
  const BuiltExample ex = build_example({Example::MovingAverage, 10});
  const std::vector<double> xs = default_density_grid(ex.model, 40);
  const DensityCurve one = density_curve(ex.model, 0.05, xs, {}, 1);
  const DensityCurve four = density_curve(ex.model, 0.05, xs, {}, 4);
  for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_NEAR(one.ys[k], four.ys[k], 1e-10);
}

TEST(DensityCurve, Errors) {
  const MixtureModel m = identity_model(3, 3);
  const std::vector<double> xs{0.0, 1.0};
  EXPECT_THROW(density_curve(m, 0.0, xs), DomainError);
  const std::vector<double> unsorted{1.0, 0.0};
  EXPECT_THROW(density_curve(m, 0.05, unsorted), DomainError);
  EXPECT_THROW(linear_grid(0.0, 1.0, 1), DomainError);
}
