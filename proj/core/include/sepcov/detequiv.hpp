#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sepcov/linalg.hpp"
#include "sepcov/model.hpp"

namespace sepcov {

struct SolverOptions {
  /// Absolute tolerance on the sup-entry residual of both equations.
  double tolerance = 1e-12;
  /// Iteration budget per attempt (direct solve or one continuation rung).
  int max_iterations = 20000;
  double initial_damping = 1.0;
  /// 0: solve directly at z and fall back to the continuation ladder on
  /// failure. J > 0: always walk Im z * 2^J, ..., Im z.
  int continuation_steps = 0;
  /// Anderson mixing depth on top of the damped iteration; 0 disables
  /// acceleration (pure damped fixed-point iteration).
  int anderson_depth = 6;
};

/// Throws DomainError unless tolerance > 0, max_iterations >= 1,
/// initial_damping in (0, 1], continuation_steps >= 0, anderson_depth >= 0.
void validate(const SolverOptions& opts);

/// Deterministic equivalents delta^(A)(z), delta^(B)(z) at one point of the
/// upper half plane, with solver diagnostics.
struct DualSolution {
  Complex z;
  CMatrix delta_a;
  CMatrix delta_b;
  double residual = 0.0;
  int iterations = 0;
  double damping_final = 1.0;
};

struct DualResidual {
  CMatrix a;
  CMatrix b;

  double sup() const { return std::max(max_abs_entry(a), max_abs_entry(b)); }
};

/// The right-hand sides of the dual system with every product A_r A_s* and
/// B_s* B_r precomputed. Holds no reference to the model it was built from.
class DualSystem {
 public:
  explicit DualSystem(const MixtureModel& m);

  std::size_t terms() const noexcept { return terms_; }
  Eigen::Index d() const noexcept { return d_; }
  Eigen::Index n() const noexcept { return n_; }
  const GramMatrices& gram() const noexcept { return gram_; }

  /// Side A: A_r A_s*; side B: B_s* B_r.
  const CMatrix& product(Side side, std::size_t r, std::size_t s) const;

  /// Id_d + sum delta^(B)_{r,s} A_r A_s* (side A) or
  /// Id_n + sum delta^(A)_{r,s} B_s* B_r (side B).
  CMatrix inner_matrix(Side side, const CMatrix& delta_other) const;

  /// Right-hand side of the equation for delta^(side):
  /// -(1/z)(1/n) tr(P_rs (inner)^{-1}) for every (r, s).
  /// Throws NumericError naming the side when the inner matrix is singular.
  CMatrix map(Side side, const CMatrix& delta_other, Complex z) const;

  /// -(1/(z n)) tr(M (inner)^{-1}) for a test matrix of the side's dimension.
  Complex trace_form(Side side, const CMatrix& delta_other, Complex z, const CMatrix& test) const;

 private:
  void fill_inner(Side side, const CMatrix& delta_other, CMatrix& inner) const;

  std::size_t terms_;
  Eigen::Index d_;
  Eigen::Index n_;
  std::vector<CMatrix> prod_a_;
  std::vector<CMatrix> prod_b_;
  std::vector<CMatrix> prod_a_t_;
  std::vector<CMatrix> prod_b_t_;
  std::vector<bool> zero_a_;
  std::vector<bool> zero_b_;
  GramMatrices gram_;
};

/// (q_A, q_B) with q = delta - RHS(delta); zero exactly at a solution.
DualResidual dual_residual(const MixtureModel& m, Complex z, const CMatrix& delta_a, const CMatrix& delta_b);
DualResidual dual_residual(const DualSystem& sys, Complex z, const CMatrix& delta_a, const CMatrix& delta_b);

/// Solves the dual system at z by damped, Anderson-accelerated fixed-point
/// iteration on delta^(B) -> F_B(F_A(delta^(B))), started from -G^(B)/z,
/// with Im-z continuation as a fallback. The result satisfies
/// residual <= tolerance and lambda_min(Im delta) >= -1e-8 on both sides.
///
/// Throws DomainError for Im z <= 0, ConvergenceError when no attempt
/// reaches the tolerance on the positive branch, NumericError when an inner
/// matrix is singular along every attempt.
DualSolution solve_dual_system(const MixtureModel& m, Complex z, const SolverOptions& opts = {});
DualSolution solve_dual_system(const DualSystem& sys, Complex z, const SolverOptions& opts = {});

/// Same, but the direct attempt starts from `warm_delta_b` (and gives up
/// after `warm_budget` iterations) before falling back to continuation.
DualSolution solve_dual_system_warm(const DualSystem& sys, Complex z, const CMatrix& warm_delta_b,
                                    const SolverOptions& opts, int warm_budget);

/// Deterministic equivalent of (1/n) tr(M R(z)) (side A, M is d x d) or of
/// (1/n) tr(M R~(z)) (side B, M is n x n).
Complex det_resolvent_trace(const MixtureModel& m, const DualSolution& sol, const CMatrix& test, Side side);
Complex det_resolvent_trace(const DualSystem& sys, const DualSolution& sol, const CMatrix& test, Side side);

/// s(z) = -1/z - sum_{r,s} delta^(A)_{r,s} delta^(B)_{r,s}: the Stieltjes
/// transform of the limiting eigenvalue distribution of S tilde.
Complex companion_stieltjes(const DualSolution& sol);

/// The same transform through the trace form -(1/(zn)) tr((Id_n + sum delta^(A) B*B)^{-1}).
Complex companion_stieltjes_trace(const DualSystem& sys, const DualSolution& sol);

/// 8 sigma^4 (1 + sqrt(c_*))^2, an interval [0, b] containing the supports
/// of rho^(A), rho^(B) and the companion measure.
double support_bound(double sigma_sq, double c_star);
double support_bound(const AssumptionReport& report);
double support_bound(const MixtureModel& m);

struct DensityCurve {
  double eta = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct DensityStats {
  int total_iterations = 0;
  int ladder_solves = 0;
  double max_residual = 0.0;
};

/// Points of [lo, hi] spaced uniformly; `points` >= 2.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// 600 points over [-0.05 b, 1.05 b] with b = support_bound(m).
std::vector<double> default_density_grid(const MixtureModel& m, std::size_t points = 600);

/// y_k = Im s(x_k + i eta) / pi on a strictly increasing grid. Solves are
/// warm-started along the grid; `threads` > 1 splits the grid into that
/// many contiguous chunks, each warm-started from its own first point.
/// Solver failures are rethrown with the offending x_k in the message.
DensityCurve density_curve(const MixtureModel& m, double eta, std::span<const double> xs,
                           const SolverOptions& opts = {}, int threads = 1, DensityStats* stats = nullptr);

/// Trapezoid rule over the curve's grid.
double trapezoid_mass(const DensityCurve& curve);

/// Cumulative trapezoid integral of the curve, one value per grid point.
std::vector<double> cumulative_mass(const DensityCurve& curve);

}  // namespace sepcov
