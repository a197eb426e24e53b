#include "sepcov/detequiv.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "sepcov/errors.hpp"
#include "sepcov/parallel.hpp"

namespace sepcov {

namespace {

constexpr double kPositivitySlack = 1e-8;
constexpr double kMinDamping = 1.0 / 64.0;
constexpr int kDecreasesBeforeGrowth = 10;
// An attempt is abandoned when the best residual has not halved for this
// many iterations; the caller then falls back to continuation.
constexpr int kStallWindow = 400;
constexpr double kLadderRungTolerance = 1e-8;

std::string format_z(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

CVector flatten(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unflatten(const CVector& v, Eigen::Index r) { return Eigen::Map<const CMatrix>(v.data(), r, r); }

struct Attempt {
  bool converged = false;
  bool positive = false;
  CMatrix delta_a;
  CMatrix delta_b;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double damping = 1.0;
};

// Damped, Anderson-accelerated iteration of x -> F_B(F_A(x)) on delta^(B).
// On convergence the returned pair is (F_A(x), x), so the A-equation holds
// exactly and the residual is that of the B-equation.
Attempt iterate(const DualSystem& sys, Complex z, const CMatrix& start_b, double tol, int max_iterations,
                const SolverOptions& opts) {
  const auto R = static_cast<Eigen::Index>(sys.terms());
  const auto depth = static_cast<std::size_t>(opts.anderson_depth);

  Attempt out;
  CVector x = flatten(start_b);
  CVector best_x = x;
  double best = std::numeric_limits<double>::infinity();
  double mark = best;
  int mark_iter = 0;
  double prev = best;
  double theta = opts.initial_damping;
  int decreases = 0;
  std::deque<CVector> xs;
  std::deque<CVector> gs;

  for (int k = 0; k < max_iterations; ++k) {
    const CMatrix xb = unflatten(x, R);
    CMatrix da = sys.map(Side::A, xb, z);
    const CMatrix fb = sys.map(Side::B, da, z);
    const CVector g = flatten(fb) - x;
    const double res = g.cwiseAbs().maxCoeff();
    out.iterations = k + 1;
    out.damping = theta;

    if (!std::isfinite(res)) throw NumericError("dual system iterate became non-finite at z = " + format_z(z));

    if (res <= tol) {
      out.converged = true;
      out.residual = res;
      out.delta_a = std::move(da);
      out.delta_b = xb;
      out.positive = min_imaginary_eigenvalue(out.delta_a) >= -kPositivitySlack &&
                     min_imaginary_eigenvalue(out.delta_b) >= -kPositivitySlack;
      return out;
    }

    if (res < best) {
      best = res;
      best_x = x;
    }
    if (best < 0.5 * mark) {
      mark = best;
      mark_iter = k;
    } else if (k - mark_iter > kStallWindow) {
      break;
    }

    if (res > prev) {
      theta = std::max(0.5 * theta, kMinDamping);
      decreases = 0;
      if (res > 1e4 * best) {
        // Diverging: restart plain damped steps from the best iterate.
        xs.clear();
        gs.clear();
        x = best_x;
        prev = std::numeric_limits<double>::infinity();
        continue;
      }
    } else if (++decreases >= kDecreasesBeforeGrowth) {
      theta = std::min(opts.initial_damping, 2.0 * theta);
      decreases = 0;
    }
    prev = res;

    xs.push_back(x);
    gs.push_back(g);
    if (xs.size() > depth + 1) {
      xs.pop_front();
      gs.pop_front();
    }

    if (depth > 0 && xs.size() >= 2) {
      const auto m = static_cast<Eigen::Index>(xs.size() - 1);
      CMatrix dx(x.size(), m);
      CMatrix dg(x.size(), m);
      for (Eigen::Index j = 0; j < m; ++j) {
        dx.col(j) = xs[j + 1] - xs[j];
        dg.col(j) = gs[j + 1] - gs[j];
      }
      const CVector gamma = dg.completeOrthogonalDecomposition().solve(g);
      if (gamma.allFinite()) {
        x = x - dx * gamma + theta * (g - dg * gamma);
        continue;
      }
      xs.clear();
      gs.clear();
    }
    x = x + theta * g;
  }

  out.residual = best;
  return out;
}

double ladder_top_exponent(Complex z, int continuation_steps) {
  const int base = continuation_steps > 0 ? continuation_steps : 8;
  const int reach = static_cast<int>(std::ceil(std::log2(1.0 / z.imag())));
  return continuation_steps > 0 ? base : std::max(base, reach);
}

DualSolution to_solution(Complex z, Attempt&& a, int iterations) {
  DualSolution sol;
  sol.z = z;
  sol.delta_a = std::move(a.delta_a);
  sol.delta_b = std::move(a.delta_b);
  sol.residual = a.residual;
  sol.iterations = iterations;
  sol.damping_final = a.damping;
  return sol;
}

// Walks z_j = Re z + i Im z 2^(J-j), j = 0..J, warm-starting every rung.
DualSolution solve_ladder(const DualSystem& sys, Complex z, const SolverOptions& opts, int iterations_so_far) {
  const int top = static_cast<int>(ladder_top_exponent(z, opts.continuation_steps));
  int iterations = iterations_so_far;
  std::optional<CMatrix> start;
  for (int j = 0; j <= top; ++j) {
    const Complex zj(z.real(), z.imag() * std::ldexp(1.0, top - j));
    if (!start) start = CMatrix(-sys.gram().b / zj);
    const double tol = j == top ? opts.tolerance : std::max(opts.tolerance, kLadderRungTolerance);
    Attempt a = iterate(sys, zj, *start, tol, opts.max_iterations, opts);
    iterations += a.iterations;
    if (!a.converged)
      throw ConvergenceError("dual system: continuation rung z = " + format_z(zj) + " did not converge (best residual " +
                                 std::to_string(a.residual) + ")",
                             a.residual);
    if (!a.positive)
      throw ConvergenceError("dual system: continuation rung z = " + format_z(zj) +
                                 " converged to a solution with non-positive imaginary part",
                             a.residual);
    if (j == top) return to_solution(z, std::move(a), iterations);
    start = std::move(a.delta_b);
  }
  throw ConvergenceError("dual system: empty continuation ladder", std::numeric_limits<double>::infinity());
}

DualSolution solve_impl(const DualSystem& sys, Complex z, const CMatrix* warm, const SolverOptions& opts,
                        int budget) {
  require_upper_half_plane(z, "solve_dual_system");
  validate(opts);

  int iterations = 0;
  if (opts.continuation_steps == 0) {
    const CMatrix start = warm ? *warm : CMatrix(-sys.gram().b / z);
    try {
      Attempt a = iterate(sys, z, start, opts.tolerance, budget, opts);
      iterations = a.iterations;
      if (a.converged && a.positive) return to_solution(z, std::move(a), iterations);
    } catch (const NumericError&) {
      // Singular inner matrix along the direct path; continuation may avoid it.
    }
  }
  return solve_ladder(sys, z, opts, iterations);
}

}  // namespace

void validate(const SolverOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw DomainError("SolverOptions: tolerance must be positive");
  if (opts.max_iterations < 1) throw DomainError("SolverOptions: max_iterations must be at least 1");
  if (!(opts.initial_damping > 0.0 && opts.initial_damping <= 1.0))
    throw DomainError("SolverOptions: initial_damping must lie in (0, 1]");
  if (opts.continuation_steps < 0) throw DomainError("SolverOptions: continuation_steps must be non-negative");
  if (opts.anderson_depth < 0) throw DomainError("SolverOptions: anderson_depth must be non-negative");
}

DualSystem::DualSystem(const MixtureModel& m)
    : terms_(m.terms()), d_(m.d()), n_(m.n()), gram_(gram_matrices(m)) {
  prod_a_.reserve(terms_ * terms_);
  prod_b_.reserve(terms_ * terms_);
  for (std::size_t r = 0; r < terms_; ++r) {
    for (std::size_t s = 0; s < terms_; ++s) {
      prod_a_.push_back(a_product(m, r, s));
      prod_b_.push_back(b_product(m, r, s));
      prod_a_t_.push_back(prod_a_.back().transpose());
      prod_b_t_.push_back(prod_b_.back().transpose());
      zero_a_.push_back(prod_a_.back().isZero(0.0));
      zero_b_.push_back(prod_b_.back().isZero(0.0));
    }
  }
}

const CMatrix& DualSystem::product(Side side, std::size_t r, std::size_t s) const {
  const auto& p = side == Side::A ? prod_a_ : prod_b_;
  return p.at(r * terms_ + s);
}

CMatrix DualSystem::inner_matrix(Side side, const CMatrix& delta_other) const {
  CMatrix inner;
  fill_inner(side, delta_other, inner);
  return inner;
}

void DualSystem::fill_inner(Side side, const CMatrix& delta_other, CMatrix& inner) const {
  const auto R = static_cast<Eigen::Index>(terms_);
  if (delta_other.rows() != R || delta_other.cols() != R)
    throw DimensionError("inner_matrix: delta must be " + std::to_string(R) + "x" + std::to_string(R));
  const Eigen::Index dim = side == Side::A ? d_ : n_;
  const auto& zero = side == Side::A ? zero_a_ : zero_b_;
  inner.setIdentity(dim, dim);
  for (std::size_t r = 0; r < terms_; ++r)
    for (std::size_t s = 0; s < terms_; ++s)
      if (!zero[r * terms_ + s]) inner.noalias() += delta_other(r, s) * product(side, r, s);
}

namespace {

// Workspace reused across calls on the same thread; the solver calls the
// inverse thousands of times at a fixed dimension.
struct InverseWorkspace {
  CMatrix inv;
  std::vector<lapack_int> pivots;
  std::vector<lapack_complex_double> work;
  std::vector<double> rwork;
};

InverseWorkspace& workspace() {
  thread_local InverseWorkspace ws;
  return ws;
}

std::string side_message(Side side, std::string_view what) {
  return std::string("dual system: inner matrix on side ") + std::string(to_string(side)) + " " + std::string(what);
}

// Replaces ws.inv (holding the inner matrix) by its inverse.
void invert_in_place(InverseWorkspace& ws, Side side) {
  const auto dim = static_cast<lapack_int>(ws.inv.rows());
  if (!ws.inv.allFinite()) throw NumericError(side_message(side, "is not finite"));
  auto* a = reinterpret_cast<lapack_complex_double*>(ws.inv.data());
  const double anorm = ws.inv.cwiseAbs().colwise().sum().maxCoeff();
  ws.pivots.resize(static_cast<std::size_t>(dim));
  if (LAPACKE_zgetrf_work(LAPACK_COL_MAJOR, dim, dim, a, dim, ws.pivots.data()) != 0)
    throw NumericError(side_message(side, "is singular"));

  const auto need = static_cast<std::size_t>(std::max<lapack_int>(2 * dim, 64 * dim));
  if (ws.work.size() < need) ws.work.resize(need);
  if (ws.rwork.size() < static_cast<std::size_t>(2 * dim)) ws.rwork.resize(static_cast<std::size_t>(2 * dim));
  double rcond = 0.0;
  LAPACKE_zgecon_work(LAPACK_COL_MAJOR, '1', dim, a, dim, anorm, &rcond, ws.work.data(), ws.rwork.data());
  if (!(rcond > 1e-14)) throw NumericError(side_message(side, "is singular (rcond " + std::to_string(rcond) + ")"));

  if (LAPACKE_zgetri_work(LAPACK_COL_MAJOR, dim, a, dim, ws.pivots.data(), ws.work.data(),
                          static_cast<lapack_int>(ws.work.size())) != 0)
    throw NumericError(side_message(side, "could not be inverted"));
  if (!ws.inv.allFinite()) throw NumericError(side_message(side, "has a non-finite inverse"));
}

}  // namespace

CMatrix DualSystem::map(Side side, const CMatrix& delta_other, Complex z) const {
  InverseWorkspace& ws = workspace();
  fill_inner(side, delta_other, ws.inv);
  invert_in_place(ws, side);
  const auto& zero = side == Side::A ? zero_a_ : zero_b_;
  const auto& prod_t = side == Side::A ? prod_a_t_ : prod_b_t_;
  const auto R = static_cast<Eigen::Index>(terms_);
  const Complex scale = -1.0 / (z * static_cast<double>(n_));
  CMatrix out(R, R);
  // tr(P X) = sum_ij (P^T)_ij X_ij
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index s = 0; s < R; ++s) {
      const auto idx = static_cast<std::size_t>(r) * terms_ + static_cast<std::size_t>(s);
      out(r, s) = zero[idx] ? Complex(0.0) : scale * prod_t[idx].cwiseProduct(ws.inv).sum();
    }
  }
  return out;
}

Complex DualSystem::trace_form(Side side, const CMatrix& delta_other, Complex z, const CMatrix& test) const {
  const Eigen::Index dim = side == Side::A ? d_ : n_;
  if (test.rows() != dim || test.cols() != dim)
    throw DimensionError("det_resolvent_trace: test matrix for side " + std::string(to_string(side)) + " must be " +
                         std::to_string(dim) + "x" + std::to_string(dim));
  InverseWorkspace& ws = workspace();
  fill_inner(side, delta_other, ws.inv);
  invert_in_place(ws, side);
  return -1.0 / (z * static_cast<double>(n_)) * test.transpose().cwiseProduct(ws.inv).sum();
}

DualResidual dual_residual(const DualSystem& sys, Complex z, const CMatrix& delta_a, const CMatrix& delta_b) {
  require_upper_half_plane(z, "dual_residual");
  return {delta_a - sys.map(Side::A, delta_b, z), delta_b - sys.map(Side::B, delta_a, z)};
}

DualResidual dual_residual(const MixtureModel& m, Complex z, const CMatrix& delta_a, const CMatrix& delta_b) {
  return dual_residual(DualSystem(m), z, delta_a, delta_b);
}

DualSolution solve_dual_system(const DualSystem& sys, Complex z, const SolverOptions& opts) {
  return solve_impl(sys, z, nullptr, opts, opts.max_iterations);
}

DualSolution solve_dual_system(const MixtureModel& m, Complex z, const SolverOptions& opts) {
  require_upper_half_plane(z, "solve_dual_system");
  validate(opts);
  return solve_dual_system(DualSystem(m), z, opts);
}

DualSolution solve_dual_system_warm(const DualSystem& sys, Complex z, const CMatrix& warm_delta_b,
                                    const SolverOptions& opts, int warm_budget) {
  return solve_impl(sys, z, &warm_delta_b, opts, std::max(1, std::min(warm_budget, opts.max_iterations)));
}

Complex det_resolvent_trace(const DualSystem& sys, const DualSolution& sol, const CMatrix& test, Side side) {
  return sys.trace_form(side, side == Side::A ? sol.delta_b : sol.delta_a, sol.z, test);
}

Complex det_resolvent_trace(const MixtureModel& m, const DualSolution& sol, const CMatrix& test, Side side) {
  return det_resolvent_trace(DualSystem(m), sol, test, side);
}

Complex companion_stieltjes(const DualSolution& sol) {
  return -1.0 / sol.z - sol.delta_a.cwiseProduct(sol.delta_b).sum();
}

Complex companion_stieltjes_trace(const DualSystem& sys, const DualSolution& sol) {
  return det_resolvent_trace(sys, sol, CMatrix::Identity(sys.n(), sys.n()), Side::B);
}

double support_bound(double sigma_sq, double c_star) {
  const double root = 1.0 + std::sqrt(c_star);
  return 8.0 * sigma_sq * sigma_sq * root * root;
}

double support_bound(const AssumptionReport& report) { return support_bound(report.sigma_sq, report.c_star); }

double support_bound(const MixtureModel& m) { return support_bound(check_assumptions(m)); }

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw DomainError("linear_grid: need at least 2 points");
  if (!(hi > lo)) throw DomainError("linear_grid: empty interval");
  std::vector<double> xs(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) xs[k] = lo + step * static_cast<double>(k);
  xs.back() = hi;
  return xs;
}

std::vector<double> default_density_grid(const MixtureModel& m, std::size_t points) {
  const double b = support_bound(m);
  return linear_grid(-0.05 * b, 1.05 * b, points);
}

namespace {

constexpr int kWarmBudget = 300;

void solve_chunk(const DualSystem& sys, double eta, std::span<const double> xs, std::span<double> ys,
                 const SolverOptions& opts, DensityStats& stats) {
  SolverOptions ladder = opts;
  std::optional<CMatrix> prev;
  std::optional<CMatrix> prev2;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Complex z(xs[k], eta);
    DualSolution sol;
    try {
      if (prev) {
        const CMatrix guess = prev2 ? CMatrix(2.0 * *prev - *prev2) : *prev;
        sol = solve_dual_system_warm(sys, z, guess, opts, kWarmBudget);
      } else {
        // Cold start at small eta goes straight to continuation.
        if (ladder.continuation_steps == 0) ladder.continuation_steps = static_cast<int>(ladder_top_exponent(z, 0));
        sol = solve_dual_system(sys, z, ladder);
        ++stats.ladder_solves;
      }
    } catch (const Error& e) {
      std::ostringstream os;
      os.precision(17);
      os << "density_curve: solve failed at x = " << xs[k] << ": " << e.what();
      if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) throw ConvergenceError(os.str(), ce->best_residual());
      if (dynamic_cast<const NumericError*>(&e)) throw NumericError(os.str());
      throw;
    }
    stats.total_iterations += sol.iterations;
    stats.max_residual = std::max(stats.max_residual, sol.residual);
    ys[k] = companion_stieltjes(sol).imag() / std::numbers::pi;
    prev2 = std::move(prev);
    prev = std::move(sol.delta_b);
  }
}

}  // namespace

DensityCurve density_curve(const MixtureModel& m, double eta, std::span<const double> xs, const SolverOptions& opts,
                           int threads, DensityStats* stats) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("density_curve: eta must be positive");
  if (xs.empty()) throw DomainError("density_curve: empty grid");
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k])) throw DomainError("density_curve: non-finite grid point");
    if (k > 0 && !(xs[k] > xs[k - 1])) throw DomainError("density_curve: grid must be strictly increasing");
  }
  validate(opts);

  const DualSystem sys(m);
  DensityCurve curve;
  curve.eta = eta;
  curve.xs.assign(xs.begin(), xs.end());
  curve.ys.assign(xs.size(), 0.0);

  const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), xs.size());
  std::vector<DensityStats> chunk_stats(chunks);
  const std::size_t per = (xs.size() + chunks - 1) / chunks;
  parallel_for(chunks, static_cast<int>(chunks), [&](std::size_t c) {
    const std::size_t lo = c * per;
    const std::size_t hi = std::min(xs.size(), lo + per);
    if (lo >= hi) return;
    solve_chunk(sys, eta, xs.subspan(lo, hi - lo), std::span<double>(curve.ys).subspan(lo, hi - lo), opts,
                chunk_stats[c]);
  });

  if (stats) {
    *stats = {};
    for (const auto& s : chunk_stats) {
      stats->total_iterations += s.total_iterations;
      stats->ladder_solves += s.ladder_solves;
      stats->max_residual = std::max(stats->max_residual, s.max_residual);
    }
  }
  return curve;
}

std::vector<double> cumulative_mass(const DensityCurve& curve) {
  std::vector<double> cdf(curve.xs.size(), 0.0);
  for (std::size_t k = 1; k < curve.xs.size(); ++k)
    cdf[k] = cdf[k - 1] + 0.5 * (curve.ys[k] + curve.ys[k - 1]) * (curve.xs[k] - curve.xs[k - 1]);
  return cdf;
}

double trapezoid_mass(const DensityCurve& curve) {
  const auto cdf = cumulative_mass(curve);
  return cdf.empty() ? 0.0 : cdf.back();
}

}  // namespace sepcov
