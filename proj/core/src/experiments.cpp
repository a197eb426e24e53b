#include "sepcov/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>

#include "sepcov/errors.hpp"
#include "sepcov/parallel.hpp"

namespace sepcov {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

double interpolate_cdf(std::span<const double> grid, std::span<const double> cdf, double x) {
  if (x <= grid.front()) return x < grid.front() ? 0.0 : cdf.front();
  if (x >= grid.back()) return cdf.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto k = static_cast<std::size_t>(it - grid.begin());
  const double t = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
  return cdf[k - 1] + t * (cdf[k] - cdf[k - 1]);
}

}  // namespace

double kolmogorov_distance(std::vector<double> samples, std::span<const double> grid, std::span<const double> cdf) {
  if (samples.empty()) throw DomainError("kolmogorov_distance: no samples");
  if (grid.size() < 2 || grid.size() != cdf.size())
    throw DimensionError("kolmogorov_distance: grid and cdf must have the same length >= 2");
  std::sort(samples.begin(), samples.end());
  const auto count = static_cast<double>(samples.size());
  double dist = 0.0;
  // Between events both functions are monotone, so the supremum is reached
  // at a sample (either side of its jump) or at a grid node.
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = interpolate_cdf(grid, cdf, samples[i]);
    dist = std::max({dist, std::abs(f - static_cast<double>(i) / count), std::abs(f - static_cast<double>(i + 1) / count)});
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto below = std::upper_bound(samples.begin(), samples.end(), grid[k]) - samples.begin();
    dist = std::max(dist, std::abs(cdf[k] - static_cast<double>(below) / count));
  }
  return dist;
}

std::vector<double> overlay_grid(const RVector& eigenvalues, double eta, std::size_t points) {
  if (eigenvalues.size() == 0) throw DimensionError("overlay_grid: no eigenvalues");
  const double lo = std::min(0.0, eigenvalues.minCoeff());
  const double hi = eigenvalues.maxCoeff();
  const double margin = 0.05 * (hi - lo) + 5.0 * eta;
  return linear_grid(lo - margin, hi + margin, points);
}

DensityOverlay run_density_overlay(const MixtureModel& m, const EntryDistribution& dist, double eta,
                                   std::size_t grid_points, std::uint64_t seed, const SolverOptions& opts,
                                   int threads) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("run_density_overlay: eta must be positive");
  const CMatrix x = sample_X(m.d(), m.n(), dist, seed);
  const auto cov = sample_covariances(build_Y(m, x));
  DensityOverlay out;
  out.eigenvalues = hermitian_eig(cov.s_tilde).eigenvalues.reverse();
  const auto grid = overlay_grid(out.eigenvalues, eta, grid_points);
  out.curve = density_curve(m, eta, grid, opts, threads, &out.stats);
  return out;
}

DensityOverlay run_density_overlay(const ExampleSpec& spec, double eta, std::size_t grid_points, std::uint64_t seed,
                                   const SolverOptions& opts, int threads) {
  const BuiltExample ex = build_example(spec);
  return run_density_overlay(ex.model, ex.dist, eta, grid_points, seed, opts, threads);
}

ConvergenceTable run_error_study(const ExampleSpec& spec, std::span<const Eigen::Index> n_values, int reps,
                                 std::span<const Complex> z_points, std::uint64_t master_seed,
                                 const StudyOptions& opts) {
  if (reps < 1) throw DomainError("run_error_study: reps must be at least 1");
  if (n_values.empty() || z_points.empty()) throw DomainError("run_error_study: empty n or z list");
  for (const Complex z : z_points) require_upper_half_plane(z, "run_error_study");
  validate(opts.solver);

  ConvergenceTable table;
  table.reps = reps;
  const std::size_t nz = z_points.size();
  for (const Eigen::Index n : n_values) {
    ExampleSpec at_n = spec;
    at_n.n = n;
    const BuiltExample ex = build_example(at_n);
    const EntryDistribution dist = opts.dist.value_or(ex.dist);
    const DualSystem sys(ex.model);

    std::vector<Complex> det_a(nz);
    std::vector<Complex> det_b(nz);
    for (std::size_t k = 0; k < nz; ++k) {
      const DualSolution sol = solve_dual_system(sys, z_points[k], opts.solver);
      det_a[k] = det_resolvent_trace(sys, sol, ex.m, Side::A);
      det_b[k] = det_resolvent_trace(sys, sol, ex.m_tilde, Side::B);
    }

    std::vector<std::optional<std::vector<ErrorRecord>>> slots(static_cast<std::size_t>(reps));
    parallel_for(slots.size(), opts.threads, [&](std::size_t rep) {
      try {
        const auto seed = derive_seed(master_seed, {static_cast<std::uint64_t>(n), rep});
        const Realization real = simulate(ex.model, dist, seed);
        const ResolventFunctional trace_a(real.eig_s, ex.m, n);
        const ResolventFunctional trace_b(real.eig_s_tilde, ex.m_tilde, n);
        std::vector<ErrorRecord> recs;
        for (std::size_t k = 0; k < nz; ++k) {
          const Complex z = z_points[k];
          recs.push_back({n, static_cast<int>(rep), z, std::abs(trace_a(z) - det_a[k]), std::abs(trace_b(z) - det_b[k]),
                          dist.name()});
          if (!std::isfinite(recs.back().a_error) || !std::isfinite(recs.back().b_error))
            throw NumericError("non-finite error");
        }
        slots[rep] = std::move(recs);
      } catch (const std::exception&) {
        slots[rep].reset();
      }
    });

    const int failures = static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const auto& s) { return !s; }));
    for (std::size_t k = 0; k < nz; ++k) {
      std::vector<double> ea;
      std::vector<double> eb;
      for (const auto& slot : slots) {
        if (!slot) continue;
        ea.push_back((*slot)[k].a_error);
        eb.push_back((*slot)[k].b_error);
      }
      ConvergenceRow row{n, z_points[k]};
      row.failures = failures;
      if (!ea.empty()) {
        row.mean_a = mean(ea);
        row.q10_a = quantile(ea, 0.1);
        row.q90_a = quantile(ea, 0.9);
        row.mean_b = mean(eb);
        row.q10_b = quantile(eb, 0.1);
        row.q90_b = quantile(eb, 0.9);
      } else {
        row.mean_a = row.q10_a = row.q90_a = row.mean_b = row.q10_b = row.q90_b = std::nan("");
      }
      table.rows.push_back(row);
    }
    for (auto& slot : slots)
      if (slot) table.records.insert(table.records.end(), slot->begin(), slot->end());
  }
  return table;
}

UniversalitySummary run_universality(const ExampleSpec& spec, Eigen::Index n, int reps, Complex z,
                                     std::uint64_t master_seed, const StudyOptions& opts) {
  if (reps < 1) throw DomainError("run_universality: reps must be at least 1");
  require_upper_half_plane(z, "run_universality");
  ExampleSpec at_n = spec;
  at_n.n = n;
  const BuiltExample ex = build_example(at_n);
  const EntryDistribution native = opts.dist.value_or(ex.dist);
  const EntryDistribution gaussian = EntryDistribution::similar_gaussian(native);

  struct Pair {
    double a;
    double b;
  };
  std::vector<std::optional<Pair>> slots(static_cast<std::size_t>(reps));
  parallel_for(slots.size(), opts.threads, [&](std::size_t rep) {
    try {
      const auto key_n = static_cast<std::uint64_t>(n);
      const Realization rx = simulate(ex.model, native, derive_seed(master_seed, {key_n, rep, 0}));
      const Realization rz = simulate(ex.model, gaussian, derive_seed(master_seed, {key_n, rep, 1}));
      const double da =
          std::abs(ResolventFunctional(rx.eig_s, ex.m, n)(z) - ResolventFunctional(rz.eig_s, ex.m, n)(z));
      const double db = std::abs(ResolventFunctional(rx.eig_s_tilde, ex.m_tilde, n)(z) -
                                 ResolventFunctional(rz.eig_s_tilde, ex.m_tilde, n)(z));
      if (std::isfinite(da) && std::isfinite(db)) slots[rep] = Pair{da, db};
    } catch (const std::exception&) {
      slots[rep].reset();
    }
  });

  UniversalitySummary out;
  out.n = n;
  out.z = z;
  out.reps = reps;
  out.native_label = native.name();
  out.gaussian_label = gaussian.name();
  for (const auto& slot : slots) {
    if (!slot) {
      ++out.failures;
      continue;
    }
    out.diff_a.push_back(slot->a);
    out.diff_b.push_back(slot->b);
  }
  if (out.diff_a.empty()) throw NumericError("run_universality: every realization failed");
  out.mean_a = mean(out.diff_a);
  out.q10_a = quantile(out.diff_a, 0.1);
  out.q90_a = quantile(out.diff_a, 0.9);
  out.mean_b = mean(out.diff_b);
  out.q10_b = quantile(out.diff_b, 0.1);
  out.q90_b = quantile(out.diff_b, 0.9);
  return out;
}

}  // namespace sepcov
