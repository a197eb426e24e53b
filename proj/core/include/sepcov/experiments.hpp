#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sepcov/detequiv.hpp"
#include "sepcov/ensemble.hpp"
#include "sepcov/examples.hpp"

namespace sepcov {

/// Linear-interpolation quantile (type 7) of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

double mean(std::span<const double> values);

/// Kolmogorov distance between the empirical CDF of `samples` and a CDF
/// given on a grid (linear interpolation, 0 left of the grid, the last value
/// right of it).
double kolmogorov_distance(std::vector<double> samples, std::span<const double> grid, std::span<const double> cdf);

struct DensityOverlay {
  DensityCurve curve;
  RVector eigenvalues;  ///< eigenvalues of S tilde, ascending
  DensityStats stats;
};

/// Grid of `points` nodes over [min(0, lambda_min) - margin, lambda_max + margin]
/// with margin = 0.05 (lambda_max - min(0, lambda_min)) + 5 eta.
std::vector<double> overlay_grid(const RVector& eigenvalues, double eta, std::size_t points);

/// One realization of S tilde (X drawn from `dist` with `seed`) and the
/// deterministic density curve on the overlay grid.
DensityOverlay run_density_overlay(const MixtureModel& m, const EntryDistribution& dist, double eta,
                                   std::size_t grid_points, std::uint64_t seed, const SolverOptions& opts = {},
                                   int threads = 1);
DensityOverlay run_density_overlay(const ExampleSpec& spec, double eta, std::size_t grid_points, std::uint64_t seed,
                                   const SolverOptions& opts = {}, int threads = 1);

struct ErrorRecord {
  Eigen::Index n = 0;
  int realization = 0;
  Complex z;
  double a_error = 0.0;  ///< |(1/n) tr(M R(z)) - deterministic equivalent|
  double b_error = 0.0;  ///< same with M tilde and R tilde(z)
  std::string dist_label;
};

struct ConvergenceRow {
  Eigen::Index n = 0;
  Complex z;
  double mean_a = 0.0;
  double q10_a = 0.0;
  double q90_a = 0.0;
  double mean_b = 0.0;
  double q10_b = 0.0;
  double q90_b = 0.0;
  int failures = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  int reps = 0;
  /// Successful realizations, ordered by (n, realization, z).
  std::vector<ErrorRecord> records;
};

struct StudyOptions {
  /// Overrides the example's native entry law.
  std::optional<EntryDistribution> dist;
  SolverOptions solver;
  int threads = 1;
};

/// For every n: the example is built once from spec.seed, the dual system is
/// solved once per z, and `reps` realizations (X seeded by
/// derive_seed(master_seed, {n, rep})) are compared at every z with the same X.
/// A realization that throws is excluded and counted in `failures`.
ConvergenceTable run_error_study(const ExampleSpec& spec, std::span<const Eigen::Index> n_values, int reps,
                                 std::span<const Complex> z_points, std::uint64_t master_seed,
                                 const StudyOptions& opts = {});

struct UniversalitySummary {
  Eigen::Index n = 0;
  Complex z;
  int reps = 0;
  int failures = 0;
  std::string native_label;
  std::string gaussian_label;
  /// |(1/n) tr(M R^X(z)) - (1/n) tr(M R^Z(z))| per successful realization.
  std::vector<double> diff_a;
  /// Same with M tilde and the companion resolvents.
  std::vector<double> diff_b;
  double mean_a = 0.0;
  double q10_a = 0.0;
  double q90_a = 0.0;
  double mean_b = 0.0;
  double q10_b = 0.0;
  double q90_b = 0.0;
};

/// X under the native law (seed derive_seed(master_seed, {n, rep, 0})) against
/// its similar Gaussian Z (seed derive_seed(master_seed, {n, rep, 1})). Purely
/// empirical; no deterministic solve is involved.
UniversalitySummary run_universality(const ExampleSpec& spec, Eigen::Index n, int reps, Complex z,
                                     std::uint64_t master_seed, const StudyOptions& opts = {});

}  // namespace sepcov
