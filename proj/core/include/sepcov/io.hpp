#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sepcov/detequiv.hpp"
#include "sepcov/ensemble.hpp"
#include "sepcov/examples.hpp"
#include "sepcov/experiments.hpp"
#include "sepcov/model.hpp"

namespace sepcov {

/// A model read from a JSON model spec together with its test matrices and
/// entry law. Specs without test matrices get M = Id_d, M tilde = Id_n;
/// specs without "dist" get complex Gaussian entries.
struct LoadedModel {
  MixtureModel model;
  CMatrix m;
  CMatrix m_tilde;
  EntryDistribution dist;
  /// Set when the spec is a whole-model generator reference.
  std::optional<ExampleSpec> example;
};

/// Model spec grammar:
///
///   { "d": int, "n": int, "R": int, "A": [matrix...], "B": [matrix...],
///     "M": matrix, "M_tilde": matrix, "dist": string }
///   { "generator": { "name": "example1|2|3", "params": { "n": int, "R": int }, "seed": u64 },
///     "M": ..., "M_tilde": ..., "dist": ... }
///
/// where a complex number is [re, im] (a bare number is real) and a matrix is
///
///   { "dense": [z, ...] }        row-major, dim^2 entries (rows may be nested)
///   { "diag": [z, ...] }
///   { "permutation": [int, ...] } 0-based, entry (i, p[i]) = 1
///   { "generator": { "name": "identity|fourier|haar_unitary|random_permutation|shift",
///                    "params": { "k": int }, "seed": u64 } }
///
/// "d", "n", "R" and "M"/"M_tilde"/"dist" are optional. Throws ParseError
/// naming the offending field.
LoadedModel parse_model_spec(std::string_view json_text);
LoadedModel load_model_spec(const std::filesystem::path& path);

/// {"generator": {...}} referencing the example, plus d, n and R.
std::string generator_spec_json(const ExampleSpec& spec);

/// Fully expanded spec with dense matrices.
std::string dense_spec_json(const LoadedModel& loaded);

/// Shortest representation that reads back to the same double.
std::string format_double(double x);

std::string to_json(const AssumptionReport& report);
std::string to_json(const DualSolution& sol);
std::string to_json(std::span<const DualSolution> sols);
std::string to_json(const DensityCurve& curve);
std::string to_json(const ConvergenceTable& table);
std::string to_json(const UniversalitySummary& summary);

/// Empirical transforms of one realization at one z.
struct EmpiricalPoint {
  Complex z;
  CMatrix delta_a;
  CMatrix delta_b;
  Complex companion;  ///< (1/n) tr R tilde(z)
};

struct SimulationDump {
  std::string dist;
  std::uint64_t seed = 0;
  RVector eigenvalues_s;
  RVector eigenvalues_s_tilde;
  std::vector<EmpiricalPoint> points;
};

std::string to_json(const SimulationDump& dump);

/// "x,density"
std::string density_csv(const DensityCurve& curve);
/// "index,eigenvalue", 0-based index
std::string eigenvalue_csv(const RVector& eigenvalues);
/// "n,z_re,z_im,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b,failures"
std::string convergence_csv(const ConvergenceTable& table);
/// "n,z_re,z_im,reps,failures,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b"
std::string universality_csv(const UniversalitySummary& summary);

/// Writes `text` verbatim (binary mode, so LF stays LF). Throws Error on
/// I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sepcov
