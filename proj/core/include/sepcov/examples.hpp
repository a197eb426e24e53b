#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sepcov/ensemble.hpp"
#include "sepcov/linalg.hpp"
#include "sepcov/model.hpp"
#include "sepcov/rng.hpp"

namespace sepcov {

/// The three benchmark models.
///
/// CovarianceMixture: d = 5n, R = 2, two blocks of columns with different
/// population covariances (complex Gaussian entries).
/// MovingAverage: d = n, B_r shifts by r - 1, A_r = U_r diag(1/d, ..., 1)
/// with Haar unitaries (Rademacher entries).
/// PermutationMixture: d = 2n, A_r and B_r uniform permutation matrices
/// (scaled t_7 entries).
enum class Example { CovarianceMixture, MovingAverage, PermutationMixture };

std::string_view to_string(Example which) noexcept;

/// "example1" / "example2" / "example3"; DomainError otherwise.
Example parse_example(std::string_view name);

struct ExampleSpec {
  Example which = Example::CovarianceMixture;
  Eigen::Index n = 100;
  /// Number of terms; 0 picks the default (2, 4, 4).
  int terms = 0;
  /// Seed of the random ingredients (Haar unitaries, permutations).
  std::uint64_t seed = kDefaultSeed;
};

/// R actually used by build_example.
int resolved_terms(const ExampleSpec& spec);

/// d implied by the example: 5n, n or 2n.
Eigen::Index example_dim(const ExampleSpec& spec);

struct BuiltExample {
  MixtureModel model;
  CMatrix m;        ///< d x d test matrix
  CMatrix m_tilde;  ///< n x n test matrix
  EntryDistribution dist;
};

/// Throws DomainError for n < 1, terms < 0, terms != 2 for
/// CovarianceMixture, or terms > n for MovingAverage.
BuiltExample build_example(const ExampleSpec& spec);

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// columns of Q rotated by the phases of diag(R).
CMatrix haar_unitary(Eigen::Index dim, std::uint64_t seed);

/// Uniform permutation p (Fisher-Yates) as the 0/1 matrix with P(i, p(i)) = 1.
CMatrix random_permutation_matrix(Eigen::Index dim, std::uint64_t seed);

/// (1/sqrt(d)) exp(-2 pi i k l / d), k, l = 0..d-1.
CMatrix fourier_matrix(Eigen::Index dim);

/// Ones on the k-th upper diagonal: S(i, i + k) = 1.
CMatrix shift_matrix(Eigen::Index dim, Eigen::Index k);

}  // namespace sepcov
