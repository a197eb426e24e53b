#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sepcov/linalg.hpp"
#include "sepcov/model.hpp"
#include "sepcov/rng.hpp"

namespace sepcov {

/// Law of the iid entries of X. Every kind is centered with E|X|^2 = 1.
///
/// ScaledStudentT(nu) draws t_nu / sqrt(nu / (nu - 2)); only nu >= 7 is
/// accepted so the sixth moment is finite. Its entries are real, so
/// E[X^2] = 1.
class EntryDistribution {
 public:
  enum class Kind { ComplexGaussian, RealGaussian, Rademacher, ScaledStudentT, SimilarGaussian };

  static EntryDistribution complex_gaussian();
  static EntryDistribution real_gaussian();
  static EntryDistribution rademacher();
  /// Throws DomainError for dof < 7.
  static EntryDistribution scaled_student_t(int dof);
  /// Gaussian entries a U + b V matching the first two moments of `base`.
  static EntryDistribution similar_gaussian(const EntryDistribution& base);

  /// Accepts complex_gaussian, real_gaussian, rademacher, student_t (dof 7),
  /// student_t:<dof>, similar_gaussian:<base>. Throws DomainError otherwise.
  static EntryDistribution parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  int dof() const noexcept { return dof_; }
  /// Only valid for SimilarGaussian.
  const EntryDistribution& base() const;

  /// E[X_ij^2] (not the absolute second moment, which is always 1).
  Complex second_moment() const;

  std::string name() const;

  Complex draw(Engine& engine) const;

 private:
  explicit EntryDistribution(Kind kind, int dof = 0, std::shared_ptr<const EntryDistribution> base = nullptr)
      : kind_(kind), dof_(dof), base_(std::move(base)) {}

  Kind kind_;
  int dof_;
  std::shared_ptr<const EntryDistribution> base_;
};

struct SimilarCoefficients {
  Complex a;
  Complex b;
};

/// a = principal sqrt of E[X^2], b = sqrt(1 - |a|^2) >= 0, so that
/// Z = a U + b V (U ~ N(0,1), V ~ CN(0,1)) has E[Z^2] = E[X^2] and
/// E|Z|^2 = 1. Throws DomainError for |e_x2| > 1 + 1e-12.
SimilarCoefficients similar_gaussian_coeffs(Complex e_x2);

/// d x n matrix of iid entries, a pure function of (d, n, dist, seed).
/// Entries are drawn in row-major order from one stream.
CMatrix sample_X(Eigen::Index d, Eigen::Index n, const EntryDistribution& dist, std::uint64_t seed);

/// Y = sum_r A_r X B_r. Throws DimensionError unless X is d x n.
CMatrix build_Y(const MixtureModel& m, const CMatrix& x);

struct SampleCovariances {
  CMatrix s;        ///< (1/n) Y Y*, d x d
  CMatrix s_tilde;  ///< (1/n) Y* Y, n x n
};

SampleCovariances sample_covariances(const CMatrix& y);

/// Empirical matrix-valued measure of one side: eigenvalues of S (side A)
/// or S tilde (side B) with one PSD R x R atom per eigenvalue,
/// (1/n)(u_j* A_r A_s* u_j)_{r,s} or (1/n)(u~_j* B_s* B_r u~_j)_{r,s}.
struct EmpiricalSpectrum {
  Side side = Side::A;
  RVector eigenvalues;
  std::vector<CMatrix> atoms;

  /// Sum of all atoms; equals the Gram matrix of the side.
  CMatrix total_mass() const;
  /// sum_j atom_j / (lambda_j - z)
  CMatrix stieltjes(Complex z) const;
};

/// `eig` must decompose S for side A and S tilde for side B.
EmpiricalSpectrum empirical_spectrum(const MixtureModel& m, const HermitianEigen& eig, Side side);

/// delta-hat^(A)_{r,s} = (1/n) tr(A_r A_s* R(z)) or
/// delta-hat^(B)_{r,s} = (1/n) tr(B_s* B_r R~(z)), with the resolvent
/// applied through `eig`.
CMatrix empirical_delta(const MixtureModel& m, const HermitianEigen& eig, Complex z, Side side);

/// z -> (1/n) tr(M (H - z)^{-1}) = (1/n) sum_j w_j / (lambda_j - z) with
/// w_j = u_j* M u_j; precomputes the weights so many z are cheap.
class ResolventFunctional {
 public:
  ResolventFunctional(const HermitianEigen& eig, const CMatrix& test, Eigen::Index n);

  Complex operator()(Complex z) const;

 private:
  RVector eigenvalues_;
  CVector weights_;
  double inv_n_;
};

/// (1/n) tr(M R(z)) for side A, (1/n) tr(M R~(z)) for side B.
Complex empirical_trace(const MixtureModel& m, const HermitianEigen& eig, Complex z, const CMatrix& test, Side side);

/// (1/n) tr(R~(z)): Stieltjes transform of the eigenvalue distribution of S tilde.
Complex empirical_companion_stieltjes(const HermitianEigen& eig_s_tilde, Complex z);

/// One realization: X, both sample covariances and their decompositions.
struct Realization {
  CMatrix x;
  HermitianEigen eig_s;
  HermitianEigen eig_s_tilde;
};

/// Samples X, builds Y, S, S tilde and decomposes both.
Realization simulate(const MixtureModel& m, const EntryDistribution& dist, std::uint64_t seed);

}  // namespace sepcov
