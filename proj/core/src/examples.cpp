#include "sepcov/examples.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "sepcov/errors.hpp"

namespace sepcov {

std::string_view to_string(Example which) noexcept {
  switch (which) {
    case Example::CovarianceMixture:
      return "example1";
    case Example::MovingAverage:
      return "example2";
    case Example::PermutationMixture:
      return "example3";
  }
  return "unknown";
}

Example parse_example(std::string_view name) {
  if (name == "example1") return Example::CovarianceMixture;
  if (name == "example2") return Example::MovingAverage;
  if (name == "example3") return Example::PermutationMixture;
  throw DomainError("unknown example '" + std::string(name) + "' (expected example1, example2 or example3)");
}

int resolved_terms(const ExampleSpec& spec) {
  if (spec.terms != 0) return spec.terms;
  return spec.which == Example::CovarianceMixture ? 2 : 4;
}

Eigen::Index example_dim(const ExampleSpec& spec) {
  switch (spec.which) {
    case Example::CovarianceMixture:
      return 5 * spec.n;
    case Example::MovingAverage:
      return spec.n;
    case Example::PermutationMixture:
      return 2 * spec.n;
  }
  return spec.n;
}

CMatrix haar_unitary(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionError("haar_unitary: dimension must be positive");
  const CMatrix g = sample_X(dim, dim, EntryDistribution::complex_gaussian(), seed);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(j) *= diag / mag;
  }
  return q;
}

CMatrix random_permutation_matrix(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionError("random_permutation_matrix: dimension must be positive");
  std::vector<Eigen::Index> p(static_cast<std::size_t>(dim));
  std::iota(p.begin(), p.end(), Eigen::Index{0});
  Engine engine = make_engine(seed);
  for (std::size_t i = p.size() - 1; i > 0; --i) std::swap(p[i], p[uniform_below(engine, i + 1)]);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) out(i, p[static_cast<std::size_t>(i)]) = 1.0;
  return out;
}

CMatrix fourier_matrix(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("fourier_matrix: dimension must be positive");
  CMatrix v(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index k = 0; k < dim; ++k) {
    for (Eigen::Index l = 0; l < dim; ++l) {
      // Reduce k*l mod d first so the angle stays accurate for large d.
      const auto idx = (k * l) % dim;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(dim);
      v(k, l) = std::polar(scale, angle);
    }
  }
  return v;
}

CMatrix shift_matrix(Eigen::Index dim, Eigen::Index k) {
  if (dim < 1) throw DimensionError("shift_matrix: dimension must be positive");
  if (k < 0) throw DomainError("shift_matrix: offset must be nonnegative");
  CMatrix s = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i + k < dim; ++i) s(i, i + k) = 1.0;
  return s;
}

namespace {

CMatrix diag_split(Eigen::Index dim, Eigen::Index head, Complex first, Complex rest) {
  CVector v(dim);
  v.head(head).setConstant(first);
  v.tail(dim - head).setConstant(rest);
  return v.asDiagonal();
}

CMatrix linear_diag(Eigen::Index dim) {
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = static_cast<double>(i + 1) / static_cast<double>(dim);
  return v.asDiagonal();
}

BuiltExample covariance_mixture(Eigen::Index n) {
  const Eigen::Index d = 5 * n;
  const Eigen::Index n_half = (n + 1) / 2;
  const Eigen::Index d_half = (d + 1) / 2;
  std::vector<CMatrix> b{diag_split(n, n_half, 1.0, 0.0), diag_split(n, n_half, 0.0, 1.0)};
  std::vector<CMatrix> a{diag_split(d, d_half, 1.0 / 3.0, 0.0), fourier_matrix(d) * diag_split(d, d_half, 0.5, 1.0)};
  CMatrix m_tilde = CMatrix::Constant(n, n, 1.0 / std::sqrt(static_cast<double>(n)));
  return {MixtureModel(std::move(a), std::move(b)), CMatrix::Identity(d, d), std::move(m_tilde),
          EntryDistribution::complex_gaussian()};
}

BuiltExample moving_average(Eigen::Index n, int terms, std::uint64_t seed) {
  const Eigen::Index d = n;
  const CMatrix scale = linear_diag(d);
  std::vector<CMatrix> a;
  std::vector<CMatrix> b;
  for (int r = 0; r < terms; ++r) {
    b.push_back(shift_matrix(n, r));
    if (r == 0)
      a.push_back(CMatrix::Identity(d, d));
    else
      a.push_back(haar_unitary(d, derive_seed(seed, {2, static_cast<std::uint64_t>(r)})) * scale);
  }
  CMatrix m_tilde = diag_split(n, n / 2, 1.0, 0.0);
  return {MixtureModel(std::move(a), std::move(b)), scale, std::move(m_tilde), EntryDistribution::rademacher()};
}

BuiltExample permutation_mixture(Eigen::Index n, int terms, std::uint64_t seed) {
  const Eigen::Index d = 2 * n;
  std::vector<CMatrix> a;
  std::vector<CMatrix> b;
  for (int r = 0; r < terms; ++r) {
    const auto ru = static_cast<std::uint64_t>(r);
    a.push_back(random_permutation_matrix(d, derive_seed(seed, {3, 0, ru})));
    b.push_back(random_permutation_matrix(n, derive_seed(seed, {3, 1, ru})));
  }
  CMatrix m = CMatrix::Zero(d, d);
  m(0, 0) = 1.0;
  CMatrix m_tilde = b.front();
  return {MixtureModel(std::move(a), std::move(b)), std::move(m), std::move(m_tilde),
          EntryDistribution::scaled_student_t(7)};
}

}  // namespace

BuiltExample build_example(const ExampleSpec& spec) {
  if (spec.n < 1) throw DomainError("build_example: n must be positive");
  if (spec.terms < 0) throw DomainError("build_example: R must be positive");
  const int terms = resolved_terms(spec);
  switch (spec.which) {
    case Example::CovarianceMixture:
      if (terms != 2) throw DomainError("build_example: example1 has R = 2, got R = " + std::to_string(terms));
      return covariance_mixture(spec.n);
    case Example::MovingAverage:
      if (terms > spec.n)
        throw DomainError("build_example: example2 needs R <= n, got R = " + std::to_string(terms) +
                          ", n = " + std::to_string(spec.n));
      return moving_average(spec.n, terms, spec.seed);
    case Example::PermutationMixture:
      return permutation_mixture(spec.n, terms, spec.seed);
  }
  throw DomainError("build_example: unknown example");
}

}  // namespace sepcov
