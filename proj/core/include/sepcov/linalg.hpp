#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace sepcov {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Which half of the dual system a quantity belongs to: side A lives in
/// dimension d (S, A_r), side B in dimension n (S tilde, B_r).
enum class Side { A, B };

constexpr std::string_view to_string(Side side) noexcept { return side == Side::A ? "A" : "B"; }

/// Spectral decomposition H = U diag(lambda) U* with eigenvalues sorted in
/// non-increasing order; column j of `eigenvectors` pairs with eigenvalue j.
struct HermitianEigen {
  RVector eigenvalues;
  CMatrix eigenvectors;

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

/// Decomposes a Hermitian matrix. The input is replaced by (H + H*)/2 before
/// the decomposition. Throws DimensionError for non-square input, DomainError
/// when H is visibly non-Hermitian and NumericError when the solver fails.
HermitianEigen hermitian_eig(const CMatrix& h);

/// (H - z Id)^{-1} V evaluated through the eigendecomposition of H.
/// Requires Im z > 0 (DomainError otherwise).
CMatrix solve_shifted(const HermitianEigen& eig, Complex z, const CMatrix& v);
CMatrix solve_shifted(const CMatrix& h, Complex z, const CMatrix& v);

/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Smallest eigenvalue of (H + H*)/2.
double min_eigenvalue_hermitian(const CMatrix& h);

/// (M + M*)/2
CMatrix hermitian_part(const CMatrix& m);
/// (M - M*)/(2i); Hermitian for every square M.
CMatrix imaginary_part(const CMatrix& m);

/// Smallest eigenvalue of imaginary_part(m).
double min_imaginary_eigenvalue(const CMatrix& m);

/// sup_{i,j} |m_ij|
double max_abs_entry(const CMatrix& m);

bool all_finite(const CMatrix& m);

void require_square(const CMatrix& m, std::string_view what);
void require_finite(const CMatrix& m, std::string_view what);
void require_upper_half_plane(Complex z, std::string_view what);

/// U diag(lambda) U*
CMatrix reconstruct(const HermitianEigen& eig);

}  // namespace sepcov
