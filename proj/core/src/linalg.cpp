#include "sepcov/linalg.hpp"

#include <cmath>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {

namespace {

std::string shape(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void require_square(const CMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " + shape(m));
}

void require_finite(const CMatrix& m, std::string_view what) {
  if (!all_finite(m)) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

void require_upper_half_plane(Complex z, std::string_view what) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError(std::string(what) + ": requires Im z > 0, got z = " + std::to_string(z.real()) +
                      (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i");
}

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

CMatrix imaginary_part(const CMatrix& m) { return (m - m.adjoint()) / Complex(0.0, 2.0); }

double max_abs_entry(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

HermitianEigen hermitian_eig(const CMatrix& h) {
  require_square(h, "hermitian_eig");
  const double asym = (h - h.adjoint()).norm();
  if (!(asym <= 1e-8 * (1.0 + h.norm())))
    throw DomainError("hermitian_eig: input is not Hermitian (||H - H*||_F = " + std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success)
    throw NumericError("hermitian_eig: eigensolver did not converge for a " + shape(h) + " matrix");

  // Eigen returns ascending order; flip to lambda_1 >= ... >= lambda_N.
  HermitianEigen out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

CMatrix reconstruct(const HermitianEigen& eig) {
  return eig.eigenvectors * eig.eigenvalues.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

CMatrix solve_shifted(const HermitianEigen& eig, Complex z, const CMatrix& v) {
  require_upper_half_plane(z, "solve_shifted");
  if (v.rows() != eig.size())
    throw DimensionError("solve_shifted: right-hand side has " + std::to_string(v.rows()) +
                         " rows, matrix has size " + std::to_string(eig.size()));
  CVector inv(eig.size());
  for (Eigen::Index j = 0; j < eig.size(); ++j) inv(j) = 1.0 / (eig.eigenvalues(j) - z);
  return eig.eigenvectors * (inv.asDiagonal() * (eig.eigenvectors.adjoint() * v));
}

CMatrix solve_shifted(const CMatrix& h, Complex z, const CMatrix& v) {
  require_upper_half_plane(z, "solve_shifted");
  return solve_shifted(hermitian_eig(h), z, v);
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

double min_eigenvalue_hermitian(const CMatrix& h) {
  require_square(h, "min_eigenvalue_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("min_eigenvalue_hermitian: eigensolver did not converge for a " + shape(h) + " matrix");
  return solver.eigenvalues()(0);
}

double min_imaginary_eigenvalue(const CMatrix& m) {
  require_square(m, "min_imaginary_eigenvalue");
  return min_eigenvalue_hermitian(imaginary_part(m));
}

}  // namespace sepcov
