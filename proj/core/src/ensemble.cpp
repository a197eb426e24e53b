#include "sepcov/ensemble.hpp"

#include <cmath>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {

EntryDistribution EntryDistribution::complex_gaussian() { return EntryDistribution(Kind::ComplexGaussian); }

EntryDistribution EntryDistribution::real_gaussian() { return EntryDistribution(Kind::RealGaussian); }

EntryDistribution EntryDistribution::rademacher() { return EntryDistribution(Kind::Rademacher); }

EntryDistribution EntryDistribution::scaled_student_t(int dof) {
  if (dof < 7)
    throw DomainError("ScaledStudentT: " + std::to_string(dof) +
                      " degrees of freedom leave the sixth moment infinite; need dof >= 7");
  return EntryDistribution(Kind::ScaledStudentT, dof);
}

EntryDistribution EntryDistribution::similar_gaussian(const EntryDistribution& base) {
  return EntryDistribution(Kind::SimilarGaussian, 0, std::make_shared<const EntryDistribution>(base));
}

EntryDistribution EntryDistribution::parse(std::string_view name) {
  constexpr std::string_view similar = "similar_gaussian:";
  constexpr std::string_view student = "student_t:";
  if (name == "complex_gaussian") return complex_gaussian();
  if (name == "real_gaussian") return real_gaussian();
  if (name == "rademacher") return rademacher();
  if (name == "student_t") return scaled_student_t(7);
  if (name.starts_with(student)) {
    const std::string digits(name.substr(student.size()));
    std::size_t used = 0;
    int dof = 0;
    try {
      dof = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size()) throw DomainError("unknown distribution '" + std::string(name) + "'");
    return scaled_student_t(dof);
  }
  if (name.starts_with(similar)) return similar_gaussian(parse(name.substr(similar.size())));
  throw DomainError("unknown distribution '" + std::string(name) +
                    "' (expected complex_gaussian, real_gaussian, rademacher, student_t[:dof], similar_gaussian:<base>)");
}

const EntryDistribution& EntryDistribution::base() const {
  if (!base_) throw DomainError("EntryDistribution: only SimilarGaussian has a base law");
  return *base_;
}

Complex EntryDistribution::second_moment() const {
  switch (kind_) {
    case Kind::ComplexGaussian:
      return 0.0;
    case Kind::RealGaussian:
    case Kind::Rademacher:
    case Kind::ScaledStudentT:
      return 1.0;
    case Kind::SimilarGaussian:
      return base_->second_moment();
  }
  return 0.0;
}

std::string EntryDistribution::name() const {
  switch (kind_) {
    case Kind::ComplexGaussian:
      return "complex_gaussian";
    case Kind::RealGaussian:
      return "real_gaussian";
    case Kind::Rademacher:
      return "rademacher";
    case Kind::ScaledStudentT:
      return dof_ == 7 ? "student_t" : "student_t:" + std::to_string(dof_);
    case Kind::SimilarGaussian:
      return "similar_gaussian:" + base_->name();
  }
  return "unknown";
}

Complex EntryDistribution::draw(Engine& engine) const {
  switch (kind_) {
    case Kind::ComplexGaussian: {
      const double re = standard_normal(engine);
      const double im = standard_normal(engine);
      return Complex(re, im) * M_SQRT1_2;
    }
    case Kind::RealGaussian:
      return standard_normal(engine);
    case Kind::Rademacher:
      return (engine() >> 63) ? 1.0 : -1.0;
    case Kind::ScaledStudentT: {
      const double g = standard_normal(engine);
      double chi2 = 0.0;
      for (int k = 0; k < dof_; ++k) {
        const double h = standard_normal(engine);
        chi2 += h * h;
      }
      const double nu = dof_;
      return g / std::sqrt(chi2 / nu) / std::sqrt(nu / (nu - 2.0));
    }
    case Kind::SimilarGaussian: {
      const auto [a, b] = similar_gaussian_coeffs(base_->second_moment());
      const double u = standard_normal(engine);
      const double v_re = standard_normal(engine);
      const double v_im = standard_normal(engine);
      return a * u + b * Complex(v_re, v_im) * M_SQRT1_2;
    }
  }
  return 0.0;
}

SimilarCoefficients similar_gaussian_coeffs(Complex e_x2) {
  const double mag = std::abs(e_x2);
  if (!(mag <= 1.0 + 1e-12)) throw DomainError("similar_gaussian_coeffs: |E[X^2]| must not exceed E|X|^2 = 1");
  const Complex a = std::sqrt(e_x2);
  return {a, std::sqrt(std::max(0.0, 1.0 - std::norm(a)))};
}

CMatrix sample_X(Eigen::Index d, Eigen::Index n, const EntryDistribution& dist, std::uint64_t seed) {
  if (d < 1 || n < 1) throw DimensionError("sample_X: dimensions must be positive");
  Engine engine = make_engine(seed);
  CMatrix x(d, n);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = dist.draw(engine);
  return x;
}

CMatrix build_Y(const MixtureModel& m, const CMatrix& x) {
  if (x.rows() != m.d() || x.cols() != m.n())
    throw DimensionError("build_Y: X must be " + std::to_string(m.d()) + "x" + std::to_string(m.n()));
  CMatrix y = CMatrix::Zero(m.d(), m.n());
  for (std::size_t r = 0; r < m.terms(); ++r) y.noalias() += m.a(r) * (x * m.b(r));
  return y;
}

SampleCovariances sample_covariances(const CMatrix& y) {
  const double inv_n = 1.0 / static_cast<double>(y.cols());
  CMatrix s = inv_n * (y * y.adjoint());
  CMatrix st = inv_n * (y.adjoint() * y);
  return {hermitian_part(s), hermitian_part(st)};
}

CMatrix EmpiricalSpectrum::total_mass() const {
  if (atoms.empty()) return {};
  CMatrix sum = CMatrix::Zero(atoms.front().rows(), atoms.front().cols());
  for (const auto& a : atoms) sum += a;
  return sum;
}

CMatrix EmpiricalSpectrum::stieltjes(Complex z) const {
  require_upper_half_plane(z, "EmpiricalSpectrum::stieltjes");
  if (atoms.empty()) return {};
  CMatrix sum = CMatrix::Zero(atoms.front().rows(), atoms.front().cols());
  for (std::size_t j = 0; j < atoms.size(); ++j)
    sum += atoms[j] / (eigenvalues(static_cast<Eigen::Index>(j)) - z);
  return sum;
}

namespace {

void require_side_dim(const MixtureModel& m, const HermitianEigen& eig, Side side, std::string_view what) {
  if (eig.size() != m.dim(side))
    throw DimensionError(std::string(what) + ": decomposition has size " + std::to_string(eig.size()) +
                         ", side " + std::string(to_string(side)) + " needs " + std::to_string(m.dim(side)));
}

}  // namespace

EmpiricalSpectrum empirical_spectrum(const MixtureModel& m, const HermitianEigen& eig, Side side) {
  require_side_dim(m, eig, side, "empirical_spectrum");
  const auto R = static_cast<Eigen::Index>(m.terms());
  const Eigen::Index dim = eig.size();
  const double inv_n = 1.0 / static_cast<double>(m.n());

  // Side A: column j of A_r* U is A_r* u_j; atom(r,s) = (1/n) <A_r* u_j, A_s* u_j>.
  // Side B: column j of B_r U~ is B_r u~_j; atom(r,s) = (1/n) <B_s u~_j, B_r u~_j>.
  std::vector<CMatrix> images;
  images.reserve(m.terms());
  for (std::size_t r = 0; r < m.terms(); ++r)
    images.push_back(side == Side::A ? CMatrix(m.a(r).adjoint() * eig.eigenvectors) : CMatrix(m.b(r) * eig.eigenvectors));

  EmpiricalSpectrum out;
  out.side = side;
  out.eigenvalues = eig.eigenvalues;
  out.atoms.reserve(static_cast<std::size_t>(dim));
  CMatrix stacked(dim, R);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index r = 0; r < R; ++r) stacked.col(r) = images[static_cast<std::size_t>(r)].col(j);
    CMatrix gram = inv_n * (stacked.adjoint() * stacked);
    if (side == Side::B) gram.transposeInPlace();
    out.atoms.push_back(hermitian_part(gram));
  }
  return out;
}

CMatrix empirical_delta(const MixtureModel& m, const HermitianEigen& eig, Complex z, Side side) {
  require_upper_half_plane(z, "empirical_delta");
  require_side_dim(m, eig, side, "empirical_delta");
  const Eigen::Index dim = eig.size();
  const CMatrix resolvent = solve_shifted(eig, z, CMatrix::Identity(dim, dim));
  const CMatrix rt = resolvent.transpose();
  const auto R = static_cast<Eigen::Index>(m.terms());
  const double inv_n = 1.0 / static_cast<double>(m.n());
  CMatrix out(R, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index s = 0; s < R; ++s) {
      const auto ru = static_cast<std::size_t>(r);
      const auto su = static_cast<std::size_t>(s);
      const CMatrix p = side == Side::A ? a_product(m, ru, su) : b_product(m, ru, su);
      out(r, s) = inv_n * p.cwiseProduct(rt).sum();
    }
  }
  return out;
}

ResolventFunctional::ResolventFunctional(const HermitianEigen& eig, const CMatrix& test, Eigen::Index n)
    : eigenvalues_(eig.eigenvalues), weights_(eig.size()), inv_n_(1.0 / static_cast<double>(n)) {
  if (test.rows() != eig.size() || test.cols() != eig.size())
    throw DimensionError("ResolventFunctional: test matrix must be " + std::to_string(eig.size()) + "x" +
                         std::to_string(eig.size()));
  const CMatrix mu = test * eig.eigenvectors;
  for (Eigen::Index j = 0; j < eig.size(); ++j) weights_(j) = eig.eigenvectors.col(j).dot(mu.col(j));
}

Complex ResolventFunctional::operator()(Complex z) const {
  require_upper_half_plane(z, "ResolventFunctional");
  Complex sum = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) sum += weights_(j) / (eigenvalues_(j) - z);
  return inv_n_ * sum;
}

Complex empirical_trace(const MixtureModel& m, const HermitianEigen& eig, Complex z, const CMatrix& test, Side side) {
  require_side_dim(m, eig, side, "empirical_trace");
  return ResolventFunctional(eig, test, m.n())(z);
}

Complex empirical_companion_stieltjes(const HermitianEigen& eig_s_tilde, Complex z) {
  require_upper_half_plane(z, "empirical_companion_stieltjes");
  Complex sum = 0.0;
  for (Eigen::Index j = 0; j < eig_s_tilde.size(); ++j) sum += 1.0 / (eig_s_tilde.eigenvalues(j) - z);
  return sum / static_cast<double>(eig_s_tilde.size());
}

Realization simulate(const MixtureModel& m, const EntryDistribution& dist, std::uint64_t seed) {
  Realization out;
  out.x = sample_X(m.d(), m.n(), dist, seed);
  const auto cov = sample_covariances(build_Y(m, out.x));
  out.eig_s = hermitian_eig(cov.s);
  out.eig_s_tilde = hermitian_eig(cov.s_tilde);
  return out;
}

}  // namespace sepcov
