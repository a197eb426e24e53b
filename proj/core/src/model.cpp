#include "sepcov/model.hpp"

#include <algorithm>
#include <string>

#include "sepcov/errors.hpp"

namespace sepcov {

MixtureModel::MixtureModel(std::vector<CMatrix> a, std::vector<CMatrix> b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty()) throw DimensionError("MixtureModel: R must be at least 1");
  if (a_.size() != b_.size())
    throw DimensionError("MixtureModel: got " + std::to_string(a_.size()) + " A-matrices and " +
                         std::to_string(b_.size()) + " B-matrices");
  d_ = a_.front().rows();
  n_ = b_.front().rows();
  for (std::size_t r = 0; r < a_.size(); ++r) {
    const std::string tag = "MixtureModel: A_" + std::to_string(r + 1);
    if (a_[r].rows() != d_ || a_[r].cols() != d_ || d_ < 1)
      throw DimensionError(tag + " must be " + std::to_string(d_) + "x" + std::to_string(d_));
    require_finite(a_[r], tag);
  }
  for (std::size_t r = 0; r < b_.size(); ++r) {
    const std::string tag = "MixtureModel: B_" + std::to_string(r + 1);
    if (b_[r].rows() != n_ || b_[r].cols() != n_ || n_ < 1)
      throw DimensionError(tag + " must be " + std::to_string(n_) + "x" + std::to_string(n_));
    require_finite(b_[r], tag);
  }
}

CMatrix a_product(const MixtureModel& m, std::size_t r, std::size_t s) { return m.a(r) * m.a(s).adjoint(); }

CMatrix b_product(const MixtureModel& m, std::size_t r, std::size_t s) { return m.b(s).adjoint() * m.b(r); }

GramMatrices gram_matrices(const MixtureModel& m) {
  const auto R = static_cast<Eigen::Index>(m.terms());
  const double inv_n = 1.0 / static_cast<double>(m.n());
  GramMatrices g{CMatrix(R, R), CMatrix(R, R)};
  // tr(A_r A_s*) = <A_s, A_r>_F, so the Gram matrices are Frobenius inner products.
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index s = 0; s < R; ++s) {
      g.a(r, s) = inv_n * m.a(s).conjugate().cwiseProduct(m.a(r)).sum();
      g.b(r, s) = inv_n * m.b(s).conjugate().cwiseProduct(m.b(r)).sum();
    }
  }
  g.a = hermitian_part(g.a);
  g.b = hermitian_part(g.b);
  return g;
}

AssumptionReport check_assumptions(const MixtureModel& m) {
  AssumptionReport rep;
  rep.c_star = std::max(static_cast<double>(m.d()) / static_cast<double>(m.n()), 1.0);

  CMatrix sum_aa = CMatrix::Zero(m.d(), m.d());
  CMatrix sum_bb = CMatrix::Zero(m.n(), m.n());
  for (std::size_t r = 0; r < m.terms(); ++r) {
    const double na = spectral_norm(m.a(r));
    const double nb = spectral_norm(m.b(r));
    rep.sum_norm_sq_a += na * na;
    rep.sum_norm_sq_b += nb * nb;
    sum_aa += m.a(r) * m.a(r).adjoint();
    sum_bb += m.b(r).adjoint() * m.b(r);
  }
  rep.sigma_sq = std::max({rep.sum_norm_sq_a, rep.sum_norm_sq_b, 1.0});

  const auto eig_aa = hermitian_eig(hermitian_part(sum_aa));
  const auto eig_bb = hermitian_eig(hermitian_part(sum_bb));
  rep.op_norm_aa = eig_aa.eigenvalues(0);
  rep.op_norm_bb = eig_bb.eigenvalues(0);
  rep.lam_min_aa = eig_aa.eigenvalues(eig_aa.size() - 1);
  rep.lam_min_bb = eig_bb.eigenvalues(eig_bb.size() - 1);

  auto gram = gram_matrices(m);
  rep.lam_min_gram_a = min_eigenvalue_hermitian(gram.a);
  rep.lam_min_gram_b = min_eigenvalue_hermitian(gram.b);
  rep.gram_a = std::move(gram.a);
  rep.gram_b = std::move(gram.b);

  rep.tau_raw = std::min({rep.lam_min_aa, rep.lam_min_bb, rep.lam_min_gram_a, rep.lam_min_gram_b});
  return rep;
}

}  // namespace sepcov
