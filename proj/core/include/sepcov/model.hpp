#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "sepcov/linalg.hpp"

namespace sepcov {

/// The deterministic families (A_r) of d x d and (B_r) of n x n matrices
/// defining Y = sum_r A_r X B_r. Immutable once constructed.
class MixtureModel {
 public:
  /// Throws DimensionError when the families have different lengths, are
  /// empty, or contain a matrix of the wrong shape; DomainError on
  /// non-finite entries.
  MixtureModel(std::vector<CMatrix> a, std::vector<CMatrix> b);

  Eigen::Index d() const noexcept { return d_; }
  Eigen::Index n() const noexcept { return n_; }
  std::size_t terms() const noexcept { return a_.size(); }

  const std::vector<CMatrix>& a() const noexcept { return a_; }
  const std::vector<CMatrix>& b() const noexcept { return b_; }
  const CMatrix& a(std::size_t r) const { return a_.at(r); }
  const CMatrix& b(std::size_t r) const { return b_.at(r); }

  Eigen::Index dim(Side side) const noexcept { return side == Side::A ? d_ : n_; }

 private:
  std::vector<CMatrix> a_;
  std::vector<CMatrix> b_;
  Eigen::Index d_ = 0;
  Eigen::Index n_ = 0;
};

/// A_r A_s*, the d x d matrices weighting delta^(B) on side A.
CMatrix a_product(const MixtureModel& m, std::size_t r, std::size_t s);
/// B_s* B_r, the n x n matrices weighting delta^(A) on side B.
CMatrix b_product(const MixtureModel& m, std::size_t r, std::size_t s);

struct GramMatrices {
  CMatrix a;  ///< (1/n) tr(A_r A_s*)
  CMatrix b;  ///< (1/n) tr(B_s* B_r)
};

GramMatrices gram_matrices(const MixtureModel& m);

/// Constants of the non-asymptotic assumptions evaluated on a model.
///
/// `sigma_sq` follows the literal definition max(sum_r ||A_r||^2,
/// sum_r ||B_r||^2, 1). The operator norms of sum_r A_r A_r* and
/// sum_r B_r* B_r are reported alongside because for block-projector
/// families (Example 1) they are much smaller than the literal sums.
///
/// `tau_raw` is reported unclamped. Any tau <= min(tau_raw, 1 - eps) is a
/// valid choice for the non-degeneracy/identifiability bounds.
struct AssumptionReport {
  double c_star = 1.0;
  double sigma_sq = 1.0;
  double sum_norm_sq_a = 0.0;
  double sum_norm_sq_b = 0.0;
  double op_norm_aa = 0.0;
  double op_norm_bb = 0.0;
  double lam_min_aa = 0.0;
  double lam_min_bb = 0.0;
  double lam_min_gram_a = 0.0;
  double lam_min_gram_b = 0.0;
  double tau_raw = 0.0;
  CMatrix gram_a;
  CMatrix gram_b;

  bool admissible() const noexcept { return tau_raw > 0.0; }
};

AssumptionReport check_assumptions(const MixtureModel& m);

}  // namespace sepcov
