#pragma once

#include "cgp/core.hpp"

#include <Eigen/SparseCore>

#include <string_view>
#include <vector>

namespace cgp {

enum class QpStatus { Optimal, Infeasible, MaxIter };

std::string_view to_string(QpStatus status);

/// Strictly convex QP
///
///   minimise   1/2 (x - center)^T H (x - center)
///   subject to E x  = e
///              G x >= g
///
/// given through a square factor F with F F^T = H^{-1}. For a Gram-matrix
/// objective c^T Gamma^{-1} c the Cholesky factor of Gamma is such a factor,
/// so H itself is never formed.
struct DualQp {
  Matrix inverse_hessian_factor;
  Vector center;  // empty means zero
  Eigen::SparseMatrix<double, Eigen::RowMajor> eq;
  Vector eq_rhs;
  Eigen::SparseMatrix<double, Eigen::RowMajor> ineq;
  Vector ineq_rhs;
};

struct DualQpOptions {
  /// Absolute tolerance on the (row-normalised) inequality residuals.
  double feasibility_tol = 1e-10;
  int max_iter = 1000;
  /// A constraint whose conditional variance given the active set falls
  /// below this fraction of its prior variance is treated as dependent.
  double dependence_tol = 1e-13;
};

struct DualQpResult {
  QpStatus status = QpStatus::MaxIter;
  Vector x;
  /// Multipliers with H (x - center) = E^T eq_multipliers + G^T ineq_multipliers.
  Vector eq_multipliers;
  Vector ineq_multipliers;
  std::vector<Index> active_ineq;
  int iterations = 0;
};

/// Goldfarb-Idnani dual active-set method. Starts from the unconstrained
/// minimiser, adds equalities, then repeatedly adds the most violated
/// inequality while keeping dual feasibility. An inequality that cannot be
/// added because no primal step exists and no active constraint can be
/// dropped proves the problem infeasible.
DualQpResult solve_dual_active_set(const DualQp& qp, const DualQpOptions& options = {});

}  // namespace cgp
