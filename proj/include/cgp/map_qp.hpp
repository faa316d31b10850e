#pragma once

#include "cgp/constraints.hpp"
#include "cgp/finite_rkhs.hpp"
#include "cgp/qp.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cgp {

/// Data moved onto the knots of a partition (possibly refined to host them).
struct AlignedData {
  Partition partition;
  DesignData data;                // points replaced by the knots they were assigned to
  std::vector<Index> knot_index;  // knot of each datum
  std::vector<double> inserted;   // knots added to the input partition
};

/// Snaps each point to its nearest knot when strictly closer than mesh/2,
/// otherwise inserts it as a new knot. Throws DataCollision when two points
/// land on the same knot.
AlignedData align_data(const DesignData& data, const Partition& p);

/// min c^T Gamma_N^{-1} c  s.t.  c[eq_indices] = eq_values,  ineq.lower <= G c <= ineq.upper.
struct QpProblem {
  std::shared_ptr<const Partition> partition;
  std::shared_ptr<const GramMatrix> gram;
  double prior_variance = 1.0;
  std::vector<Index> eq_indices;
  std::vector<double> eq_values;
  LinearInequalitySystem ineq;
  DesignData data;  // aligned data, for reporting

  Index dim() const { return gram->size(); }
};

QpProblem build_problem(const DesignData& data, const ConstraintSet& specs, const Partition& p,
                        const Kernel& kernel);
inline QpProblem build_problem(const DesignData& data, const ConstraintSpec& spec, const Partition& p,
                               const Kernel& kernel) {
  return build_problem(data, ConstraintSet{spec}, p, kernel);
}

/// Max-norm KKT residuals, recomputed from the returned point and multipliers.
///  stationarity:  |c - Gamma A^T u|_inf / max(1, |c|_inf, max|Gamma| |A^T u|_1)
///  primal_eq:     max |c_i - y_i|
///  primal_ineq:   largest violation of lower <= G c <= upper
///  dual_sign:     largest negative one-sided multiplier (magnitude)
///  complementarity: max |u_i s_i| / max(1, |u|_inf) over one-sided rows
struct KktResiduals {
  double stationarity = 0.0;
  double primal_eq = 0.0;
  double primal_ineq = 0.0;
  double dual_sign = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct MapSolution {
  QpStatus status = QpStatus::MaxIter;
  CoefVector coef;
  double objective = 0.0;  // c^T Gamma_N^{-1} c
  KktResiduals kkt;
  int iterations = 0;
  double jitter = 0.0;
  Vector eq_multipliers;     // one per datum
  Vector lower_multipliers;  // one per inequality row, >= 0
  Vector upper_multipliers;
  Index active_rows = 0;
  double min_slack = kInf;   // smallest inequality slack at the solution
  bool strictly_feasible = false;  // a point with slack >= slater_margin exists
  std::vector<std::string> warnings;
};

struct MapOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0 means 50 (N + 1)
  double slater_margin = 1e-6;
  bool check_slater = true;
};

MapSolution solve_map(const QpProblem& qp, const MapOptions& options = {});

/// Recomputes the KKT residuals of a candidate solution of `qp`.
KktResiduals kkt_residuals(const QpProblem& qp, const Vector& c, const Vector& eq_multipliers,
                           const Vector& lower_multipliers, const Vector& upper_multipliers);

struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<MapSolution> solutions;
  std::vector<double> sup_gaps;     // |h_{k+1} - h_k|_inf on the grid, one per consecutive pair
  std::vector<double> objectives;
  std::vector<double> kriging_gaps; // |h_k - kriging|_inf on the grid
  std::vector<double> grid;
};

/// Solves the MAP problem on uniform partitions with `levels` cells (each
/// dividing the next), hosting the data aligned on the coarsest level.
ConvergenceReport convergence_ladder(const DesignData& data, const ConstraintSet& specs, const Kernel& kernel,
                                     const std::vector<int>& levels, int grid_points = 2001,
                                     const MapOptions& options = {});

/// Partition with `n_cells` uniform cells plus the knots needed to host `aligned`.
Partition host_partition(int n_cells, const DesignData& aligned);

}  // namespace cgp
