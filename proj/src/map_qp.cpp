#include "cgp/map_qp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cgp {

AlignedData align_data(const DesignData& data, const Partition& p) {
  data.validate();
  const double half_mesh = 0.5 * p.mesh();
  std::vector<double> target(data.size());
  std::vector<double> inserted;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.points[i];
    const Index cell = p.locate(x);
    const double dl = std::abs(x - p.knot(cell));
    const double dr = std::abs(p.knot(cell + 1) - x);
    const double nearest = dl <= dr ? p.knot(cell) : p.knot(cell + 1);
    const double dist = std::min(dl, dr);
    if (dist <= kKnotTolerance || dist < half_mesh - kKnotTolerance) {
      target[i] = nearest;
    } else {
      // on (or numerically at) the half-mesh boundary: host the point exactly
      target[i] = x;
      inserted.push_back(x);
    }
  }

  std::map<double, std::size_t> owner;
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto [it, fresh] = owner.emplace(target[i], i);
    if (!fresh) {
      std::ostringstream os;
      os << "design points " << data.points[it->second] << " and " << data.points[i] << " both map to knot "
         << target[i];
      throw Error(ErrorKind::DataCollision, os.str());
    }
  }

  AlignedData out{inserted.empty() ? p : refine(p, inserted), data, {}, inserted};
  out.data.points = target;
  for (double t : target) out.knot_index.push_back(out.partition.find_knot(t));
  return out;
}

Partition host_partition(int n_cells, const DesignData& aligned) {
  Partition p = uniform_partition(n_cells);
  std::vector<double> missing;
  for (double x : aligned.points) {
    if (p.find_knot(x) < 0) missing.push_back(x);
  }
  return missing.empty() ? p : refine(p, missing);
}

QpProblem build_problem(const DesignData& data, const ConstraintSet& specs, const Partition& p,
                        const Kernel& kernel) {
  AlignedData aligned = align_data(data, p);
  QpProblem qp;
  qp.partition = std::make_shared<const Partition>(aligned.partition);
  qp.gram = std::make_shared<const GramMatrix>(gram(kernel, qp.partition->knot_vector()));
  qp.prior_variance = kernel.variance();
  qp.eq_indices = aligned.knot_index;
  qp.eq_values = aligned.data.values;
  qp.ineq = encode(specs, *qp.partition);
  qp.data = std::move(aligned.data);
  return qp;
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_eq, primal_ineq, dual_sign, complementarity});
}

namespace {

struct OneSided {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Vector rhs;
  std::vector<Index> row;     // source row of the two-sided system
  std::vector<bool> is_upper; // true for -g c >= -upper
};

OneSided split_rows(const LinearInequalitySystem& sys, double margin) {
  OneSided out;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  for (Index r = 0; r < sys.rows(); ++r) {
    double scale = 0.0;
    for (SparseRowMatrix::InnerIterator it(sys.matrix, r); it; ++it) scale = std::max(scale, std::abs(it.value()));
    for (int side = 0; side < 2; ++side) {
      const bool upper = side == 1;
      const double bound = upper ? sys.upper(r) : sys.lower(r);
      if (!std::isfinite(bound)) continue;
      const auto k = static_cast<Index>(rhs.size());
      for (SparseRowMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
        triplets.emplace_back(k, it.col(), upper ? -it.value() : it.value());
      }
      rhs.push_back((upper ? -bound : bound) + margin * scale);
      out.row.push_back(r);
      out.is_upper.push_back(upper);
    }
  }
  out.matrix.resize(static_cast<Index>(rhs.size()), sys.cols());
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.rhs = Eigen::Map<const Vector>(rhs.data(), static_cast<Index>(rhs.size()));
  return out;
}

DualQp make_dual_qp(const QpProblem& qp, const OneSided& rows) {
  DualQp d;
  d.inverse_hessian_factor = qp.gram->cholesky_factor();
  const auto m = static_cast<Index>(qp.eq_indices.size());
  d.eq.resize(m, qp.dim());
  std::vector<Eigen::Triplet<double>> eq;
  for (Index k = 0; k < m; ++k) eq.emplace_back(k, qp.eq_indices[static_cast<std::size_t>(k)], 1.0);
  d.eq.setFromTriplets(eq.begin(), eq.end());
  d.eq_rhs = Eigen::Map<const Vector>(qp.eq_values.data(), m);
  d.ineq = rows.matrix;
  d.ineq_rhs = rows.rhs;
  return d;
}

void validate_problem(const QpProblem& qp) {
  if (!qp.partition || !qp.gram) throw Error(ErrorKind::InvalidArgument, "QP problem has no partition or Gram matrix");
  require_dims(qp.partition->size(), qp.dim(), "partition vs Gram matrix");
  if (qp.eq_indices.size() != qp.eq_values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "equality indices and values differ in length");
  }
  std::vector<Index> sorted = qp.eq_indices;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= qp.dim()) throw Error(ErrorKind::InvalidArgument, "equality index out of range");
    if (i > 0 && sorted[i] == sorted[i - 1]) throw Error(ErrorKind::DataCollision, "repeated equality index");
  }
  if (qp.ineq.rows() > 0) require_dims(qp.ineq.cols(), qp.dim(), "inequality system");
}

}  // namespace

KktResiduals kkt_residuals(const QpProblem& qp, const Vector& c, const Vector& eq_multipliers,
                           const Vector& lower_multipliers, const Vector& upper_multipliers) {
  require_dims(c.size(), qp.dim(), "kkt point");
  KktResiduals res;
  const Index rows = qp.ineq.rows();

  Vector w = Vector::Zero(qp.dim());
  for (std::size_t k = 0; k < qp.eq_indices.size(); ++k) {
    w(qp.eq_indices[k]) += eq_multipliers(static_cast<Index>(k));
    res.primal_eq = std::max(res.primal_eq, std::abs(c(qp.eq_indices[k]) - qp.eq_values[k]));
  }
  if (rows > 0) {
    w.noalias() += qp.ineq.matrix.transpose() * (lower_multipliers - upper_multipliers);
    res.primal_ineq = qp.ineq.max_violation(c);
    const Vector g = qp.ineq.matrix * c;
    const double u_max = std::max({1.0, lower_multipliers.cwiseAbs().maxCoeff(), upper_multipliers.cwiseAbs().maxCoeff()});
    for (Index r = 0; r < rows; ++r) {
      res.dual_sign = std::max({res.dual_sign, -lower_multipliers(r), -upper_multipliers(r)});
      if (std::isfinite(qp.ineq.lower(r))) {
        res.complementarity = std::max(res.complementarity,
                                       std::abs(lower_multipliers(r) * (g(r) - qp.ineq.lower(r))) / u_max);
      }
      if (std::isfinite(qp.ineq.upper(r))) {
        res.complementarity = std::max(res.complementarity,
                                       std::abs(upper_multipliers(r) * (qp.ineq.upper(r) - g(r))) / u_max);
      }
    }
  }
  const Matrix gamma = qp.gram->jittered();
  const Vector gw = gamma * w;
  const double scale = std::max({1.0, c.cwiseAbs().maxCoeff(), gamma.cwiseAbs().maxCoeff() * w.lpNorm<1>()});
  res.stationarity = (c - gw).cwiseAbs().maxCoeff() / scale;
  return res;
}

MapSolution solve_map(const QpProblem& qp, const MapOptions& options) {
  validate_problem(qp);
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "solver tolerance must be positive");
  const int max_iter = options.max_iter > 0 ? options.max_iter : 50 * static_cast<int>(qp.dim());

  const OneSided rows = split_rows(qp.ineq, 0.0);
  DualQpOptions qp_options;
  qp_options.feasibility_tol = 0.1 * options.tol;
  qp_options.max_iter = max_iter;
  const DualQpResult raw = solve_dual_active_set(make_dual_qp(qp, rows), qp_options);

  MapSolution sol;
  sol.iterations = raw.iterations;
  sol.jitter = qp.gram->jitter_applied();
  sol.coef = CoefVector(qp.partition, raw.x);
  sol.eq_multipliers = raw.eq_multipliers;
  sol.lower_multipliers = Vector::Zero(qp.ineq.rows());
  sol.upper_multipliers = Vector::Zero(qp.ineq.rows());
  for (std::size_t k = 0; k < rows.row.size(); ++k) {
    const double u = raw.ineq_multipliers(static_cast<Index>(k));
    (rows.is_upper[k] ? sol.upper_multipliers : sol.lower_multipliers)(rows.row[k]) += u;
  }
  sol.active_rows = static_cast<Index>(raw.active_ineq.size());

  if (raw.status == QpStatus::Infeasible) {
    sol.status = QpStatus::Infeasible;
    sol.warnings.push_back("interpolation and shape constraints admit no common point");
    return sol;
  }

  sol.objective = hn_norm_sq(raw.x, *qp.gram);
  sol.kkt = kkt_residuals(qp, raw.x, sol.eq_multipliers, sol.lower_multipliers, sol.upper_multipliers);
  sol.status = raw.status;
  if (sol.status == QpStatus::Optimal && sol.kkt.max() > options.tol) {
    sol.status = QpStatus::MaxIter;
    std::ostringstream os;
    os << "KKT residual " << sol.kkt.max() << " above tolerance " << options.tol;
    sol.warnings.push_back(os.str());
  }

  if (qp.ineq.rows() > 0) {
    const Vector g = rows.matrix * raw.x - rows.rhs;
    for (Index k = 0; k < g.size(); ++k) {
      double scale = 0.0;
      for (SparseRowMatrix::InnerIterator it(rows.matrix, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
      sol.min_slack = std::min(sol.min_slack, g(k) / scale);
    }
  }
  if (options.check_slater && qp.ineq.rows() > 0) {
    const OneSided tight = split_rows(qp.ineq, options.slater_margin);
    DualQpOptions probe = qp_options;
    const DualQpResult strict = solve_dual_active_set(make_dual_qp(qp, tight), probe);
    sol.strictly_feasible = strict.status == QpStatus::Optimal;
    if (!sol.strictly_feasible) {
      sol.warnings.push_back("no point with inequality slack >= " + std::to_string(options.slater_margin) +
                             " (interior condition doubtful)");
    }
  } else {
    sol.strictly_feasible = true;
  }
  return sol;
}

ConvergenceReport convergence_ladder(const DesignData& data, const ConstraintSet& specs, const Kernel& kernel,
                                     const std::vector<int>& levels, int grid_points, const MapOptions& options) {
  if (levels.empty()) throw Error(ErrorKind::InvalidArgument, "empty ladder");
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k] <= levels[k - 1] || levels[k] % levels[k - 1] != 0) {
      throw Error(ErrorKind::InvalidArgument, "ladder levels must be nested (each dividing the next)");
    }
  }
  const AlignedData aligned = align_data(data, uniform_partition(levels.front()));

  ConvergenceReport report;
  report.levels = levels;
  report.grid = uniform_grid(grid_points);
  const Vector kriging = kriging_mean(aligned.data, kernel, report.grid);
  Vector previous;
  for (int n_cells : levels) {
    const QpProblem qp = build_problem(aligned.data, specs, host_partition(n_cells, aligned.data), kernel);
    MapSolution sol = solve_map(qp, options);
    if (sol.status == QpStatus::Infeasible) {
      throw Error(ErrorKind::InfeasiblePolytope, "ladder level N=" + std::to_string(n_cells) + " is infeasible");
    }
    const Vector curve = PlEvaluator(*qp.partition, report.grid).apply(sol.coef.values());
    if (previous.size() > 0) report.sup_gaps.push_back((curve - previous).cwiseAbs().maxCoeff());
    report.kriging_gaps.push_back((curve - kriging).cwiseAbs().maxCoeff());
    report.objectives.push_back(sol.objective);
    report.solutions.push_back(std::move(sol));
    previous = curve;
  }
  return report;
}

}  // namespace cgp
