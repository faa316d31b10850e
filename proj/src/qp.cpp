#include "cgp/qp.hpp"

#include <cmath>
#include <limits>

namespace cgp {

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIter: return "MaxIter";
  }
  return "unknown";
}

namespace {

constexpr double kInfStep = std::numeric_limits<double>::infinity();

struct Row {
  std::vector<std::pair<Index, double>> entries;
  double rhs = 0.0;
  double scale = 1.0;  // stored row = original row / scale
  bool equality = false;
  Index source = 0;    // index in eq or ineq
};

double dot(const Row& row, const Vector& x) {
  double s = 0.0;
  for (const auto& [i, v] : row.entries) s += v * x(i);
  return s;
}

std::vector<Row> collect_rows(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m, const Vector& rhs,
                              bool equality) {
  std::vector<Row> rows;
  for (Index r = 0; r < m.outerSize(); ++r) {
    Row row;
    row.equality = equality;
    row.source = r;
    double scale = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      if (it.value() != 0.0) {
        row.entries.emplace_back(it.col(), it.value());
        scale = std::max(scale, std::abs(it.value()));
      }
    }
    if (scale == 0.0) scale = 1.0;
    for (auto& e : row.entries) e.second /= scale;
    row.scale = scale;
    row.rhs = rhs(r) / scale;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Factorisation state: J^T N_active = [R; 0] with J J^T = H^{-1}.
class ActiveSet {
 public:
  explicit ActiveSet(Matrix j) : j_(std::move(j)), r_(Matrix::Zero(j_.rows(), j_.rows())) {}

  Index n() const { return j_.rows(); }
  Index size() const { return iq_; }

  Vector jt_times(const Row& row) const {
    Vector d = Vector::Zero(n());
    for (const auto& [i, v] : row.entries) d.noalias() += v * j_.row(i).transpose();
    return d;
  }

  Vector primal_direction(const Vector& d) const {
    return j_.rightCols(n() - iq_) * d.tail(n() - iq_);
  }

  Vector dual_direction(const Vector& d) const {
    if (iq_ == 0) return Vector();
    return r_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(d.head(iq_));
  }

  bool add(Vector d) {
    for (Index col = n() - 1; col > iq_; --col) {
      const double a = d(col - 1);
      const double b = d(col);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      rotate_columns(col - 1, col, c, s);
      d(col - 1) = h;
      d(col) = 0.0;
    }
    if (std::abs(d(iq_)) <= std::numeric_limits<double>::epsilon() * r_norm_) return false;
    r_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    r_norm_ = std::max(r_norm_, std::abs(d(iq_)));
    ++iq_;
    return true;
  }

  void remove(Index pos) {
    for (Index col = pos; col + 1 < iq_; ++col) r_.col(col).head(iq_) = r_.col(col + 1).head(iq_);
    --iq_;
    r_.col(iq_).setZero();
    for (Index row = pos; row < iq_; ++row) {
      const double a = r_(row, row);
      const double b = r_(row + 1, row);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (Index k = row; k < iq_; ++k) {
        const double t1 = r_(row, k);
        const double t2 = r_(row + 1, k);
        r_(row, k) = c * t1 + s * t2;
        r_(row + 1, k) = -s * t1 + c * t2;
      }
      r_(row + 1, row) = 0.0;
      rotate_columns(row, row + 1, c, s);
    }
  }

 private:
  void rotate_columns(Index p, Index q, double c, double s) {
    for (Index k = 0; k < n(); ++k) {
      const double t1 = j_(k, p);
      const double t2 = j_(k, q);
      j_(k, p) = c * t1 + s * t2;
      j_(k, q) = -s * t1 + c * t2;
    }
  }

  Matrix j_;
  Matrix r_;
  Index iq_ = 0;
  double r_norm_ = 1.0;
};

}  // namespace

DualQpResult solve_dual_active_set(const DualQp& qp, const DualQpOptions& options) {
  const Index n = qp.inverse_hessian_factor.rows();
  if (qp.inverse_hessian_factor.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "inverse Hessian factor must be square");
  }
  if (qp.eq.rows() > 0) require_dims(qp.eq.cols(), n, "equality matrix");
  if (qp.ineq.rows() > 0) require_dims(qp.ineq.cols(), n, "inequality matrix");
  require_dims(qp.eq_rhs.size(), qp.eq.rows(), "equality rhs");
  require_dims(qp.ineq_rhs.size(), qp.ineq.rows(), "inequality rhs");

  const std::vector<Row> eq_rows = collect_rows(qp.eq, qp.eq_rhs, true);
  const std::vector<Row> in_rows = collect_rows(qp.ineq, qp.ineq_rhs, false);

  DualQpResult result;
  result.x = qp.center.size() == 0 ? Vector(Vector::Zero(n)) : qp.center;
  require_dims(result.x.size(), n, "center");
  result.eq_multipliers = Vector::Zero(static_cast<Index>(eq_rows.size()));
  result.ineq_multipliers = Vector::Zero(static_cast<Index>(in_rows.size()));

  ActiveSet active(qp.inverse_hessian_factor);
  std::vector<const Row*> members;  // constraint at each active position
  std::vector<double> u;            // multipliers per position (+ candidate at the end)
  std::vector<bool> in_active(in_rows.size(), false);
  Vector& x = result.x;

  const auto finish = [&](QpStatus status) {
    result.status = status;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Row& row = *members[k];
      const double mult = u[k] / row.scale;
      if (row.equality) {
        result.eq_multipliers(row.source) = mult;
      } else {
        result.ineq_multipliers(row.source) = mult;
        result.active_ineq.push_back(row.source);
      }
    }
    return result;
  };

  // equality phase: full steps onto each hyperplane
  for (const Row& row : eq_rows) {
    const Vector d = active.jt_times(row);
    const Index free = n - active.size();
    const double zn = d.tail(free).squaredNorm();
    const double residual = row.rhs - dot(row, x);
    if (zn <= options.dependence_tol * d.squaredNorm()) {
      if (std::abs(residual) > options.feasibility_tol) return finish(QpStatus::Infeasible);
      continue;  // implied by the equalities already active
    }
    const double t = residual / zn;
    const Vector z = active.primal_direction(d);
    const Vector r = active.dual_direction(d);
    x.noalias() += t * z;
    for (Index k = 0; k < active.size(); ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
    if (!active.add(d)) return finish(QpStatus::Infeasible);
    members.push_back(&row);
    u.push_back(t);
  }

  // inequality phase
  while (true) {
    Index p = -1;
    double s_p = -options.feasibility_tol;
    for (std::size_t i = 0; i < in_rows.size(); ++i) {
      if (in_active[i]) continue;
      const double s = dot(in_rows[i], x) - in_rows[i].rhs;
      if (s < s_p) {
        s_p = s;
        p = static_cast<Index>(i);
      }
    }
    if (p < 0) return finish(QpStatus::Optimal);

    const Row& np = in_rows[static_cast<std::size_t>(p)];
    u.push_back(0.0);  // multiplier of the candidate
    while (true) {
      if (++result.iterations > options.max_iter) {
        u.pop_back();
        return finish(QpStatus::MaxIter);
      }
      const Vector d = active.jt_times(np);
      const Index free = n - active.size();
      const double zn = d.tail(free).squaredNorm();
      const Vector r = active.dual_direction(d);

      // dual step: largest step keeping active inequality multipliers >= 0
      double t1 = kInfStep;
      Index drop = -1;
      for (Index k = 0; k < active.size(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (members[ks]->equality || r(k) <= 0.0) continue;
        const double ratio = u[ks] / r(k);
        if (ratio < t1) {
          t1 = ratio;
          drop = k;
        }
      }
      const bool has_primal_step = zn > options.dependence_tol * d.squaredNorm();
      const double t2 = has_primal_step ? -s_p / zn : kInfStep;
      const double t = std::min(t1, t2);
      if (t == kInfStep) {
        u.pop_back();
        return finish(QpStatus::Infeasible);
      }

      for (Index k = 0; k < active.size(); ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
      u.back() += t;

      if (!has_primal_step) {
        in_active[static_cast<std::size_t>(members[static_cast<std::size_t>(drop)]->source)] = false;
        members.erase(members.begin() + drop);
        u.erase(u.begin() + drop);
        active.remove(drop);
        continue;
      }

      x.noalias() += t * active.primal_direction(d);
      if (t2 <= t1) {
        if (!active.add(d)) {
          u.pop_back();
          return finish(QpStatus::Infeasible);
        }
        members.push_back(&np);
        in_active[static_cast<std::size_t>(p)] = true;
        break;
      }
      in_active[static_cast<std::size_t>(members[static_cast<std::size_t>(drop)]->source)] = false;
      members.erase(members.begin() + drop);
      u.erase(u.begin() + drop);
      active.remove(drop);
      s_p = dot(np, x) - np.rhs;
    }
  }
}

}  // namespace cgp
