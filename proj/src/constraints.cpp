#include "cgp/constraints.hpp"

#include <cmath>
#include <sstream>

namespace cgp {

ConstraintSpec ConstraintSpec::bounds(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    throw Error(ErrorKind::InvalidArgument, "bounds require a < b");
  }
  return {ConstraintFamily::Bounds, a, b};
}

bool ConstraintSpec::holds_on_grid(const std::function<double(double)>& f, std::span<const double> grid,
                                   double tol) const {
  std::vector<double> v;
  v.reserve(grid.size());
  for (double x : grid) v.push_back(f(x));
  switch (family) {
    case ConstraintFamily::None: return true;
    case ConstraintFamily::Bounds:
      for (double y : v) {
        if (y < lower - tol || y > upper + tol) return false;
      }
      return true;
    case ConstraintFamily::NonDecreasing:
      for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] < v[k - 1] - tol) return false;
      }
      return true;
    case ConstraintFamily::Convex:
      for (std::size_t k = 2; k < v.size(); ++k) {
        const double s0 = (v[k - 1] - v[k - 2]) / (grid[k - 1] - grid[k - 2]);
        const double s1 = (v[k] - v[k - 1]) / (grid[k] - grid[k - 1]);
        if (s1 < s0 - tol) return false;
      }
      return true;
  }
  return true;
}

std::string ConstraintSpec::describe() const {
  std::ostringstream os;
  switch (family) {
    case ConstraintFamily::None: os << "none"; break;
    case ConstraintFamily::Bounds: os << "bounds[" << lower << ", " << upper << "]"; break;
    case ConstraintFamily::NonDecreasing: os << "monotone"; break;
    case ConstraintFamily::Convex: os << "convex"; break;
  }
  return os.str();
}

double LinearInequalitySystem::max_violation(const Vector& c) const {
  require_dims(c.size(), cols(), "inequality system");
  if (rows() == 0) return 0.0;
  const Vector g = matrix * c;
  double worst = 0.0;
  for (Index r = 0; r < rows(); ++r) {
    worst = std::max({worst, lower(r) - g(r), g(r) - upper(r)});
  }
  return worst;
}

LinearInequalitySystem encode(const ConstraintSpec& spec, const Partition& p) {
  const Index n = p.size();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> lo;
  std::vector<double> hi;

  switch (spec.family) {
    case ConstraintFamily::None: break;
    case ConstraintFamily::Bounds:
      // a row with both sides infinite constrains nothing
      if (std::isfinite(spec.lower) || std::isfinite(spec.upper)) {
        for (Index j = 0; j < n; ++j) {
          triplets.emplace_back(j, j, 1.0);
          lo.push_back(spec.lower);
          hi.push_back(spec.upper);
        }
      }
      break;
    case ConstraintFamily::NonDecreasing:
      for (Index j = 0; j + 1 < n; ++j) {
        const auto r = static_cast<Index>(lo.size());
        triplets.emplace_back(r, j, -1.0);
        triplets.emplace_back(r, j + 1, 1.0);
        lo.push_back(0.0);
        hi.push_back(kInf);
      }
      break;
    case ConstraintFamily::Convex:
      for (Index j = 0; j + 2 < n; ++j) {
        const double h0 = p.knot(j + 1) - p.knot(j);
        const double h1 = p.knot(j + 2) - p.knot(j + 1);
        const auto r = static_cast<Index>(lo.size());
        triplets.emplace_back(r, j, 1.0 / h0);
        triplets.emplace_back(r, j + 1, -1.0 / h0 - 1.0 / h1);
        triplets.emplace_back(r, j + 2, 1.0 / h1);
        lo.push_back(0.0);
        hi.push_back(kInf);
      }
      break;
  }

  LinearInequalitySystem sys;
  const auto m = static_cast<Index>(lo.size());
  sys.matrix.resize(m, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.lower = Eigen::Map<const Vector>(lo.data(), m);
  sys.upper = Eigen::Map<const Vector>(hi.data(), m);
  return sys;
}

LinearInequalitySystem concatenate(const LinearInequalitySystem& a, const LinearInequalitySystem& b) {
  require_dims(b.cols(), a.cols(), "concatenate");
  LinearInequalitySystem out;
  out.matrix.resize(a.rows() + b.rows(), a.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto* part : {&a, &b}) {
    const Index offset = part == &a ? 0 : a.rows();
    for (Index r = 0; r < part->matrix.outerSize(); ++r) {
      for (SparseRowMatrix::InnerIterator it(part->matrix, r); it; ++it) {
        triplets.emplace_back(offset + it.row(), it.col(), it.value());
      }
    }
  }
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.lower.resize(a.rows() + b.rows());
  out.upper.resize(a.rows() + b.rows());
  out.lower << a.lower, b.lower;
  out.upper << a.upper, b.upper;
  return out;
}

LinearInequalitySystem encode(const ConstraintSet& specs, const Partition& p) {
  LinearInequalitySystem sys = encode(ConstraintSpec::none(), p);
  for (const auto& spec : specs) sys = concatenate(sys, encode(spec, p));
  return sys;
}

bool is_feasible(const LinearInequalitySystem& sys, const Vector& c, double tol) {
  if (tol < 0.0) throw Error(ErrorKind::InvalidArgument, "negative feasibility tolerance");
  return sys.max_violation(c) <= tol;
}

H2Report check_h2(const ConstraintSpec& spec, const std::vector<std::function<double(double)>>& f_samples,
                  const std::vector<Partition>& ladder, double tol) {
  H2Report report;
  report.functions_checked = f_samples.size();
  report.levels_checked = ladder.size();
  for (std::size_t level = 0; level < ladder.size(); ++level) {
    const LinearInequalitySystem sys = encode(spec, ladder[level]);
    for (std::size_t i = 0; i < f_samples.size(); ++i) {
      const double v = sys.max_violation(project(f_samples[i], ladder[level]).values());
      if (v > tol) report.violations.push_back({i, level, v});
    }
  }
  return report;
}

}  // namespace cgp
