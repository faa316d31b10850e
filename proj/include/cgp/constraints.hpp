#pragma once

#include "cgp/partition.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cgp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ConstraintFamily { None, Bounds, NonDecreasing, Convex };

/// One of the convex shape families. `lower`/`upper` are used by Bounds only
/// and may be infinite.
struct ConstraintSpec {
  ConstraintFamily family = ConstraintFamily::None;
  double lower = -kInf;
  double upper = kInf;

  static ConstraintSpec none() { return {}; }
  static ConstraintSpec bounds(double a, double b);
  static ConstraintSpec non_decreasing() { return {ConstraintFamily::NonDecreasing}; }
  static ConstraintSpec convex() { return {ConstraintFamily::Convex}; }

  /// Pointwise membership of a function sampled on [0,1]: tests the defining
  /// inequality of the family on `grid` with absolute tolerance `tol`.
  bool holds_on_grid(const std::function<double(double)>& f, std::span<const double> grid,
                     double tol = 0.0) const;

  std::string describe() const;

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

/// Intersection of several families (empty = unconstrained).
using ConstraintSet = std::vector<ConstraintSpec>;

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// lower <= G c <= upper, componentwise; infinite sides are inactive.
struct LinearInequalitySystem {
  SparseRowMatrix matrix;
  Vector lower;
  Vector upper;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }

  /// Largest violation of any row at c (0 when feasible).
  double max_violation(const Vector& c) const;
};

/// Encodes a family on a partition so that knot-level feasibility is
/// equivalent to membership of the piecewise-linear interpolant.
LinearInequalitySystem encode(const ConstraintSpec& spec, const Partition& p);
LinearInequalitySystem encode(const ConstraintSet& specs, const Partition& p);

/// Row-wise stacking of two systems on the same coefficient space.
LinearInequalitySystem concatenate(const LinearInequalitySystem& a, const LinearInequalitySystem& b);

bool is_feasible(const LinearInequalitySystem& sys, const Vector& c, double tol = 1e-9);
inline bool is_feasible(const LinearInequalitySystem& sys, const CoefVector& c, double tol = 1e-9) {
  return is_feasible(sys, c.values(), tol);
}

struct H2Violation {
  std::size_t function_index;
  std::size_t level;
  double violation;
};

struct H2Report {
  std::size_t functions_checked = 0;
  std::size_t levels_checked = 0;
  std::vector<H2Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that projecting members of the family onto each partition of the
/// ladder stays inside the family (knot-level feasibility at tol 1e-12).
H2Report check_h2(const ConstraintSpec& spec, const std::vector<std::function<double(double)>>& f_samples,
                  const std::vector<Partition>& ladder, double tol = 1e-12);

}  // namespace cgp
