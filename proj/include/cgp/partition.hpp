#pragma once

#include "cgp/core.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace cgp {

/// Knot tolerance used to detect coincident knots.
inline constexpr double kKnotTolerance = 1e-12;

/// Strictly increasing knots 0 = t_0 < ... < t_N = 1.
class Partition {
 public:
  /// Validates and adopts `knots`; throws InvalidArgument when the invariants fail.
  explicit Partition(std::vector<double> knots, int level = 0);

  std::span<const double> knots() const { return knots_; }
  Vector knot_vector() const;
  double knot(Index j) const { return knots_[static_cast<std::size_t>(j)]; }
  /// Number of knots, N + 1.
  Index size() const { return static_cast<Index>(knots_.size()); }
  /// Number of cells, N.
  Index cells() const { return size() - 1; }
  int level() const { return level_; }
  double mesh() const;

  /// Cell index j with t_j <= x < t_{j+1}; the last cell is closed at 1.
  Index locate(double x) const;
  /// Index of a knot within kKnotTolerance of x, or -1.
  Index find_knot(double x) const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.knots_ == b.knots_; }

 private:
  std::vector<double> knots_;
  int level_ = 0;
};

Partition uniform_partition(int n_cells);

/// Union of the knots with `extra_knots`, level incremented.
Partition refine(const Partition& p, std::span<const double> extra_knots);

/// Inserts the midpoint of every cell.
Partition refine_dyadic(const Partition& p);

/// Values of a function at the knots of a partition (hat-basis coordinates).
class CoefVector {
 public:
  /// Zero function on the trivial partition {0, 1}.
  CoefVector();
  CoefVector(std::shared_ptr<const Partition> partition, Vector values);
  CoefVector(const Partition& partition, Vector values)
      : CoefVector(std::make_shared<const Partition>(partition), std::move(values)) {}

  const Partition& partition() const { return *partition_; }
  std::shared_ptr<const Partition> partition_ptr() const { return partition_; }
  const Vector& values() const { return values_; }
  Index size() const { return values_.size(); }

 private:
  std::shared_ptr<const Partition> partition_;
  Vector values_;
};

double hat_evaluate(const Partition& p, Index j, double x);

/// Piecewise-linear interpolant of knot values at x in [0,1].
double evaluate_pl(const Partition& p, const Vector& values, double x);
inline double evaluate_pl(const CoefVector& c, double x) {
  return evaluate_pl(c.partition(), c.values(), x);
}

/// Hat-basis weights at a batch of points: value(x_k) = w0 c[i0] + w1 c[i0+1].
/// Precomputed once per grid so a batch of coefficient vectors evaluates in O(grid).
class PlEvaluator {
 public:
  PlEvaluator(const Partition& p, std::span<const double> points);

  Vector apply(const Vector& values) const;
  Index points() const { return static_cast<Index>(cell_.size()); }

 private:
  std::vector<Index> cell_;
  std::vector<double> right_weight_;
  Index knots_;
};

CoefVector project(const std::function<double(double)>& f, const Partition& p);

/// Uniform grid of `n` points on [0,1], endpoints included.
std::vector<double> uniform_grid(int n);

}  // namespace cgp
