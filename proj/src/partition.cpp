#include "cgp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cgp {

Partition::Partition(std::vector<double> knots, int level) : knots_(std::move(knots)), level_(level) {
  if (knots_.size() < 2) throw Error(ErrorKind::InvalidArgument, "partition needs at least two knots");
  if (knots_.front() != 0.0 || knots_.back() != 1.0) {
    throw Error(ErrorKind::InvalidArgument, "partition must start at 0 and end at 1");
  }
  for (std::size_t j = 1; j < knots_.size(); ++j) {
    if (!(knots_[j] > knots_[j - 1])) {
      throw Error(ErrorKind::InvalidArgument, "knots must be strictly increasing");
    }
  }
}

Vector Partition::knot_vector() const {
  return Eigen::Map<const Vector>(knots_.data(), static_cast<Index>(knots_.size()));
}

double Partition::mesh() const {
  double h = 0.0;
  for (std::size_t j = 1; j < knots_.size(); ++j) h = std::max(h, knots_[j] - knots_[j - 1]);
  return h;
}

Index Partition::locate(double x) const {
  // first knot strictly greater than x, so a shared knot belongs to the cell on its right
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  Index j = static_cast<Index>(it - knots_.begin()) - 1;
  return std::clamp<Index>(j, 0, cells() - 1);
}

Index Partition::find_knot(double x) const {
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x - kKnotTolerance);
  if (it != knots_.end() && std::abs(*it - x) <= kKnotTolerance) return static_cast<Index>(it - knots_.begin());
  return -1;
}

Partition uniform_partition(int n_cells) {
  if (n_cells < 1) throw Error(ErrorKind::InvalidArgument, "n_cells must be >= 1");
  std::vector<double> knots(static_cast<std::size_t>(n_cells) + 1);
  for (int j = 0; j <= n_cells; ++j) knots[static_cast<std::size_t>(j)] = static_cast<double>(j) / n_cells;
  return Partition(std::move(knots), 0);
}

Partition refine(const Partition& p, std::span<const double> extra_knots) {
  std::vector<double> extra(extra_knots.begin(), extra_knots.end());
  std::sort(extra.begin(), extra.end());
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const double x = extra[i];
    if (!(x > 0.0 && x < 1.0)) {
      throw Error(ErrorKind::OutOfDomain, "refinement knot " + std::to_string(x) + " not in (0,1)");
    }
    if ((i > 0 && x - extra[i - 1] <= kKnotTolerance) || p.find_knot(x) >= 0) {
      throw Error(ErrorKind::DuplicateKnot, "knot " + std::to_string(x) + " already present");
    }
  }
  std::vector<double> merged;
  merged.reserve(static_cast<std::size_t>(p.size()) + extra.size());
  std::merge(p.knots().begin(), p.knots().end(), extra.begin(), extra.end(), std::back_inserter(merged));
  return Partition(std::move(merged), p.level() + 1);
}

Partition refine_dyadic(const Partition& p) {
  std::vector<double> mids;
  mids.reserve(static_cast<std::size_t>(p.cells()));
  for (Index j = 0; j < p.cells(); ++j) mids.push_back(0.5 * (p.knot(j) + p.knot(j + 1)));
  return refine(p, mids);
}

CoefVector::CoefVector() : CoefVector(uniform_partition(1), Vector::Zero(2)) {}

CoefVector::CoefVector(std::shared_ptr<const Partition> partition, Vector values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  require_dims(values_.size(), partition_->size(), "coefficient vector");
}

double hat_evaluate(const Partition& p, Index j, double x) {
  if (j < 0 || j >= p.size()) throw Error(ErrorKind::InvalidArgument, "hat index out of range");
  if (x < 0.0 || x > 1.0) throw Error(ErrorKind::OutOfDomain, "hat evaluated outside [0,1]");
  const Index cell = p.locate(x);
  const double left = p.knot(cell);
  const double right = p.knot(cell + 1);
  const double w = (x - left) / (right - left);
  if (j == cell) return 1.0 - w;
  if (j == cell + 1) return w;
  return 0.0;
}

double evaluate_pl(const Partition& p, const Vector& values, double x) {
  require_dims(values.size(), p.size(), "evaluate_pl");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::OutOfDomain, "x = " + std::to_string(x) + " outside [0,1]");
  const Index cell = p.locate(x);
  const double left = p.knot(cell);
  const double w = (x - left) / (p.knot(cell + 1) - left);
  return (1.0 - w) * values(cell) + w * values(cell + 1);
}

PlEvaluator::PlEvaluator(const Partition& p, std::span<const double> points) : knots_(p.size()) {
  cell_.reserve(points.size());
  right_weight_.reserve(points.size());
  for (double x : points) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::OutOfDomain, "grid point outside [0,1]");
    const Index cell = p.locate(x);
    cell_.push_back(cell);
    right_weight_.push_back((x - p.knot(cell)) / (p.knot(cell + 1) - p.knot(cell)));
  }
}

Vector PlEvaluator::apply(const Vector& values) const {
  require_dims(values.size(), knots_, "PlEvaluator");
  Vector out(points());
  for (std::size_t k = 0; k < cell_.size(); ++k) {
    const double w = right_weight_[k];
    out(static_cast<Index>(k)) = (1.0 - w) * values(cell_[k]) + w * values(cell_[k] + 1);
  }
  return out;
}

CoefVector project(const std::function<double(double)>& f, const Partition& p) {
  Vector c(p.size());
  for (Index j = 0; j < p.size(); ++j) c(j) = f(p.knot(j));
  return CoefVector(p, std::move(c));
}

std::vector<double> uniform_grid(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = static_cast<double>(k) / (n - 1);
  return g;
}

}  // namespace cgp
