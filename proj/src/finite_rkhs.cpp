#include "cgp/finite_rkhs.hpp"

#include <algorithm>
#include <cmath>

namespace cgp {

void DesignData::validate() const {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "design data is empty");
  if (points.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "design points and values differ in length");
  }
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] >= 0.0 && sorted[i] <= 1.0)) {
      throw Error(ErrorKind::OutOfDomain, "design point " + std::to_string(sorted[i]) + " outside [0,1]");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "repeated design point " + std::to_string(sorted[i]));
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite design value");
  }
}

bool RkhsNormSeq::non_decreasing(double rel_tol) const {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[k - 1] - rel_tol * std::abs(values[k - 1])) return false;
  }
  return true;
}

RkhsNormSeq norm_ladder(const std::function<double(double)>& f, const std::vector<Partition>& ladder,
                        const Kernel& kernel) {
  RkhsNormSeq out;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const Partition& p = ladder[k];
    if (k > 0) {
      for (double t : ladder[k - 1].knots()) {
        if (p.find_knot(t) < 0) throw Error(ErrorKind::InvalidArgument, "norm ladder is not nested");
      }
    }
    const GramMatrix g = gram(kernel, p.knot_vector());
    out.values.push_back(hn_norm_sq(project(f, p), g));
    out.jitter.push_back(g.jitter_applied());
    out.partitions.push_back(p);
  }
  return out;
}

std::vector<Partition> dyadic_ladder(int n0, int levels) {
  std::vector<Partition> out;
  out.push_back(uniform_partition(n0));
  for (int k = 1; k < levels; ++k) out.push_back(refine_dyadic(out.back()));
  return out;
}

Vector kriging_mean(const DesignData& data, const Kernel& kernel, std::span<const double> x_query) {
  data.validate();
  const Vector x = Eigen::Map<const Vector>(data.points.data(), static_cast<Index>(data.size()));
  const Vector y = Eigen::Map<const Vector>(data.values.data(), static_cast<Index>(data.size()));
  const GramMatrix k = gram(kernel, x);
  const Vector weights = k.factor().solve(y);
  const Vector q = Eigen::Map<const Vector>(x_query.data(), static_cast<Index>(x_query.size()));
  return cross_covariance(kernel, q, x) * weights;
}

std::pair<double, double> check_block_lemma(const Matrix& b, const Vector& y) {
  if (b.rows() != b.cols() || b.rows() < 2) {
    throw Error(ErrorKind::DimensionMismatch, "block lemma needs a square matrix of size >= 2");
  }
  require_dims(y.size(), b.rows(), "block lemma vector");
  if (!b.isApprox(b.transpose(), 1e-12)) throw Error(ErrorKind::NotPositiveDefinite, "matrix not symmetric");
  const Index n = b.rows() - 1;
  const Eigen::LLT<Matrix> full(b);
  const Eigen::LLT<Matrix> lead(b.topLeftCorner(n, n));
  if (full.info() != Eigen::Success || lead.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky of the block matrix failed");
  }
  const double lhs = full.matrixL().solve(y).squaredNorm();
  const double rhs = lead.matrixL().solve(y.head(n)).squaredNorm();
  return {lhs, rhs};
}

double uniform_bound_constant(const Kernel& kernel) {
  // both families peak at r = 0 with value sigma^2
  return kernel.sigma();
}

}  // namespace cgp
