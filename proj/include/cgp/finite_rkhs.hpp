#pragma once

#include "cgp/kernel.hpp"
#include "cgp/partition.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace cgp {

/// Noise-free interpolation data: distinct points in [0,1] with values.
struct DesignData {
  std::vector<double> points;
  std::vector<double> values;

  /// Throws InvalidArgument on size mismatch, empty data, repeated points,
  /// or points outside [0,1].
  void validate() const;
  std::size_t size() const { return points.size(); }

  friend bool operator==(const DesignData&, const DesignData&) = default;
};

/// Gram matrix Gamma_N at the knots of a partition.
inline GramMatrix gram(const Kernel& kernel, const Partition& p, const JitterPolicy& policy = {}) {
  return gram(kernel, p.knot_vector(), policy);
}

/// ||h||^2_{H_N} = c^T Gamma_N^{-1} c via the cached Cholesky factor.
template <typename Derived>
double hn_norm_sq(const Eigen::MatrixBase<Derived>& c, const GramMatrix& g) {
  require_dims(c.size(), g.size(), "hn_norm_sq");
  return g.factor().quad_form(c);
}

inline double hn_norm_sq(const CoefVector& c, const GramMatrix& g) { return hn_norm_sq(c.values(), g); }

/// m_N(f) = ||pi_N f||^2_{H_N} along a nested ladder of partitions.
struct RkhsNormSeq {
  std::vector<Partition> partitions;
  std::vector<double> values;
  std::vector<double> jitter;

  /// True when values[k+1] >= values[k] (1 - rel_tol) for every consecutive pair.
  bool non_decreasing(double rel_tol = 1e-8) const;
};

RkhsNormSeq norm_ladder(const std::function<double(double)>& f, const std::vector<Partition>& ladder,
                        const Kernel& kernel);

/// Dyadic ladder starting from a uniform partition: n0, 2 n0, 4 n0, ...
std::vector<Partition> dyadic_ladder(int n0, int levels);

/// Unconstrained kriging mean k(x)^T K^{-1} y at each query point.
Vector kriging_mean(const DesignData& data, const Kernel& kernel, std::span<const double> x_query);

/// (y^T B^{-1} y, x^T A^{-1} x) where A is the leading block of B and x the
/// leading entries of y. Throws NotPositiveDefinite when B is not SPD.
std::pair<double, double> check_block_lemma(const Matrix& b, const Vector& y);

/// Constant c with sup|h| <= c ||h||_{H_N} for every N: sqrt(max |K|) = sigma.
double uniform_bound_constant(const Kernel& kernel);

}  // namespace cgp
