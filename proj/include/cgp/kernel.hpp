#pragma once

#include "cgp/core.hpp"

#include <Eigen/Cholesky>

#include <string>
#include <string_view>

namespace cgp {

enum class KernelFamily { SquaredExponential, Matern52 };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Stationary covariance function on the real line, parameterised by the
/// process standard deviation `sigma` and the length scale `theta`.
class Kernel {
 public:
  Kernel(KernelFamily family, double sigma, double theta);

  static Kernel squared_exponential(double sigma, double theta) {
    return {KernelFamily::SquaredExponential, sigma, theta};
  }
  static Kernel matern52(double sigma, double theta) { return {KernelFamily::Matern52, sigma, theta}; }

  double operator()(double x, double xp) const;

  KernelFamily family() const { return family_; }
  double sigma() const { return sigma_; }
  double theta() const { return theta_; }
  double variance() const { return sigma_ * sigma_; }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  KernelFamily family_;
  double sigma_;
  double theta_;
};

inline double evaluate(const Kernel& kernel, double x, double xp) { return kernel(x, xp); }

/// Cross-covariance matrix (K(a_i, b_j)).
Matrix cross_covariance(const Kernel& kernel, const Vector& a, const Vector& b);

/// Escalating-jitter policy shared by every covariance factorisation.
struct JitterPolicy {
  double initial = 1e-10;  // relative to the scale
  double factor = 10.0;
  double cap = 1e-6;       // relative to the scale
};

/// Cholesky factor of a symmetric matrix with the diagonal jitter that was
/// needed to make the factorisation succeed.
class SpdFactor {
 public:
  SpdFactor() = default;

  /// Tries zero jitter first, then initial*scale, multiplying by `factor`
  /// until `cap*scale` is exceeded. Throws ConditioningFailure past the cap.
  static SpdFactor factorize(const Matrix& a, double scale, const JitterPolicy& policy = {});

  Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }
  Matrix lower() const { return llt_.matrixL(); }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }

  /// A^{-1} b through two triangular solves.
  template <typename Derived>
  Matrix solve(const Eigen::MatrixBase<Derived>& b) const {
    return llt_.solve(b);
  }

  /// b^T A^{-1} b, computed as |L^{-1} b|^2.
  template <typename Derived>
  double quad_form(const Eigen::MatrixBase<Derived>& b) const {
    require_dims(b.size(), size(), "quadratic form");
    Vector w = llt_.matrixL().solve(b);
    return w.squaredNorm();
  }

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Gram matrix of a kernel at a set of distinct points, with its cached
/// (possibly jittered) Cholesky factor.
class GramMatrix {
 public:
  GramMatrix(Matrix values, double scale, const JitterPolicy& policy = {});

  const Matrix& values() const { return values_; }
  /// values + jitter * I; the matrix the factor actually represents.
  Matrix jittered() const;
  double jitter_applied() const { return factor_.jitter(); }
  const SpdFactor& factor() const { return factor_; }
  Matrix cholesky_factor() const { return factor_.lower(); }
  Index size() const { return values_.rows(); }

 private:
  Matrix values_;
  SpdFactor factor_;
};

GramMatrix gram(const Kernel& kernel, const Vector& points, const JitterPolicy& policy = {});

}  // namespace cgp
