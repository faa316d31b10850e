#include "cgp/kernel.hpp"

#include <cmath>

namespace cgp {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "squared_exponential";
    case KernelFamily::Matern52: return "matern52";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "squared_exponential" || name == "gaussian" || name == "se") {
    return KernelFamily::SquaredExponential;
  }
  if (name == "matern52" || name == "matern_5_2") return KernelFamily::Matern52;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel family '" + std::string(name) + "'");
}

Kernel::Kernel(KernelFamily family, double sigma, double theta)
    : family_(family), sigma_(sigma), theta_(theta) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorKind::InvalidArgument, "kernel requires sigma > 0 and theta > 0");
  }
}

double Kernel::operator()(double x, double xp) const {
  // |x - xp| is symmetric in its arguments bit for bit
  const double r = std::abs(x - xp);
  const double s2 = sigma_ * sigma_;
  switch (family_) {
    case KernelFamily::SquaredExponential: {
      const double u = r / theta_;
      return s2 * std::exp(-0.5 * u * u);
    }
    case KernelFamily::Matern52: {
      const double u = std::sqrt(5.0) * r / theta_;
      return s2 * (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
  }
  return 0.0;
}

Matrix cross_covariance(const Kernel& kernel, const Vector& a, const Vector& b) {
  Matrix out(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = 0; j < b.size(); ++j) out(i, j) = kernel(a(i), b(j));
  }
  return out;
}

SpdFactor SpdFactor::factorize(const Matrix& a, double scale, const JitterPolicy& policy) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "factorize: matrix not square");
  SpdFactor out;
  if (a.rows() == 0) return out;
  if (!(scale > 0.0)) scale = 1.0;

  const auto attempt = [&](double jitter) {
    Matrix m = a;
    m.diagonal().array() += jitter;
    out.llt_.compute(m);
    if (out.llt_.info() != Eigen::Success) return false;
    const Vector diag = out.llt_.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() > 0.0).all();
  };

  if (attempt(0.0)) return out;
  const double cap = policy.cap * scale * (1.0 + 1e-12);
  for (double jitter = policy.initial * scale; jitter <= cap; jitter *= policy.factor) {
    if (attempt(jitter)) {
      out.jitter_ = jitter;
      return out;
    }
  }
  throw Error(ErrorKind::ConditioningFailure,
              "Cholesky failed with jitter up to " + std::to_string(policy.cap * scale) +
                  " (points too dense for the length scale?)");
}

GramMatrix::GramMatrix(Matrix values, double scale, const JitterPolicy& policy)
    : values_(std::move(values)), factor_(SpdFactor::factorize(values_, scale, policy)) {}

Matrix GramMatrix::jittered() const {
  Matrix m = values_;
  m.diagonal().array() += factor_.jitter();
  return m;
}

GramMatrix gram(const Kernel& kernel, const Vector& points, const JitterPolicy& policy) {
  return GramMatrix(cross_covariance(kernel, points, points), kernel.variance(), policy);
}

}  // namespace cgp
