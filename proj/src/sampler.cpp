#include "cgp/sampler.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>

namespace cgp {

std::string_view to_string(SamplerMethod method) {
  switch (method) {
    case SamplerMethod::Auto: return "auto";
    case SamplerMethod::Rejection: return "rejection";
    case SamplerMethod::Gibbs: return "gibbs";
  }
  return "unknown";
}

Vector ConditionalGaussian::assemble(const Vector& free_values) const {
  require_dims(free_values.size(), dim(), "free coordinates");
  Vector c(partition->size());
  for (std::size_t k = 0; k < free_indices.size(); ++k) c(free_indices[k]) = free_values(static_cast<Index>(k));
  for (std::size_t k = 0; k < fixed_indices.size(); ++k) c(fixed_indices[k]) = fixed_values[k];
  return c;
}

ConditionalGaussian condition_on_data(const QpProblem& qp) {
  ConditionalGaussian cg;
  cg.partition = qp.partition;
  const Index n = qp.dim();
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  for (Index i : qp.eq_indices) fixed[static_cast<std::size_t>(i)] = true;
  for (Index j = 0; j < n; ++j) {
    if (!fixed[static_cast<std::size_t>(j)]) cg.free_indices.push_back(j);
  }
  cg.fixed_indices = qp.eq_indices;
  cg.fixed_values = qp.eq_values;

  const Matrix gamma = qp.gram->jittered();
  const auto nf = static_cast<Index>(cg.free_indices.size());
  const auto ni = static_cast<Index>(cg.fixed_indices.size());
  const Matrix gff = gamma(cg.free_indices, cg.free_indices);
  if (ni == 0) {
    cg.mean = Vector::Zero(nf);
    cg.covariance = gff;
  } else {
    const Matrix gii = gamma(cg.fixed_indices, cg.fixed_indices);
    const Matrix gfi = gamma(cg.free_indices, cg.fixed_indices);
    const Vector y = Eigen::Map<const Vector>(cg.fixed_values.data(), ni);
    const SpdFactor fii = SpdFactor::factorize(gii, qp.prior_variance);
    cg.mean = gfi * fii.solve(y);
    cg.covariance = gff - gfi * fii.solve(gfi.transpose());
    cg.covariance = 0.5 * (cg.covariance + cg.covariance.transpose()).eval();
  }
  cg.factor = SpdFactor::factorize(cg.covariance, qp.prior_variance);
  return cg;
}

double truncated_standard_normal(std::mt19937_64& rng, double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorKind::StallDetected, "empty truncation interval");
  if (hi <= 0.0 && lo < 0.0) return -truncated_standard_normal(rng, -hi, -lo);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = 1.0 - unif(rng);  // (0, 1]
  constexpr double kSqrt2 = 1.4142135623730951;
  double z = 0.0;
  if (lo >= 0.0) {
    // upper tail: invert Q(z) = erfc(z / sqrt 2) / 2 between Q(hi) and Q(lo)
    const double qlo = 0.5 * std::erfc(lo / kSqrt2);
    const double qhi = std::isfinite(hi) ? 0.5 * std::erfc(hi / kSqrt2) : 0.0;
    if (qlo <= 0.0) {
      // beyond double range of the tail function: exponential proposal
      std::exponential_distribution<double> expo(lo);
      do {
        z = lo + expo(rng);
      } while (z > hi || unif(rng) > std::exp(-0.5 * (z - lo) * (z - lo)));
      return z;
    }
    const double q = qhi + u * (qlo - qhi);
    if (q <= 0.0) return lo;
    z = kSqrt2 * boost::math::erfc_inv(2.0 * q);
  } else {
    const double plo = std::isfinite(lo) ? 0.5 * std::erfc(-lo / kSqrt2) : 0.0;
    const double phi = std::isfinite(hi) ? 0.5 * std::erfc(-hi / kSqrt2) : 1.0;
    const double p = plo + u * (phi - plo);
    if (p >= 1.0) return hi;
    if (p <= 0.0) return lo;
    z = -kSqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  return std::clamp(z, lo, hi);
}

namespace {

/// The constraint system seen from whitened coordinates e: values o + W e.
struct WhitenedSystem {
  Matrix w;
  Vector offset;
  Vector lower;
  Vector upper;
};

WhitenedSystem whiten(const ConditionalGaussian& cg, const LinearInequalitySystem& ineq) {
  WhitenedSystem ws;
  const Matrix g = Matrix(ineq.matrix);
  const Matrix gf = g(Eigen::all, cg.free_indices);
  ws.w = gf * cg.factor.lower();
  ws.offset = gf * cg.mean;
  if (!cg.fixed_indices.empty()) {
    const Vector y = Eigen::Map<const Vector>(cg.fixed_values.data(), static_cast<Index>(cg.fixed_values.size()));
    ws.offset.noalias() += g(Eigen::all, cg.fixed_indices) * y;
  }
  ws.lower = ineq.lower;
  ws.upper = ineq.upper;
  return ws;
}

Vector phase_one(const WhitenedSystem& ws) {
  const Index d = ws.w.cols();
  DualQp qp;
  qp.inverse_hessian_factor = Matrix::Identity(d, d);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  for (Index r = 0; r < ws.w.rows(); ++r) {
    for (int side = 0; side < 2; ++side) {
      const double bound = side == 0 ? ws.lower(r) : ws.upper(r);
      if (!std::isfinite(bound)) continue;
      const double sign = side == 0 ? 1.0 : -1.0;
      const auto k = static_cast<Index>(rhs.size());
      for (Index j = 0; j < d; ++j) {
        if (ws.w(r, j) != 0.0) triplets.emplace_back(k, j, sign * ws.w(r, j));
      }
      rhs.push_back(sign * (bound - ws.offset(r)));
    }
  }
  qp.eq.resize(0, d);
  qp.eq_rhs.resize(0);
  qp.ineq.resize(static_cast<Index>(rhs.size()), d);
  qp.ineq.setFromTriplets(triplets.begin(), triplets.end());
  qp.ineq_rhs = Eigen::Map<const Vector>(rhs.data(), static_cast<Index>(rhs.size()));
  DualQpOptions options;
  options.feasibility_tol = 1e-12;
  options.max_iter = 100 * static_cast<int>(d + rhs.size() + 1);
  const DualQpResult res = solve_dual_active_set(qp, options);
  if (res.status != QpStatus::Optimal) {
    throw Error(ErrorKind::InfeasiblePolytope, "no feasible point for the truncated Gaussian");
  }
  return res.x;
}

void gibbs_sweep(const WhitenedSystem& ws, Vector& e, Vector& v, std::mt19937_64& rng) {
  const Index m = ws.w.rows();
  for (Index j = 0; j < e.size(); ++j) {
    double lo = -kInf;
    double hi = kInf;
    const double ej = e(j);
    for (Index r = 0; r < m; ++r) {
      const double a = ws.w(r, j);
      if (a == 0.0) continue;
      const double rest = v(r) - a * ej;
      const double b0 = (ws.lower(r) - rest) / a;
      const double b1 = (ws.upper(r) - rest) / a;
      if (a > 0.0) {
        lo = std::max(lo, b0);
        hi = std::min(hi, b1);
      } else {
        lo = std::max(lo, b1);
        hi = std::min(hi, b0);
      }
    }
    double next;
    if (lo > hi) {
      if (lo - hi > 1e-8 * (1.0 + std::abs(lo))) {
        throw Error(ErrorKind::StallDetected, "Gibbs interval empty at coordinate " + std::to_string(j));
      }
      next = 0.5 * (lo + hi);
    } else {
      next = truncated_standard_normal(rng, lo, hi);
    }
    v.noalias() += ws.w.col(j) * (next - ej);
    e(j) = next;
  }
}

}  // namespace

SampleBatch sample(const ConditionalGaussian& cg, const LinearInequalitySystem& ineq, int n_samples,
                   std::uint64_t seed, const SamplerOptions& options) {
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  if (ineq.rows() > 0) require_dims(ineq.cols(), cg.partition->size(), "inequality system");

  SampleBatch batch;
  batch.partition = cg.partition;
  batch.n_requested = n_samples;
  batch.rng_seed = seed;
  batch.draws.resize(n_samples, cg.partition->size());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix l = cg.factor.lower();
  const Index d = cg.dim();

  const auto feasible = [&](const Vector& c) { return ineq.rows() == 0 || ineq.max_violation(c) <= 0.0; };

  bool use_gibbs = options.method == SamplerMethod::Gibbs;
  if (!use_gibbs) {
    int accepted = 0;
    std::int64_t proposed = 0;
    Vector e(d);
    while (accepted < n_samples) {
      if (proposed >= options.max_proposals) {
        throw Error(ErrorKind::StallDetected, "rejection sampler exceeded the proposal budget");
      }
      for (Index j = 0; j < d; ++j) e(j) = normal(rng);
      const Vector c = cg.assemble(cg.mean + l * e);
      ++proposed;
      if (feasible(c)) batch.draws.row(accepted++) = c.transpose();
      if (options.method == SamplerMethod::Auto && proposed == options.pilot_proposals) {
        batch.pilot_acceptance = static_cast<double>(accepted) / static_cast<double>(proposed);
        if (batch.pilot_acceptance < options.min_pilot_acceptance) {
          use_gibbs = true;
          break;
        }
      }
    }
    if (!use_gibbs) {
      batch.method = SamplerMethod::Rejection;
      batch.n_accepted = accepted;
      batch.n_proposed = proposed;
      batch.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
      if (proposed < options.pilot_proposals) {
        batch.pilot_acceptance = batch.acceptance_rate;
      }
      return batch;
    }
    batch.n_proposed = proposed;
  }

  batch.method = SamplerMethod::Gibbs;
  batch.burn_in = options.burn_in;
  batch.thin = std::max(1, options.thin);
  const WhitenedSystem ws = whiten(cg, ineq);
  Vector e = ineq.rows() == 0 ? Vector(Vector::Zero(d)) : phase_one(ws);
  Vector v = ws.offset + ws.w * e;
  for (int s = 0; s < options.burn_in; ++s) {
    gibbs_sweep(ws, e, v, rng);
    v = ws.offset + ws.w * e;
  }
  for (int k = 0; k < n_samples; ++k) {
    for (int s = 0; s < batch.thin; ++s) {
      gibbs_sweep(ws, e, v, rng);
      v = ws.offset + ws.w * e;
    }
    const Vector c = cg.assemble(cg.mean + l * e);
    if (ineq.rows() > 0 && ineq.max_violation(c) > 1e-9) {
      throw Error(ErrorKind::StallDetected, "Gibbs state drifted out of the polytope");
    }
    batch.draws.row(k) = c.transpose();
  }
  batch.n_accepted = n_samples;
  batch.acceptance_rate = 1.0;
  return batch;
}

PosteriorSummary posterior_summary(const SampleBatch& batch, std::span<const double> grid) {
  if (batch.size() == 0) throw Error(ErrorKind::EmptyBatch, "posterior summary of an empty batch");
  const Index n = batch.size();
  const auto g = static_cast<Index>(grid.size());
  const PlEvaluator eval(*batch.partition, grid);
  Matrix values(g, n);
  for (Index i = 0; i < n; ++i) values.col(i) = eval.apply(batch.draws.row(i).transpose());

  PosteriorSummary s;
  s.grid.assign(grid.begin(), grid.end());
  s.mean = values.rowwise().mean();
  s.sd.resize(g);
  s.mcse.resize(g);
  s.q025.resize(g);
  s.q975.resize(g);
  std::vector<double> sorted(static_cast<std::size_t>(n));
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  for (Index k = 0; k < g; ++k) {
    const double var = n > 1 ? (values.row(k).array() - s.mean(k)).square().sum() / static_cast<double>(n - 1) : 0.0;
    s.sd(k) = std::sqrt(var);
    s.mcse(k) = s.sd(k) / std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = values(k, i);
    std::sort(sorted.begin(), sorted.end());
    s.q025(k) = quantile(0.025);
    s.q975(k) = quantile(0.975);
  }
  return s;
}

}  // namespace cgp
