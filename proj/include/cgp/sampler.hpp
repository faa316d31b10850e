#pragma once

#include "cgp/map_qp.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

namespace cgp {

/// Distribution of the free knot values given the data knots:
/// c_free ~ N(mean, covariance), c_fixed = fixed_values.
struct ConditionalGaussian {
  std::shared_ptr<const Partition> partition;
  std::vector<Index> free_indices;
  std::vector<Index> fixed_indices;
  std::vector<double> fixed_values;
  Vector mean;
  Matrix covariance;
  SpdFactor factor;  // of covariance (+ recorded jitter)

  Index dim() const { return mean.size(); }
  /// Full knot vector from free coordinates.
  Vector assemble(const Vector& free_values) const;
};

ConditionalGaussian condition_on_data(const QpProblem& qp);

enum class SamplerMethod { Auto, Rejection, Gibbs };

std::string_view to_string(SamplerMethod method);

struct SamplerOptions {
  SamplerMethod method = SamplerMethod::Auto;
  int pilot_proposals = 1000;
  double min_pilot_acceptance = 0.01;
  int burn_in = 1000;
  int thin = 10;
  std::int64_t max_proposals = 20'000'000;
};

/// Feasible draws of the knot vector. Draws are stored row-wise.
struct SampleBatch {
  std::shared_ptr<const Partition> partition;
  Matrix draws;
  int n_requested = 0;
  int n_accepted = 0;
  std::int64_t n_proposed = 0;
  SamplerMethod method = SamplerMethod::Rejection;
  std::uint64_t rng_seed = 0;
  double acceptance_rate = 1.0;
  double pilot_acceptance = 1.0;
  int burn_in = 0;
  int thin = 1;

  Index size() const { return draws.rows(); }
  CoefVector draw(Index i) const { return CoefVector(partition, draws.row(i).transpose()); }
};

/// Samples the Gaussian restricted to lower <= G c <= upper. Rejection first;
/// when the pilot acceptance is below the threshold, a coordinate-wise Gibbs
/// sampler over whitened coordinates is used instead. The random stream is a
/// single mt19937_64 seeded with `seed`, so a seed fixes the batch.
SampleBatch sample(const ConditionalGaussian& cg, const LinearInequalitySystem& ineq, int n_samples,
                   std::uint64_t seed, const SamplerOptions& options = {});

struct PosteriorSummary {
  std::vector<double> grid;
  Vector mean;
  Vector sd;
  Vector mcse;
  Vector q025;
  Vector q975;
};

PosteriorSummary posterior_summary(const SampleBatch& batch, std::span<const double> grid);

/// Draw from N(0,1) restricted to [lo, hi] by inversion of the tail
/// function on the side that keeps precision.
double truncated_standard_normal(std::mt19937_64& rng, double lo, double hi);

}  // namespace cgp
