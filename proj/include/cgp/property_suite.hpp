#pragma once

#include "cgp/constraints.hpp"
#include "cgp/kernel.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cgp {

/// Deliberate defects used to check that the suite can fail.
enum class Fault { None, BlockLemmaSignFlip };

Fault parse_fault(std::string_view name);

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::uint64_t seed = 0;  // rerun this property alone with this seed
  std::string detail;

  friend bool operator==(const PropertyResult&, const PropertyResult&) = default;
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> results;

  bool ok() const;
  /// One line per property, deterministic for a given seed.
  std::string to_text() const;
};

PropertyReport run_property_suite(std::uint64_t seed, Fault fault = Fault::None);

/// `count` analytic members of a constraint family with randomized
/// parameters. Bounds members take values in [spec.lower, spec.upper]
/// (which must be finite).
std::vector<std::function<double(double)>> analytic_family_members(const ConstraintSpec& spec, int count,
                                                                    std::uint64_t seed);

/// f = sum a_i K(., s_i) with a_i uniform in [-1, 1].
struct KernelCombination {
  std::vector<double> centers;
  std::vector<double> weights;

  double operator()(const Kernel& k, double x) const;
  /// Exact RKHS norm a^T K_s a.
  double rkhs_norm_sq(const Kernel& k) const;
};

KernelCombination random_kernel_combination(std::span<const double> centers, std::mt19937_64& rng);

/// Random SPD matrix of size n with a controlled spectrum.
Matrix random_spd(Index n, std::mt19937_64& rng);

}  // namespace cgp
