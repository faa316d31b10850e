#pragma once

#include "cgp/constraints.hpp"
#include "cgp/finite_rkhs.hpp"
#include "cgp/kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cgp {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  Kernel kernel = Kernel::squared_exponential(25.0, 0.2);
  DesignData data;
  ConstraintSet constraints;
  std::vector<int> levels{50};
  int sample_cells = 0;  // 0 means the finest level
  int n_samples = 100;
  std::uint64_t seed = 42;
  int grid = 2001;
  std::string output = "out";

  int sampling_level() const { return sample_cells > 0 ? sample_cells : levels.back(); }
  /// Throws Error(Config) when a field is out of range.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses YAML text. Errors carry "<source>:<line>:" prefixes.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// YAML text that parses back to an equal config.
std::string serialize(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace cgp
