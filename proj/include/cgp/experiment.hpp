#pragma once

#include "cgp/config.hpp"
#include "cgp/map_qp.hpp"
#include "cgp/sampler.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cgp {

/// Everything computed at the sampling level of a config.
struct SamplingRun {
  QpProblem problem;
  MapSolution map;
  Vector unconstrained;  // finite-dimensional kriging: knot values of the unconstrained optimum
  SampleBatch batch;
  PosteriorSummary summary;
  Vector map_curve;            // on summary.grid
  Vector unconstrained_curve;  // on summary.grid
};

/// Pure computation behind `sample` (no files).
SamplingRun compute_sampling(const ExperimentConfig& cfg, const SamplerOptions& options = {});

/// Pure computation behind `map` (no files).
ConvergenceReport compute_ladder(const ExperimentConfig& cfg, const MapOptions& options = {});

/// A file written by a runner and its number of data rows (header excluded).
struct Artifact {
  std::string path;  // relative to the output directory
  std::size_t rows = 0;
};

/// Writes map_curve_N<k>.csv for every level, convergence.csv and solution_meta.json.
std::vector<Artifact> run_map(const ExperimentConfig& cfg, const std::filesystem::path& out,
                              ConvergenceReport* report = nullptr);

/// Writes paths.csv (draws at the knots), summary.csv on the grid and sampler_meta.json.
std::vector<Artifact> run_sample(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                 SamplingRun* run = nullptr);

/// Writes norm_ladder.csv (level, N, m_N) for the kriging interpolant of the config data
/// over the config levels.
std::vector<Artifact> run_norm_ladder(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                      RkhsNormSeq* seq = nullptr);

struct FigureRun {
  ConvergenceReport convergence;
  SamplingRun sampling;
  Vector kriging;  // continuous kriging mean on the grid
  std::filesystem::path manifest;
};

/// Runs map and sample, writes kriging.csv, comparison.csv, partition.json and a
/// manifest.json listing every file with its row count, the config hash and versions.
FigureRun run_figure_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Checks that every file listed in a manifest exists with the declared row count.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest);

}  // namespace cgp
