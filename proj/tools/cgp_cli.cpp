#include "cgp/experiment.hpp"
#include "cgp/property_suite.hpp"

#include <CLI11.hpp>

#include <future>
#include <iostream>
#include <optional>

namespace {

struct Globals {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

cgp::ExperimentConfig load_one(const Globals& g) {
  if (g.configs.size() != 1) throw cgp::Error(cgp::ErrorKind::InvalidArgument, "exactly one --config expected");
  cgp::ExperimentConfig cfg = cgp::load_config(g.configs.front());
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::filesystem::path out_dir(const Globals& g, const cgp::ExperimentConfig& cfg) {
  return g.out.empty() ? std::filesystem::path(cfg.output) : std::filesystem::path(g.out);
}

void list(const std::vector<cgp::Artifact>& files, const std::filesystem::path& dir) {
  for (const auto& f : files) std::cout << (dir / f.path).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained GP interpolation: MAP estimation and truncated posterior sampling"};
  app.set_version_flag("--version", std::string(CGP_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.configs, "experiment config (YAML); `figure` accepts several");
  app.add_option("--out", g.out, "output directory (default: `output` from the config)");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_flag("-v,--verbose", g.verbose, "print run details");

  std::vector<int> levels;
  std::optional<int> grid;
  std::optional<int> n_samples;
  std::string fault = "none";
  bool parallel = false;

  auto* map = app.add_subcommand("map", "MAP estimate on a ladder of partitions");
  map->add_option("--levels", levels, "cell counts, each dividing the next")->delimiter(',');
  map->add_option("--grid", grid, "evaluation grid size");

  auto* smp = app.add_subcommand("sample", "draws from the truncated posterior");
  smp->add_option("--n", n_samples, "number of draws");
  smp->add_option("--grid", grid, "evaluation grid size");

  auto* fig = app.add_subcommand("figure", "kriging, MAP, posterior summary and manifest per config");
  fig->add_flag("--parallel", parallel, "run configs concurrently (separate output directories)");

  auto* check = app.add_subcommand("check", "property suite; exit code 1 on any failure");
  check->add_option("--fault", fault, "inject a defect: none | block_lemma_sign_flip");

  auto* nl = app.add_subcommand("normladder", "m_N of the kriging interpolant along the levels");
  nl->add_option("--levels", levels, "cell counts, each dividing the next")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    const auto apply_overrides = [&](cgp::ExperimentConfig& cfg) {
      if (!levels.empty()) cfg.levels = levels;
      if (grid) cfg.grid = *grid;
      if (n_samples) cfg.n_samples = *n_samples;
      cfg.validate();
    };

    if (map->parsed()) {
      auto cfg = load_one(g);
      apply_overrides(cfg);
      const auto dir = out_dir(g, cfg);
      cgp::ConvergenceReport report;
      list(cgp::run_map(cfg, dir, &report), dir);
      if (g.verbose) {
        for (std::size_t k = 0; k < report.levels.size(); ++k) {
          const auto& s = report.solutions[k];
          std::cerr << "N=" << report.levels[k] << " status=" << cgp::to_string(s.status)
                    << " objective=" << s.objective << " kkt=" << s.kkt.max() << " iterations=" << s.iterations
                    << '\n';
          for (const auto& w : s.warnings) std::cerr << "  warning: " << w << '\n';
        }
      }
    } else if (smp->parsed()) {
      auto cfg = load_one(g);
      apply_overrides(cfg);
      const auto dir = out_dir(g, cfg);
      cgp::SamplingRun run;
      list(cgp::run_sample(cfg, dir, &run), dir);
      if (g.verbose) {
        std::cerr << "method=" << cgp::to_string(run.batch.method) << " accepted=" << run.batch.n_accepted
                  << " proposed=" << run.batch.n_proposed << " pilot_acceptance=" << run.batch.pilot_acceptance
                  << '\n';
      }
    } else if (fig->parsed()) {
      if (g.configs.empty()) throw cgp::Error(cgp::ErrorKind::InvalidArgument, "figure needs --config");
      std::vector<cgp::ExperimentConfig> cfgs;
      for (const auto& path : g.configs) {
        cfgs.push_back(cgp::load_config(path));
        if (g.seed) cfgs.back().seed = *g.seed;
      }
      const auto dir_for = [&](const cgp::ExperimentConfig& cfg) {
        if (g.out.empty()) return std::filesystem::path(cfg.output);
        return cfgs.size() == 1 ? std::filesystem::path(g.out) : std::filesystem::path(g.out) / cfg.name;
      };
      std::vector<std::future<cgp::FigureRun>> jobs;
      for (const auto& cfg : cfgs) {
        jobs.push_back(std::async(parallel ? std::launch::async : std::launch::deferred,
                                  [&cfg, dir = dir_for(cfg)] { return cgp::run_figure_experiment(cfg, dir); }));
      }
      for (std::size_t k = 0; k < jobs.size(); ++k) {
        const cgp::FigureRun run = jobs[k].get();
        std::cout << run.manifest.string() << '\n';
        if (g.verbose) {
          std::cerr << cfgs[k].name << ": sampler=" << cgp::to_string(run.sampling.batch.method)
                    << " map_status=" << cgp::to_string(run.sampling.map.status) << '\n';
        }
      }
    } else if (check->parsed()) {
      const cgp::PropertyReport report = cgp::run_property_suite(g.seed.value_or(7), cgp::parse_fault(fault));
      std::cout << report.to_text();
      return report.ok() ? 0 : 1;
    } else if (nl->parsed()) {
      auto cfg = load_one(g);
      if (levels.empty()) levels = {4, 8, 16, 32, 64};
      apply_overrides(cfg);
      const auto dir = out_dir(g, cfg);
      cgp::RkhsNormSeq seq;
      cgp::run_norm_ladder(cfg, dir, &seq);
      std::cout << "level,N,m_N\n";
      for (std::size_t k = 0; k < seq.values.size(); ++k) {
        std::cout << k << ',' << seq.partitions[k].cells() << ',' << seq.values[k] << '\n';
      }
    }
  } catch (const cgp::Error& e) {
    std::cerr << "error [" << cgp::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
