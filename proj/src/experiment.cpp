#include "cgp/experiment.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace cgp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& dir, std::string name, const std::string& header) : name_(std::move(name)) {
    out_.open(dir / name_);
    if (!out_) throw Error(ErrorKind::Io, "cannot write " + (dir / name_).string());
    out_ << std::setprecision(17) << header << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... fields) {
    std::size_t k = 0;
    ((out_ << (k++ ? "," : "") << fields), ...);
    out_ << '\n';
    ++rows_;
  }

  Artifact finish() {
    out_.close();
    if (!out_) throw Error(ErrorKind::Io, "failed writing " + name_);
    return {name_, rows_};
  }

 private:
  std::string name_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

Artifact write_json(const fs::path& dir, const std::string& name, const json& j) {
  std::ofstream out(dir / name);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
  return {name, 0};
}

json kkt_json(const KktResiduals& k) {
  return {{"stationarity", k.stationarity},
          {"primal_eq", k.primal_eq},
          {"primal_ineq", k.primal_ineq},
          {"dual_sign", k.dual_sign},
          {"complementarity", k.complementarity}};
}

json solution_json(const MapSolution& s) {
  return {{"N", s.coef.partition().cells()},
          {"knots", s.coef.partition().size()},
          {"status", std::string(to_string(s.status))},
          {"objective", s.objective},
          {"kkt", kkt_json(s.kkt)},
          {"iterations", s.iterations},
          {"jitter", s.jitter},
          {"active_rows", s.active_rows},
          {"min_slack", s.min_slack},
          {"strictly_feasible", s.strictly_feasible},
          {"warnings", s.warnings}};
}

AlignedData coarse_alignment(const ExperimentConfig& cfg) {
  return align_data(cfg.data, uniform_partition(cfg.levels.front()));
}

}  // namespace

ConvergenceReport compute_ladder(const ExperimentConfig& cfg, const MapOptions& options) {
  cfg.validate();
  return convergence_ladder(cfg.data, cfg.constraints, cfg.kernel, cfg.levels, cfg.grid, options);
}

SamplingRun compute_sampling(const ExperimentConfig& cfg, const SamplerOptions& options) {
  cfg.validate();
  const AlignedData aligned = coarse_alignment(cfg);
  SamplingRun run;
  run.problem = build_problem(aligned.data, cfg.constraints, host_partition(cfg.sampling_level(), aligned.data),
                              cfg.kernel);
  run.map = solve_map(run.problem);
  if (run.map.status == QpStatus::Infeasible) {
    throw Error(ErrorKind::InfeasiblePolytope, "constraints and data are incompatible");
  }
  const ConditionalGaussian cg = condition_on_data(run.problem);
  run.unconstrained = cg.assemble(cg.mean);
  run.batch = sample(cg, run.problem.ineq, cfg.n_samples, cfg.seed, options);
  const std::vector<double> grid = uniform_grid(cfg.grid);
  run.summary = posterior_summary(run.batch, grid);
  const PlEvaluator eval(*run.problem.partition, grid);
  run.map_curve = eval.apply(run.map.coef.values());
  run.unconstrained_curve = eval.apply(run.unconstrained);
  return run;
}

std::vector<Artifact> run_map(const ExperimentConfig& cfg, const fs::path& out, ConvergenceReport* report_out) {
  fs::create_directories(out);
  ConvergenceReport report = compute_ladder(cfg);
  std::vector<Artifact> files;
  json meta = {{"levels", json::array()}};
  for (std::size_t k = 0; k < report.levels.size(); ++k) {
    const MapSolution& s = report.solutions[k];
    const Vector curve = PlEvaluator(s.coef.partition(), report.grid).apply(s.coef.values());
    CsvWriter csv(out, "map_curve_N" + std::to_string(report.levels[k]) + ".csv", "x,value");
    for (Index i = 0; i < curve.size(); ++i) csv.row(report.grid[static_cast<std::size_t>(i)], curve(i));
    files.push_back(csv.finish());
    meta["levels"].push_back(solution_json(s));
  }
  CsvWriter conv(out, "convergence.csv", "N,sup_gap,objective");
  for (std::size_t k = 0; k < report.levels.size(); ++k) {
    // sup_gap on row k compares level k with level k-1; empty on the coarsest level
    if (k == 0) {
      conv.row(report.levels[k], "", report.objectives[k]);
    } else {
      conv.row(report.levels[k], report.sup_gaps[k - 1], report.objectives[k]);
    }
  }
  files.push_back(conv.finish());
  files.push_back(write_json(out, "solution_meta.json", meta));
  if (report_out) *report_out = std::move(report);
  return files;
}

std::vector<Artifact> run_sample(const ExperimentConfig& cfg, const fs::path& out, SamplingRun* run_out) {
  fs::create_directories(out);
  SamplingRun run = compute_sampling(cfg);
  std::vector<Artifact> files;
  const Partition& p = *run.batch.partition;
  CsvWriter paths(out, "paths.csv", "draw_id,x,value");
  for (Index i = 0; i < run.batch.size(); ++i) {
    for (Index j = 0; j < p.size(); ++j) paths.row(i, p.knot(j), run.batch.draws(i, j));
  }
  files.push_back(paths.finish());
  const PosteriorSummary& s = run.summary;
  CsvWriter summary(out, "summary.csv", "x,mean,sd,mcse,q025,q975");
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    summary.row(s.grid[k], s.mean(i), s.sd(i), s.mcse(i), s.q025(i), s.q975(i));
  }
  files.push_back(summary.finish());
  const json meta = {{"method", std::string(to_string(run.batch.method))},
                     {"seed", run.batch.rng_seed},
                     {"n_requested", run.batch.n_requested},
                     {"n_accepted", run.batch.n_accepted},
                     {"n_proposed", run.batch.n_proposed},
                     {"acceptance_rate", run.batch.acceptance_rate},
                     {"pilot_acceptance", run.batch.pilot_acceptance},
                     {"burn_in", run.batch.burn_in},
                     {"thin", run.batch.thin},
                     {"N", p.cells()},
                     {"knots", p.size()},
                     {"map", solution_json(run.map)}};
  files.push_back(write_json(out, "sampler_meta.json", meta));
  if (run_out) *run_out = std::move(run);
  return files;
}

std::vector<Artifact> run_norm_ladder(const ExperimentConfig& cfg, const fs::path& out, RkhsNormSeq* seq_out) {
  cfg.validate();
  fs::create_directories(out);
  std::vector<Partition> ladder;
  for (int n : cfg.levels) ladder.push_back(uniform_partition(n));
  const DesignData data = cfg.data;
  const Kernel kernel = cfg.kernel;
  const auto f = [&](double x) {
    const double q[1] = {x};
    return kriging_mean(data, kernel, q)(0);
  };
  RkhsNormSeq seq = norm_ladder(f, ladder, kernel);
  CsvWriter csv(out, "norm_ladder.csv", "level,N,m_N");
  for (std::size_t k = 0; k < ladder.size(); ++k) csv.row(k, ladder[k].cells(), seq.values[k]);
  std::vector<Artifact> files{csv.finish()};
  if (seq_out) *seq_out = std::move(seq);
  return files;
}

FigureRun run_figure_experiment(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  fs::create_directories(out);
  FigureRun fig;
  std::vector<Artifact> files = run_map(cfg, out, &fig.convergence);
  for (auto& a : run_sample(cfg, out, &fig.sampling)) files.push_back(std::move(a));

  const std::vector<double>& grid = fig.sampling.summary.grid;
  fig.kriging = kriging_mean(fig.sampling.problem.data, cfg.kernel, grid);
  CsvWriter kcsv(out, "kriging.csv", "x,kriging,kriging_N");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    kcsv.row(grid[k], fig.kriging(i), fig.sampling.unconstrained_curve(i));
  }
  files.push_back(kcsv.finish());

  const PosteriorSummary& s = fig.sampling.summary;
  CsvWriter cmp(out, "comparison.csv", "x,kriging_N,map,posterior_mean,mcse,q025,q975");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    cmp.row(grid[k], fig.sampling.unconstrained_curve(i), fig.sampling.map_curve(i), s.mean(i), s.mcse(i),
            s.q025(i), s.q975(i));
  }
  files.push_back(cmp.finish());

  const auto knots = fig.sampling.problem.partition->knots();
  files.push_back(write_json(out, "partition.json", json(std::vector<double>(knots.begin(), knots.end()))));

  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  json manifest = {{"name", cfg.name},
                   {"config_hash", config_hash(cfg)},
                   {"schema_version", cfg.schema_version},
                   {"versions", {{"cgp", CGP_VERSION}, {"eigen", eigen.str()}}},
                   {"constraints", json::array()},
                   {"files", json::array()}};
  for (const auto& c : cfg.constraints) manifest["constraints"].push_back(c.describe());
  for (const auto& a : files) {
    const bool csv = a.path.size() > 4 && a.path.ends_with(".csv");
    json entry = {{"path", a.path}, {"kind", csv ? "csv" : "json"}};
    if (csv) entry["rows"] = a.rows;
    manifest["files"].push_back(entry);
  }
  fig.manifest = out / "manifest.json";
  write_json(out, "manifest.json", manifest);
  std::ofstream(out / "config.yaml") << serialize(cfg);
  return fig;
}

std::vector<std::string> verify_manifest(const fs::path& manifest_path) {
  std::vector<std::string> problems;
  std::ifstream in(manifest_path);
  if (!in) return {"cannot open " + manifest_path.string()};
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    return {std::string("manifest is not valid JSON: ") + e.what()};
  }
  const fs::path dir = manifest_path.parent_path();
  for (const auto& entry : manifest.at("files")) {
    const auto name = entry.at("path").get<std::string>();
    std::ifstream f(dir / name);
    if (!f) {
      problems.push_back("missing " + name);
      continue;
    }
    if (!entry.contains("rows")) continue;
    std::size_t lines = 0;
    std::string line;
    while (std::getline(f, line)) ++lines;
    const auto declared = entry.at("rows").get<std::size_t>();
    if (lines == 0 || lines - 1 != declared) {
      problems.push_back(name + ": declared " + std::to_string(declared) + " rows, found " +
                         std::to_string(lines ? lines - 1 : 0));
    }
  }
  return problems;
}

}  // namespace cgp
