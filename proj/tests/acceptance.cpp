// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Tolerances and time budgets are fixed here.

#include "cgp/experiment.hpp"
#include "cgp/property_suite.hpp"
#include "corpus.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

namespace {

using namespace cgp;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

ExperimentConfig bundled(const char* name) {
  return load_config(std::string(CGP_CONFIG_DIR) + "/" + name + ".yaml");
}

// 1. m_N is non-decreasing along a dyadic ladder and bounded by the exact RKHS norm.
Outcome theorem1_norm_ladder() {
  constexpr double kMonotoneTol = 1e-8;
  constexpr double kBoundTol = 1e-6;
  const Kernel k = Kernel::squared_exponential(1.0, 0.2);
  const std::vector<Partition> ladder = dyadic_ladder(4, 5);
  const auto s = ladder.front().knots();
  std::mt19937_64 rng(20240601);
  int bad_monotone = 0, bad_bound = 0;
  double worst_drop = 0.0, worst_excess = 0.0;
  for (int t = 0; t < 50; ++t) {
    const KernelCombination f = random_kernel_combination(s, rng);
    const RkhsNormSeq seq = norm_ladder([&](double x) { return f(k, x); }, ladder, k);
    // exact norm a^T Gamma_s a from the long-double oracle kernel
    oracle::Real exact = 0;
    for (std::size_t i = 0; i < f.centers.size(); ++i) {
      for (std::size_t j = 0; j < f.centers.size(); ++j) {
        exact += f.weights[i] * oracle::kernel(k, f.centers[i], f.centers[j]) * f.weights[j];
      }
    }
    for (std::size_t l = 1; l < seq.values.size(); ++l) {
      worst_drop = std::max(worst_drop, (seq.values[l - 1] - seq.values[l]) / std::abs(seq.values[l - 1]));
    }
    for (double m : seq.values) {
      worst_excess = std::max(worst_excess, (m - static_cast<double>(exact)) / static_cast<double>(exact));
    }
    if (!seq.non_decreasing(kMonotoneTol)) ++bad_monotone;
    for (double m : seq.values) {
      if (m > static_cast<double>(exact) * (1.0 + kBoundTol)) {
        ++bad_bound;
        break;
      }
    }
  }
  return {bad_monotone == 0 && bad_bound == 0,
          "50 functions, ladder 4..64: non-monotone=" + std::to_string(bad_monotone) + " (max rel drop " +
              sci(worst_drop) + "), above norm=" + std::to_string(bad_bound) + " (max rel excess " +
              sci(worst_excess) + ")"};
}

// 2. y^T B^{-1} y >= x^T A^{-1} x for the leading block A, two routes.
Outcome block_lemma() {
  constexpr double kSlack = 1e-10;
  constexpr double kRouteTol = 1e-8;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(2, 12);
  std::normal_distribution<double> normal;
  int violations = 0, disagreements = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Matrix b = random_spd(size(rng), rng);
    Vector y(b.rows());
    for (Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    const auto [lhs, rhs] = check_block_lemma(b, y);
    const double slack = (lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
    worst = std::min(worst, slack);
    if (slack < -kSlack) ++violations;
    // independent route: explicit long-double inverses
    const auto quad = [&](Index n) {
      oracle::Mat m(static_cast<std::size_t>(n), oracle::Vec(static_cast<std::size_t>(n)));
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) m[i][j] = b(i, j);
      }
      const oracle::Mat inv = oracle::inverse(m);
      oracle::Real q = 0;
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) q += y(i) * inv[i][j] * y(j);
      }
      return static_cast<double>(q);
    };
    const double lo = quad(b.rows()), ro = quad(b.rows() - 1);
    if (std::abs(lo - lhs) > kRouteTol * std::abs(lo) || std::abs(ro - rhs) > kRouteTol * std::abs(ro)) {
      ++disagreements;
    }
  }
  return {violations == 0 && disagreements == 0,
          "1000 SPD matrices (n=2..12): violations=" + std::to_string(violations) + ", worst rel slack " +
              sci(worst) + ", route disagreements=" + std::to_string(disagreements)};
}

// 3. sup|h| <= sigma ||h||_{H_N} with a constant independent of N.
Outcome uniform_bound() {
  constexpr double kTol = 1e-8;
  const Kernel k = Kernel::squared_exponential(2.0, 0.2);
  const double c0 = uniform_bound_constant(k);
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> normal;
  int violations = 0, count = 0;
  double worst = 0.0;
  const int ns[] = {8, 32, 128};
  for (int which = 0; which < 3; ++which) {
    const int n = ns[which];
    const Partition p = uniform_partition(n);
    const GramMatrix g = gram(k, p.knot_vector());
    const std::vector<double> grid = uniform_grid(20 * n + 1);
    const PlEvaluator eval(p, grid);
    const int per_level = which < 2 ? 67 : 66;
    for (int t = 0; t < per_level; ++t, ++count) {
      Vector c(p.size());
      if (t % 2 == 0) {
        for (Index j = 0; j < c.size(); ++j) c(j) = normal(rng);
      } else {
        // kernel sections make the bound tight
        const Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(p.size()));
        c = g.values().col(j) * normal(rng);
      }
      const double sup = eval.apply(c).cwiseAbs().maxCoeff();
      const double ratio = sup / (c0 * std::sqrt(hn_norm_sq(c, g)));
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + kTol) ++violations;
    }
  }
  return {violations == 0, std::to_string(count) + " vectors over N={8,32,128}: violations=" +
                               std::to_string(violations) + ", max sup/(sigma*norm) = " + sci(worst)};
}

// 4. MAP matches an independent projected-gradient solve on every small corpus problem.
Outcome oracle_agreement() {
  constexpr double kTol = 1e-6;
  int mismatches = 0, nonconverged = 0, count = 0;
  double worst = 0.0;
  std::string failed;
  for (const auto& c : corpus::small_problems()) {
    const QpProblem qp = build_problem(c.data, c.specs, uniform_partition(c.n_cells), c.kernel);
    const MapSolution sol = solve_map(qp);
    const oracle::Result ref = oracle::projected_gradient(corpus::to_oracle(qp, c), 1e-10L);
    if (!ref.converged) ++nonconverged;
    double diff = 0.0;
    for (Index j = 0; j < sol.coef.size(); ++j) {
      diff = std::max(diff, std::abs(sol.coef.values()(j) - ref.c[static_cast<std::size_t>(j)]));
    }
    worst = std::max(worst, diff);
    if (sol.status != QpStatus::Optimal || diff > kTol) {
      ++mismatches;
      failed += " " + c.label;
    }
    ++count;
  }
  return {mismatches == 0 && nonconverged == 0,
          std::to_string(count) + " problems: mismatches=" + std::to_string(mismatches) + failed +
              ", oracle non-converged=" + std::to_string(nonconverged) + ", max |diff| " + sci(worst)};
}

struct FixedLevel {
  QpProblem qp;
  MapSolution map;
  Vector unconstrained;
};

FixedLevel solve_at_sampling_level(const ExperimentConfig& cfg) {
  const AlignedData aligned = align_data(cfg.data, uniform_partition(cfg.levels.front()));
  FixedLevel out;
  out.qp = build_problem(aligned.data, cfg.constraints, host_partition(cfg.sampling_level(), aligned.data),
                         cfg.kernel);
  out.map = solve_map(out.qp);
  const ConditionalGaussian cg = condition_on_data(out.qp);
  out.unconstrained = cg.assemble(cg.mean);
  return out;
}

// 5. Loose bounds: MAP equals the unconstrained mean.
Outcome figure2_coincidence() {
  const ExperimentConfig cfg = bundled("fig2");
  const double tol = 1e-6 * cfg.kernel.sigma();
  const FixedLevel f = solve_at_sampling_level(cfg);
  const std::vector<double> grid = uniform_grid(cfg.grid);
  const PlEvaluator eval(*f.qp.partition, grid);
  const Vector map = eval.apply(f.map.coef.values());
  const Vector unc = eval.apply(f.unconstrained);
  double min_slack = kInf;
  for (Index r = 0; r < f.unconstrained.size(); ++r) {
    min_slack = std::min({min_slack, f.unconstrained(r) - cfg.constraints[0].lower,
                          cfg.constraints[0].upper - f.unconstrained(r)});
  }
  const double gap = (map - unc).cwiseAbs().maxCoeff();
  const Vector kriging = kriging_mean(f.qp.data, cfg.kernel, grid);
  const double cont_gap = (map - kriging).cwiseAbs().maxCoeff();
  return {min_slack > 0 && f.map.status == QpStatus::Optimal && gap <= tol,
          "N=50: unconstrained knot slack " + sci(min_slack) + ", sup|MAP - kriging_N| = " + sci(gap) +
              " (tol " + sci(tol) + "); continuous kriging gap " + sci(cont_gap)};
}

// 6. Active bounds: MAP inside the bounds, draws feasible, posterior mean separates from MAP.
Outcome figure1_separation() {
  constexpr double kGridTol = 1e-8;
  constexpr double kKnotTol = 1e-9;
  const ExperimentConfig cfg = bundled("fig1");
  const SamplingRun run = compute_sampling(cfg);
  const ConstraintSpec& b = cfg.constraints[0];
  const double map_violation =
      std::max((b.lower - run.map_curve.array()).maxCoeff(), (run.map_curve.array() - b.upper).maxCoeff());
  double draw_violation = 0.0;
  for (Index i = 0; i < run.batch.size(); ++i) {
    draw_violation = std::max(draw_violation, run.problem.ineq.max_violation(run.batch.draws.row(i).transpose()));
  }
  int separated = 0;
  double best = 0.0;
  for (Index k = 0; k < run.map_curve.size(); ++k) {
    const double d = std::abs(run.summary.mean(k) - run.map_curve(k));
    if (run.summary.mcse(k) > 0) best = std::max(best, d / run.summary.mcse(k));
    if (d > 3.0 * run.summary.mcse(k)) ++separated;
  }
  const Vector kriging = kriging_mean(run.problem.data, cfg.kernel, run.summary.grid);
  const double kriging_max = kriging.maxCoeff();
  return {map_violation <= kGridTol && draw_violation <= kKnotTol && run.batch.size() == 100 && separated >= 1,
          "MAP max bound violation " + sci(std::max(0.0, map_violation)) + " on 2001 points; " +
              std::to_string(run.batch.size()) + " draws (" + std::string(to_string(run.batch.method)) +
              ") max knot violation " + sci(draw_violation) + "; |mean - MAP| > 3 MCSE at " +
              std::to_string(separated) + " grid points (max ratio " + sci(best) + "); kriging max " +
              sci(kriging_max)};
}

// 7. Inactive truncation: kriging, MAP and posterior mean agree within 3 MCSE.
Outcome figure3_coincidence() {
  constexpr double kFloor = 1e-8;  // MCSE vanishes at the data points
  const ExperimentConfig cfg = bundled("fig3");
  const SamplingRun run = compute_sampling(cfg);
  int failures = 0;
  double worst = 0.0;
  for (Index k = 0; k < run.map_curve.size(); ++k) {
    const double lim = 3.0 * run.summary.mcse(k) + kFloor;
    const double d = std::max({std::abs(run.unconstrained_curve(k) - run.map_curve(k)),
                               std::abs(run.unconstrained_curve(k) - run.summary.mean(k)),
                               std::abs(run.map_curve(k) - run.summary.mean(k))});
    worst = std::max(worst, d / lim);
    if (d > lim) ++failures;
  }
  return {failures == 0 && run.batch.size() == 1000,
          std::to_string(run.batch.size()) + " draws (" + std::string(to_string(run.batch.method)) +
              "): points outside 3 MCSE = " + std::to_string(failures) + ", max pairwise gap / (3 MCSE) = " +
              sci(worst)};
}

// 8. Active bounds on N = 25, 50, 100, 200.
Outcome convergence() {
  constexpr double kObjTol = 1e-6;
  ExperimentConfig cfg = bundled("fig1");
  cfg.levels = {25, 50, 100, 200};
  const ConvergenceReport r = compute_ladder(cfg);
  const auto& g = r.sup_gaps;
  bool objective_ok = true;
  for (double o : r.objectives) objective_ok = objective_ok && o <= r.objectives.back() * (1.0 + kObjTol);
  bool optimal = true;
  for (const auto& s : r.solutions) optimal = optimal && s.status == QpStatus::Optimal;
  std::ostringstream os;
  os << "sup gaps " << sci(g[0]) << ", " << sci(g[1]) << ", " << sci(g[2]) << "; objectives";
  for (double o : r.objectives) os << ' ' << sci(o);
  return {optimal && g[2] < g[1] && objective_ok, os.str()};
}

// 9. Projection onto every partition keeps members of each family inside the family.
Outcome h2_suite() {
  constexpr double kTol = 1e-12;
  constexpr double kMemberTol = 1e-9;
  std::vector<Partition> ladder = dyadic_ladder(4, 5);
  for (int n : {25, 50, 100, 200}) ladder.push_back(uniform_partition(n));
  const std::vector<double> extra{0.1, 0.9};
  ladder.push_back(refine(uniform_partition(25), extra));
  std::size_t violations = 0, checked = 0;
  std::string per_family;
  const ConstraintSpec specs[] = {ConstraintSpec::bounds(-25, 20), ConstraintSpec::non_decreasing(),
                                  ConstraintSpec::convex()};
  std::uint64_t seed = 9;
  for (const auto& spec : specs) {
    const auto fs = analytic_family_members(spec, 10, seed++);
    // sanity check of the members themselves; slopes on a fine grid carry rounding noise
    for (const auto& f : fs) {
      if (!spec.holds_on_grid(f, uniform_grid(4001), kMemberTol)) ++violations;
    }
    const H2Report rep = check_h2(spec, fs, ladder, kTol);
    violations += rep.violations.size();
    checked += rep.functions_checked * rep.levels_checked;
    per_family += " " + spec.describe() + ":" + std::to_string(rep.violations.size());
  }
  return {violations == 0, std::to_string(checked) + " (function, partition) pairs, violations" + per_family};
}

// 10. A datum outside the bounds is reported as Infeasible.
Outcome infeasibility() {
  const Kernel k = Kernel::squared_exponential(25, 0.2);
  const DesignData data{{0.1, 0.4, 0.6, 0.9}, {-20, 15, 21, -10}};
  const QpProblem qp = build_problem(data, ConstraintSpec::bounds(-25, 20), uniform_partition(50), k);
  const MapSolution s = solve_map(qp);
  const DesignData decreasing{{0.2, 0.8}, {1.0, -1.0}};
  const QpProblem mono = build_problem(decreasing, ConstraintSpec::non_decreasing(), uniform_partition(50), k);
  const MapSolution m = solve_map(mono);
  return {s.status == QpStatus::Infeasible && m.status == QpStatus::Infeasible,
          "datum 21 above bound 20: " + std::string(to_string(s.status)) +
              "; decreasing data under monotonicity: " + std::string(to_string(m.status))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "norm ladder monotone and bounded", 10, theorem1_norm_ladder},
      {2, "block-matrix lemma", 5, block_lemma},
      {3, "uniform bound independent of N", 10, uniform_bound},
      {4, "MAP equals projected-gradient oracle", 30, oracle_agreement},
      {5, "loose bounds: MAP equals kriging", 5, figure2_coincidence},
      {6, "active bounds: MAP feasible, mean separates", 60, figure1_separation},
      {7, "inactive truncation: kriging, MAP, mean coincide", 120, figure3_coincidence},
      {8, "convergence along N = 25..200", 120, convergence},
      {9, "projection preserves constraint families", 5, h2_suite},
      {10, "out-of-bounds datum is infeasible", 1, infeasibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.passed && in_time;
    if (!pass) ++failed;
    std::printf("[%s] criterion %2d  %s | %s | %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
