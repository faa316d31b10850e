#include "cgp/property_suite.hpp"

#include "cgp/config.hpp"
#include "cgp/map_qp.hpp"
#include "cgp/sampler.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cgp {

Fault parse_fault(std::string_view name) {
  if (name.empty() || name == "none") return Fault::None;
  if (name == "block_lemma_sign_flip") return Fault::BlockLemmaSignFlip;
  throw Error(ErrorKind::InvalidArgument, "unknown fault '" + std::string(name) + "'");
}

bool PropertyReport::ok() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

std::string PropertyReport::to_text() const {
  std::ostringstream os;
  os << "property suite seed=" << seed << '\n';
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << " seed=" << r.seed << "  " << r.detail << '\n';
  }
  os << (ok() ? "all properties passed" : "FAILED") << '\n';
  return os.str();
}

double KernelCombination::operator()(const Kernel& k, double x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) s += weights[i] * k(x, centers[i]);
  return s;
}

double KernelCombination::rkhs_norm_sq(const Kernel& k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = 0; j < centers.size(); ++j) s += weights[i] * weights[j] * k(centers[i], centers[j]);
  }
  return s;
}

KernelCombination random_kernel_combination(std::span<const double> centers, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  KernelCombination f;
  f.centers.assign(centers.begin(), centers.end());
  for (std::size_t i = 0; i < centers.size(); ++i) f.weights.push_back(unif(rng));
  return f;
}

Matrix random_spd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logeig(-2.0, 2.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::pow(10.0, logeig(rng));
  Matrix b = q * d.asDiagonal() * q.transpose();
  return 0.5 * (b + b.transpose());
}

std::vector<std::function<double(double)>> analytic_family_members(const ConstraintSpec& spec, int count,
                                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::function<double(double)>> out;
  for (int i = 0; i < count; ++i) {
    const double p = u(rng), q = u(rng), r = u(rng);
    switch (spec.family) {
      case ConstraintFamily::None:
        out.emplace_back([=](double x) { return std::sin(10.0 * p * x + q) * (1.0 + r); });
        break;
      case ConstraintFamily::Bounds: {
        if (!std::isfinite(spec.lower) || !std::isfinite(spec.upper)) {
          throw Error(ErrorKind::InvalidArgument, "bounded family members need finite bounds");
        }
        const double lo = spec.lower, hi = spec.upper;
        // values of 0.5 (1 + sin) lie in [0, 1]; shrink slightly so rounding stays inside
        out.emplace_back([=](double x) {
          const double s = 0.5 * (1.0 + std::sin(2.0 + 20.0 * p * x + 6.0 * q));
          return lo + (hi - lo) * (0.001 + 0.998 * s);
        });
        break;
      }
      case ConstraintFamily::NonDecreasing:
        switch (i % 3) {
          case 0: out.emplace_back([=](double x) { return q + (1.0 + r) * std::pow(x, 0.5 + 3.0 * p); }); break;
          case 1: out.emplace_back([=](double x) { return std::tanh(20.0 * p * (x - q)) + r * x; }); break;
          default: out.emplace_back([=](double x) { return std::expm1((1.0 + 4.0 * p) * x) - q; }); break;
        }
        break;
      case ConstraintFamily::Convex:
        switch (i % 3) {
          case 0: out.emplace_back([=](double x) { return (1.0 + r) * (x - q) * (x - q) + p; }); break;
          case 1: out.emplace_back([=](double x) { return std::exp((1.0 + 3.0 * p) * (x - q)); }); break;
          default: out.emplace_back([=](double x) { return std::abs(x - q) + p * x; }); break;
        }
        break;
    }
  }
  return out;
}

namespace {

std::uint64_t property_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

PropertyResult block_lemma(std::uint64_t seed, Fault fault) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, 12);
  std::normal_distribution<double> normal;
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Matrix b = random_spd(size(rng), rng);
    Vector y(b.rows());
    for (Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    auto [lhs, rhs] = check_block_lemma(b, y);
    if (fault == Fault::BlockLemmaSignFlip) lhs = -lhs;
    const double slack = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    worst = std::min(worst, slack);
    if (slack < -1e-10) ++failures;
  }
  return {"block_lemma", failures == 0, seed, "failures=" + std::to_string(failures) + " worst_slack=" + fmt(worst)};
}

PropertyResult norm_ladder_monotone(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Kernel k = Kernel::squared_exponential(1.0, 0.2);
  const std::vector<Partition> ladder = dyadic_ladder(4, 5);
  const auto s = ladder.front().knots();
  const std::vector<double> centers(s.begin() + 1, s.end());
  int failures = 0;
  for (int t = 0; t < 10; ++t) {
    const KernelCombination f = random_kernel_combination(centers, rng);
    const RkhsNormSeq seq = norm_ladder([&](double x) { return f(k, x); }, ladder, k);
    const double exact = f.rkhs_norm_sq(k);
    if (!seq.non_decreasing(1e-8) || seq.values.back() > exact * (1.0 + 1e-6) + 1e-14) ++failures;
  }
  return {"norm_ladder_monotone", failures == 0, seed, "failures=" + std::to_string(failures)};
}

PropertyResult uniform_bound(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Kernel k = Kernel::squared_exponential(2.0, 0.2);
  int failures = 0;
  double worst = 0.0;
  for (int n : {8, 32}) {
    const Partition p = uniform_partition(n);
    const GramMatrix g = gram(k, p.knot_vector());
    const std::vector<double> grid = uniform_grid(10 * n + 1);
    const PlEvaluator eval(p, grid);
    for (int t = 0; t < 10; ++t) {
      Vector c(p.size());
      for (Index j = 0; j < c.size(); ++j) c(j) = normal(rng);
      const double sup = eval.apply(c).cwiseAbs().maxCoeff();
      const double ratio = sup / (uniform_bound_constant(k) * std::sqrt(hn_norm_sq(c, g)));
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + 1e-8) ++failures;
    }
  }
  return {"uniform_bound", failures == 0, seed, "max_ratio=" + fmt(worst)};
}

PropertyResult h2_projection(std::uint64_t seed) {
  const std::vector<Partition> ladder = dyadic_ladder(4, 5);
  std::size_t violations = 0;
  for (const auto& spec : {ConstraintSpec::bounds(-1.0, 2.0), ConstraintSpec::non_decreasing(),
                           ConstraintSpec::convex()}) {
    violations += check_h2(spec, analytic_family_members(spec, 10, seed), ladder).violations.size();
  }
  return {"h2_projection", violations == 0, seed, "violations=" + std::to_string(violations)};
}

PropertyResult partition_of_unity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> extra;
  for (int i = 0; i < 7; ++i) extra.push_back(0.05 + 0.9 * u(rng));
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end(), [](double a, double b) { return b - a < 1e-6; }),
              extra.end());
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), extra.begin(), extra.end());
  knots.push_back(1.0);
  const Partition p(knots);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double x = u(rng);
    double s = 0.0;
    for (Index j = 0; j < p.size(); ++j) s += hat_evaluate(p, j, x);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return {"partition_of_unity", worst <= 1e-14, seed, "max_error=" + fmt(worst)};
}

struct RandomProblem {
  DesignData data;
  ConstraintSet specs;
  Kernel kernel = Kernel::squared_exponential(1.0, 0.2);
  int n_cells = 10;
};

RandomProblem random_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomProblem rp;
  rp.kernel = Kernel::squared_exponential(0.5 + u(rng), 0.1 + 0.3 * u(rng));
  rp.n_cells = 8 + static_cast<int>(22 * u(rng));
  const int n_data = 2 + static_cast<int>(3 * u(rng));
  for (int i = 0; i < n_data; ++i) {
    rp.data.points.push_back((i + 0.2 + 0.6 * u(rng)) / n_data);
    rp.data.values.push_back(-0.8 + 1.6 * u(rng));
  }
  if (u(rng) < 0.5) {
    rp.specs.push_back(ConstraintSpec::bounds(-1.0, 1.0));
  } else {
    std::sort(rp.data.values.begin(), rp.data.values.end());
    rp.specs.push_back(ConstraintSpec::non_decreasing());
  }
  return rp;
}

PropertyResult map_kkt(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const RandomProblem rp = random_problem(rng);
    const QpProblem qp = build_problem(rp.data, rp.specs, uniform_partition(rp.n_cells), rp.kernel);
    const MapSolution s = solve_map(qp);
    const double r = s.kkt.max();
    worst = std::max(worst, r);
    if (s.status != QpStatus::Optimal || r > 1e-8) ++failures;
  }
  return {"map_kkt", failures == 0, seed, "failures=" + std::to_string(failures) + " max_residual=" + fmt(worst)};
}

PropertyResult map_dominance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Kernel k = Kernel::squared_exponential(1.0, 0.25);
  const DesignData data{{0.2, 0.5, 0.8}, {0.5, -0.7, 0.9}};
  const QpProblem qp = build_problem(data, ConstraintSpec::bounds(-1.0, 1.0), uniform_partition(10), k);
  const MapSolution s = solve_map(qp);
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    Vector c = s.coef.values();
    for (Index j = 0; j < c.size(); ++j) c(j) = std::clamp(c(j) + 0.3 * normal(rng), -1.0, 1.0);
    for (std::size_t i = 0; i < qp.eq_indices.size(); ++i) c(qp.eq_indices[i]) = qp.eq_values[i];
    if (hn_norm_sq(c, *qp.gram) < s.objective * (1.0 - 1e-9)) ++failures;
  }
  return {"map_dominance", failures == 0 && s.status == QpStatus::Optimal, seed,
          "failures=" + std::to_string(failures)};
}

PropertyResult map_determinism(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const RandomProblem rp = random_problem(rng);
  const QpProblem qp = build_problem(rp.data, rp.specs, uniform_partition(rp.n_cells), rp.kernel);
  const Vector a = solve_map(qp).coef.values();
  const Vector b = solve_map(qp).coef.values();
  return {"map_determinism", a == b, seed, a == b ? "bitwise equal" : "runs differ"};
}

PropertyResult sampler_feasibility(std::uint64_t seed) {
  const Kernel k = Kernel::squared_exponential(1.0, 0.2);
  const DesignData data{{0.1, 0.4, 0.6, 0.9}, {-0.8, 0.6, 0.72, -0.4}};
  const QpProblem qp = build_problem(data, ConstraintSpec::bounds(-1.0, 0.8), uniform_partition(20), k);
  const ConditionalGaussian cg = condition_on_data(qp);
  double worst = 0.0;
  std::string methods;
  for (SamplerMethod m : {SamplerMethod::Rejection, SamplerMethod::Gibbs}) {
    SamplerOptions opt;
    opt.method = m;
    opt.burn_in = 100;
    const SampleBatch batch = sample(cg, qp.ineq, 50, seed, opt);
    for (Index i = 0; i < batch.size(); ++i) {
      worst = std::max(worst, qp.ineq.max_violation(batch.draws.row(i).transpose()));
    }
    methods += std::string(to_string(batch.method)) + " ";
  }
  return {"sampler_feasibility", worst <= 1e-9, seed, methods + "max_violation=" + fmt(worst)};
}

PropertyResult config_roundtrip(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExperimentConfig cfg;
  cfg.name = "roundtrip";
  cfg.kernel = Kernel::matern52(1.0 + u(rng), 0.1 + u(rng));
  cfg.data = {{0.1 * u(rng), 0.5, 0.7 + 0.2 * u(rng)}, {u(rng) - 0.5, 1.0 / 3.0, -u(rng)}};
  cfg.constraints = {ConstraintSpec::bounds(-1.0 - u(rng), 1.0 + u(rng)), ConstraintSpec::convex(),
                     ConstraintSpec::bounds(-kInf, 2.5)};
  cfg.levels = {5, 10, 40};
  cfg.seed = rng();
  const ExperimentConfig back = parse_config(serialize(cfg));
  return {"config_roundtrip", back == cfg, seed, back == cfg ? "identical" : "differs"};
}

}  // namespace

PropertyReport run_property_suite(std::uint64_t seed, Fault fault) {
  PropertyReport report;
  report.seed = seed;
  std::uint64_t i = 0;
  const auto guarded = [&](const char* name, auto&& run) {
    const std::uint64_t s = property_seed(seed, i++);
    try {
      report.results.push_back(run(s));
    } catch (const std::exception& e) {
      report.results.push_back({name, false, s, std::string("threw: ") + e.what()});
    }
  };
  guarded("block_lemma", [&](std::uint64_t s) { return block_lemma(s, fault); });
  guarded("norm_ladder_monotone", norm_ladder_monotone);
  guarded("uniform_bound", uniform_bound);
  guarded("h2_projection", h2_projection);
  guarded("partition_of_unity", partition_of_unity);
  guarded("map_kkt", map_kkt);
  guarded("map_dominance", map_dominance);
  guarded("map_determinism", map_determinism);
  guarded("sampler_feasibility", sampler_feasibility);
  guarded("config_roundtrip", config_roundtrip);
  return report;
}

}  // namespace cgp
