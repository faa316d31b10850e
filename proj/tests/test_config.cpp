#include "cgp/config.hpp"

#include <doctest.h>

#include <filesystem>

using namespace cgp;

namespace {

const char* kMinimal = R"(schema_version: 1
data: {points: [0.5], values: [1.0]}
)";

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.yaml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.name == "experiment");
  CHECK(cfg.kernel.family() == KernelFamily::SquaredExponential);
  CHECK(cfg.levels == std::vector<int>{50});
  CHECK(cfg.sampling_level() == 50);
  CHECK(cfg.constraints.empty());
  CHECK(cfg.seed == 42);
}

TEST_CASE("shipped configs load and round-trip") {
  for (const char* name : {"fig1.yaml", "fig2.yaml", "fig3.yaml"}) {
    CAPTURE(name);
    const ExperimentConfig cfg = load_config(std::filesystem::path(CGP_CONFIG_DIR) / name);
    CHECK_NOTHROW(cfg.validate());
    const ExperimentConfig back = parse_config(serialize(cfg));
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(config_hash(cfg).size() == 16);
  }
  const ExperimentConfig fig1 = load_config(std::filesystem::path(CGP_CONFIG_DIR) / "fig1.yaml");
  CHECK(fig1.sampling_level() == 50);
  CHECK(fig1.levels == std::vector<int>{25, 50, 100, 200});
  REQUIRE(fig1.constraints.size() == 1);
  CHECK(fig1.constraints[0] == ConstraintSpec::bounds(-25, 20));
}

TEST_CASE("round-trip keeps awkward doubles and infinite bounds") {
  ExperimentConfig cfg;
  cfg.name = "awkward";
  cfg.kernel = Kernel::matern52(0.1, 1.0 / 3.0);
  cfg.data = {{0.1, 1.0 / 7.0}, {1e-300, -2.5e17}};
  cfg.constraints = {ConstraintSpec::bounds(0, kInf), ConstraintSpec::non_decreasing(), ConstraintSpec::convex()};
  cfg.levels = {7, 14, 42};
  cfg.seed = 18446744073709551615ULL;
  const ExperimentConfig back = parse_config(serialize(cfg));
  CHECK(back == cfg);
}

TEST_CASE("hash changes with the content") {
  ExperimentConfig a = parse_config(kMinimal);
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 43;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("constraint forms") {
  const ExperimentConfig list = parse_config(std::string(kMinimal) + R"(constraints:
  - {type: bounds, a: -1}
  - {type: monotone}
  - {type: convex}
)");
  REQUIRE(list.constraints.size() == 3);
  CHECK(list.constraints[0].lower == -1);
  CHECK(std::isinf(list.constraints[0].upper));
  CHECK(list.constraints[1].family == ConstraintFamily::NonDecreasing);
  CHECK(list.constraints[2].family == ConstraintFamily::Convex);

  const ExperimentConfig single = parse_config(std::string(kMinimal) + "constraints: {type: non_decreasing}\n");
  CHECK(single.constraints == ConstraintSet{ConstraintSpec::non_decreasing()});
  const ExperimentConfig none = parse_config(std::string(kMinimal) + "constraints: {type: none}\n");
  CHECK(none.constraints.size() <= 1);
}

TEST_CASE("errors carry the line") {
  CHECK(config_error("schema_version: 1\ndata: {points: [0.5], values: [1]}\nkernel:\n  family: squared_exponential\n  thetta: 0.2\n")
            .find("t.yaml:5: unknown key 'thetta' in kernel") != std::string::npos);
  CHECK(config_error("schema_version: 2\ndata: {points: [0.5], values: [1]}\n").find("t.yaml:1:") !=
        std::string::npos);
  CHECK(config_error("data: {points: [0.5], values: [1]}\n").find("schema_version") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "levels: [50, 25]\n").find("t.yaml:3:") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "levels: [25, 40]\n").find("divide") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "levels: [25, 25]\n").find("divide") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "constraints: {type: wiggly}\n").find("t.yaml:3:") !=
        std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "n_samples: 0\n").find("n_samples") != std::string::npos);
  CHECK(config_error("schema_version: 1\ndata: {points: [0.5, 0.5], values: [1, 2]}\n").find("t.yaml:2:") !=
        std::string::npos);
  CHECK(config_error("schema_version: 1\ndata: [1, 2\n").find("t.yaml:") != std::string::npos);
  CHECK(config_error("schema_version: 1\nkernel: {family: cubic}\ndata: {points: [0.5], values: [1]}\n")
            .find("t.yaml:2:") != std::string::npos);
}

TEST_CASE("missing file") {
  try {
    load_config("/nonexistent/cfg.yaml");
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}
