#include "cgp/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace cgp {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    std::ostringstream os;
    os << source_;
    if (node.IsDefined() && node.Mark().line >= 0) os << ':' << node.Mark().line + 1;
    os << ": " << message;
    throw Error(ErrorKind::Config, os.str());
  }

  void only_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const char* where) const {
    if (!map.IsMap()) fail(map, std::string(where) + " must be a table");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, const char* what) const {
    if (!node.IsScalar()) fail(node, std::string(what) + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, std::string("cannot read ") + what + " from '" + node.Scalar() + "'");
    }
  }

  std::vector<double> doubles(const YAML::Node& node, const char* what) const {
    if (!node.IsSequence()) fail(node, std::string(what) + " must be a list");
    std::vector<double> out;
    for (const auto& v : node) out.push_back(scalar<double>(v, what));
    return out;
  }

 private:
  std::string source_;
};

ConstraintSpec read_constraint(const Reader& r, const YAML::Node& node) {
  r.only_keys(node, {"type", "a", "b"}, "constraint");
  if (!node["type"]) r.fail(node, "constraint needs a 'type'");
  const auto type = r.scalar<std::string>(node["type"], "constraint type");
  if (type == "bounds") {
    const double a = node["a"] ? r.scalar<double>(node["a"], "a") : -kInf;
    const double b = node["b"] ? r.scalar<double>(node["b"], "b") : kInf;
    if (!(a < b)) r.fail(node, "bounds need a < b");
    return ConstraintSpec::bounds(a, b);
  }
  if (node["a"] || node["b"]) r.fail(node, "'a'/'b' only apply to bounds");
  if (type == "monotone" || type == "non_decreasing") return ConstraintSpec::non_decreasing();
  if (type == "convex") return ConstraintSpec::convex();
  if (type == "none") return ConstraintSpec::none();
  r.fail(node["type"], "unknown constraint type '" + type + "'");
}

int positive_int(const Reader& r, const YAML::Node& node, const char* what) {
  const int v = r.scalar<int>(node, what);
  if (v < 1) r.fail(node, std::string(what) + " must be >= 1");
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) throw Error(ErrorKind::Config, "unsupported schema_version");
  if (levels.empty()) throw Error(ErrorKind::Config, "levels must not be empty");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 1) throw Error(ErrorKind::Config, "levels must be >= 1");
    if (k > 0 && (levels[k] <= levels[k - 1] || levels[k] % levels[k - 1] != 0)) {
      throw Error(ErrorKind::Config, "each level must be smaller than and divide the next");
    }
  }
  if (sample_cells < 0 || n_samples < 1 || grid < 2) throw Error(ErrorKind::Config, "invalid sampling settings");
  try {
    data.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("data: ") + e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Config, std::string(source) + ':' + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  r.only_keys(root,
              {"schema_version", "name", "kernel", "data", "constraints", "levels", "sample_cells", "n_samples",
               "seed", "grid", "output"},
              "config");

  ExperimentConfig cfg;
  if (!root["schema_version"]) r.fail(root, "missing schema_version");
  cfg.schema_version = r.scalar<int>(root["schema_version"], "schema_version");
  if (cfg.schema_version != kSchemaVersion) {
    r.fail(root["schema_version"], "unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  if (root["name"]) cfg.name = r.scalar<std::string>(root["name"], "name");

  if (const auto k = root["kernel"]) {
    r.only_keys(k, {"family", "sigma", "theta"}, "kernel");
    const auto family = k["family"] ? r.scalar<std::string>(k["family"], "family") : "squared_exponential";
    const double sigma = k["sigma"] ? r.scalar<double>(k["sigma"], "sigma") : 1.0;
    const double theta = k["theta"] ? r.scalar<double>(k["theta"], "theta") : 1.0;
    try {
      cfg.kernel = Kernel(parse_kernel_family(family), sigma, theta);
    } catch (const Error& e) {
      r.fail(k, e.what());
    }
  }

  const auto d = root["data"];
  if (!d) r.fail(root, "missing data");
  r.only_keys(d, {"points", "values"}, "data");
  if (!d["points"] || !d["values"]) r.fail(d, "data needs points and values");
  cfg.data.points = r.doubles(d["points"], "points");
  cfg.data.values = r.doubles(d["values"], "values");
  try {
    cfg.data.validate();
  } catch (const Error& e) {
    r.fail(d, e.what());
  }

  if (const auto c = root["constraints"]) {
    if (c.IsSequence()) {
      for (const auto& item : c) cfg.constraints.push_back(read_constraint(r, item));
    } else {
      cfg.constraints.push_back(read_constraint(r, c));
    }
  }

  if (const auto l = root["levels"]) {
    cfg.levels.clear();
    if (l.IsScalar()) {
      cfg.levels.push_back(positive_int(r, l, "levels"));
    } else if (l.IsSequence()) {
      for (const auto& v : l) cfg.levels.push_back(positive_int(r, v, "levels"));
    } else {
      r.fail(l, "levels must be an integer or a list");
    }
    if (cfg.levels.empty()) r.fail(l, "levels must not be empty");
    for (std::size_t k = 1; k < cfg.levels.size(); ++k) {
      if (cfg.levels[k] <= cfg.levels[k - 1] || cfg.levels[k] % cfg.levels[k - 1] != 0) {
        r.fail(l, "each level must be smaller than and divide the next");
      }
    }
  }
  if (root["sample_cells"]) cfg.sample_cells = positive_int(r, root["sample_cells"], "sample_cells");
  if (root["n_samples"]) cfg.n_samples = positive_int(r, root["n_samples"], "n_samples");
  if (root["seed"]) cfg.seed = r.scalar<std::uint64_t>(root["seed"], "seed");
  if (root["grid"]) {
    cfg.grid = r.scalar<int>(root["grid"], "grid");
    if (cfg.grid < 2) r.fail(root["grid"], "grid must be >= 2");
  }
  if (root["output"]) cfg.output = r.scalar<std::string>(root["output"], "output");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string serialize(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << cfg.schema_version;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << std::string(to_string(cfg.kernel.family()));
  out << YAML::Key << "sigma" << YAML::Value << cfg.kernel.sigma();
  out << YAML::Key << "theta" << YAML::Value << cfg.kernel.theta();
  out << YAML::EndMap;
  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "points" << YAML::Value << YAML::Flow << cfg.data.points;
  out << YAML::Key << "values" << YAML::Value << YAML::Flow << cfg.data.values;
  out << YAML::EndMap;
  out << YAML::Key << "constraints" << YAML::Value << YAML::BeginSeq;
  for (const auto& spec : cfg.constraints) {
    out << YAML::Flow << YAML::BeginMap;
    switch (spec.family) {
      case ConstraintFamily::None: out << YAML::Key << "type" << YAML::Value << "none"; break;
      case ConstraintFamily::NonDecreasing: out << YAML::Key << "type" << YAML::Value << "monotone"; break;
      case ConstraintFamily::Convex: out << YAML::Key << "type" << YAML::Value << "convex"; break;
      case ConstraintFamily::Bounds:
        out << YAML::Key << "type" << YAML::Value << "bounds";
        if (std::isfinite(spec.lower)) out << YAML::Key << "a" << YAML::Value << spec.lower;
        if (std::isfinite(spec.upper)) out << YAML::Key << "b" << YAML::Value << spec.upper;
        break;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "levels" << YAML::Value << YAML::Flow << cfg.levels;
  if (cfg.sample_cells > 0) out << YAML::Key << "sample_cells" << YAML::Value << cfg.sample_cells;
  out << YAML::Key << "n_samples" << YAML::Value << cfg.n_samples;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "grid" << YAML::Value << cfg.grid;
  out << YAML::Key << "output" << YAML::Value << cfg.output;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : serialize(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace cgp
