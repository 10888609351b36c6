#include "grevf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace grevf {

Mode mode_from_string(const std::string& name) {
  if (name == "exact") return Mode::Exact;
  if (name == "variational-closed") return Mode::VariationalClosed;
  if (name == "variational-opt") return Mode::VariationalOpt;
  if (name == "nystrom") return Mode::Nystrom;
  if (name == "equivalence") return Mode::Equivalence;
  if (name == "elbo-trace") return Mode::ElboTrace;
  throw ParseError("unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Exact: return "exact";
    case Mode::VariationalClosed: return "variational-closed";
    case Mode::VariationalOpt: return "variational-opt";
    case Mode::Nystrom: return "nystrom";
    case Mode::Equivalence: return "equivalence";
    case Mode::ElboTrace: return "elbo-trace";
  }
  return "unknown";
}

FeatureSpec::Family feature_family_from_string(const std::string& name) {
  if (name == "dirac") return FeatureSpec::Family::Dirac;
  if (name == "bump") return FeatureSpec::Family::Bump;
  if (name == "eigen") return FeatureSpec::Family::Eigen;
  if (name == "custom-table") return FeatureSpec::Family::CustomTable;
  throw ParseError("unknown feature family '" + name + "'");
}

std::string to_string(FeatureSpec::Family family) {
  switch (family) {
    case FeatureSpec::Family::Dirac: return "dirac";
    case FeatureSpec::Family::Bump: return "bump";
    case FeatureSpec::Family::Eigen: return "eigen";
    case FeatureSpec::Family::CustomTable: return "custom-table";
  }
  return "unknown";
}

int ExperimentConfig::resolved_nodes() const {
  if (quadrature_nodes > 0) return quadrature_nodes;
  if (const char* env = std::getenv("GREVF_DEFAULT_NODES")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
      // fall through to the built-in default
    }
  }
  return kDefaultQuadratureNodes;
}

std::vector<double> ExperimentConfig::grid() const {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(grid_count));
  if (grid_count == 1) {
    g.push_back(grid_start);
    return g;
  }
  const double step = (grid_stop - grid_start) / (grid_count - 1);
  for (int i = 0; i < grid_count; ++i) g.push_back(grid_start + step * i);
  return g;
}

namespace {

struct RawConfig {
  // (section, key) -> (value, line)
  std::map<std::pair<std::string, std::string>, std::pair<std::string, long>> entries;
  std::set<std::pair<std::string, std::string>> consumed;

  bool has(const std::string& sec, const std::string& key) const {
    return entries.count({sec, key}) > 0;
  }

  std::string take(const std::string& sec, const std::string& key) {
    auto it = entries.find({sec, key});
    if (it == entries.end()) {
      throw ParseError("missing required key '" + key + "' in section [" + sec + "]");
    }
    consumed.insert(it->first);
    return it->second.first;
  }

  std::string take_or(const std::string& sec, const std::string& key,
                      const std::string& fallback) {
    if (!has(sec, key)) return fallback;
    return take(sec, key);
  }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value' at line " + std::to_string(line_no),
                       line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key at line " + std::to_string(line_no), line_no);
    if (!raw.entries.emplace(std::make_pair(section, key), std::make_pair(value, line_no)).second) {
      throw ParseError("duplicate key '" + key + "' in section [" + section + "]", line_no);
    }
  }
  return raw;
}

double parse_double(const std::string& value, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + value + "' as a number for " + what);
  }
}

long parse_long(const std::string& value, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + value + "' as an integer for " + what);
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream in(value);
  while (std::getline(in, current, ',')) {
    const std::string item = trim(current);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(parse_double(item, what));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir) {
  RawConfig raw = tokenize(text);
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;

  cfg.mode = mode_from_string(raw.take("", "mode"));

  cfg.kernel_family = kernel_family_from_string(raw.take("kernel", "family"));
  cfg.lengthscale = parse_double(raw.take("kernel", "lengthscale"), "kernel.lengthscale");
  cfg.signal_variance =
      parse_double(raw.take("kernel", "signal_variance"), "kernel.signal_variance");

  cfg.domain_a = parse_double(raw.take("domain", "a"), "domain.a");
  cfg.domain_b = parse_double(raw.take("domain", "b"), "domain.b");
  if (raw.has("domain", "nodes")) {
    cfg.quadrature_nodes = static_cast<int>(parse_long(raw.take("domain", "nodes"), "domain.nodes"));
    if (cfg.quadrature_nodes < 1) throw ParseError("domain.nodes must be >= 1");
  }
  if (!(cfg.domain_a < cfg.domain_b)) {
    throw ParseError("domain requires a < b");
  }

  const bool needs_features = cfg.mode != Mode::Exact;
  if (raw.has("features", "family")) {
    cfg.has_features = true;
    FeatureSpec& fspec = cfg.features;
    fspec.family = feature_family_from_string(raw.take("features", "family"));
    switch (fspec.family) {
      case FeatureSpec::Family::Dirac: {
        fspec.locations = parse_double_list(raw.take("features", "locations"),
                                            "features.locations");
        fspec.count = static_cast<int>(fspec.locations.size());
        break;
      }
      case FeatureSpec::Family::Bump: {
        fspec.centers = parse_double_list(raw.take("features", "centers"), "features.centers");
        fspec.half_width = parse_double(raw.take("features", "half_width"),
                                        "features.half_width");
        fspec.count = static_cast<int>(fspec.centers.size());
        break;
      }
      case FeatureSpec::Family::Eigen: {
        fspec.count = static_cast<int>(parse_long(raw.take("features", "count"),
                                                  "features.count"));
        break;
      }
      case FeatureSpec::Family::CustomTable: {
        fspec.tables = split_list(raw.take("features", "tables"));
        fspec.count = static_cast<int>(fspec.tables.size());
        break;
      }
    }
    if (fspec.count < 1) throw ParseError("feature spec must define at least one feature");
  } else if (needs_features) {
    throw ParseError("mode '" + to_string(cfg.mode) + "' requires a [features] section");
  }

  cfg.dataset_path = raw.take("data", "path");
  cfg.noise_variance = parse_double(raw.take("data", "noise_variance"),
                                    "data.noise_variance");
  if (!(cfg.noise_variance > 0.0)) throw ParseError("data.noise_variance must be > 0");

  if (cfg.mode == Mode::Nystrom) {
    cfg.lambda = parse_double(raw.take("nystrom", "lambda"), "nystrom.lambda");
    if (!(cfg.lambda > 0.0)) throw ParseError("nystrom.lambda must be > 0");
  }

  if (cfg.mode == Mode::VariationalOpt || cfg.mode == Mode::ElboTrace) {
    cfg.optimizer.step = parse_double(raw.take_or("optimizer", "step", "0.05"),
                                      "optimizer.step");
    cfg.optimizer.iterations = static_cast<int>(
        parse_long(raw.take_or("optimizer", "iterations", "1000"), "optimizer.iterations"));
    cfg.optimizer.batch = static_cast<int>(
        parse_long(raw.take_or("optimizer", "batch", "0"), "optimizer.batch"));
    cfg.optimizer.seed = static_cast<std::uint64_t>(
        parse_long(raw.take_or("optimizer", "seed", "0"), "optimizer.seed"));
    cfg.optimizer.tolerance = parse_double(raw.take_or("optimizer", "tolerance", "1e-4"),
                                           "optimizer.tolerance");
  }

  cfg.grid_start = parse_double(raw.take("prediction", "grid_start"), "prediction.grid_start");
  cfg.grid_stop = parse_double(raw.take("prediction", "grid_stop"), "prediction.grid_stop");
  cfg.grid_count = static_cast<int>(parse_long(raw.take("prediction", "grid_count"),
                                               "prediction.grid_count"));
  if (cfg.grid_count < 1) throw ParseError("prediction.grid_count must be >= 1");
  if (cfg.grid_count > 1 && !(cfg.grid_start < cfg.grid_stop)) {
    throw ParseError("prediction grid requires grid_start < grid_stop");
  }
  if (cfg.grid_start < cfg.domain_a || cfg.grid_stop > cfg.domain_b) {
    throw ParseError("prediction grid must lie inside the domain");
  }

  cfg.output_path = raw.take_or("output", "path", "report.json");
  cfg.predictions_path = raw.take_or("output", "predictions", "");

  for (const auto& [key, value] : raw.entries) {
    if (!raw.consumed.count(key)) {
      throw ParseError("unrecognized key '" + key.second + "' in section [" +
                           key.first + "]",
                       value.second);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::filesystem::path(path).parent_path());
}

}  // namespace grevf
