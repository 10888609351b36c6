#include "grevf/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace grevf {

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["kernel"] = {{"family", to_string(cfg.kernel_family)},
                 {"lengthscale", cfg.lengthscale},
                 {"signal_variance", cfg.signal_variance}};
  j["domain"] = {{"a", cfg.domain_a}, {"b", cfg.domain_b}, {"nodes", cfg.resolved_nodes()}};
  if (cfg.has_features) {
    nlohmann::json f;
    f["family"] = to_string(cfg.features.family);
    f["count"] = cfg.features.count;
    if (!cfg.features.locations.empty()) f["locations"] = cfg.features.locations;
    if (!cfg.features.centers.empty()) {
      f["centers"] = cfg.features.centers;
      f["half_width"] = cfg.features.half_width;
    }
    if (!cfg.features.tables.empty()) f["tables"] = cfg.features.tables;
    j["features"] = f;
  }
  j["data"] = {{"path", cfg.dataset_path}, {"noise_variance", cfg.noise_variance}};
  if (cfg.mode == Mode::Nystrom) j["nystrom"] = {{"lambda", cfg.lambda}};
  if (cfg.mode == Mode::VariationalOpt || cfg.mode == Mode::ElboTrace) {
    j["optimizer"] = {{"step", cfg.optimizer.step},
                      {"iterations", cfg.optimizer.iterations},
                      {"batch", cfg.optimizer.batch},
                      {"seed", cfg.optimizer.seed},
                      {"tolerance", cfg.optimizer.tolerance}};
  }
  j["prediction"] = {{"grid_start", cfg.grid_start},
                     {"grid_stop", cfg.grid_stop},
                     {"grid_count", cfg.grid_count}};
  return j;
}

namespace {

std::string six_digits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["config"] = report.config_echo;
  j["results"] = report.results;

  nlohmann::json summary;
  for (const auto& [key, value] : report.results) summary[key] = six_digits(value);
  j["summary"] = summary;

  nlohmann::json predictions = nlohmann::json::array();
  for (const auto& row : report.predictions) {
    predictions.push_back({{"x", row.x},
                           {"mean", row.mean},
                           {"variance", row.variance},
                           {"method", row.method}});
  }
  j["predictions"] = predictions;

  if (!report.elbo_trace.empty()) {
    nlohmann::json trace = nlohmann::json::array();
    for (std::size_t i = 0; i < report.elbo_trace.size(); ++i) {
      trace.push_back({{"iteration", i}, {"elbo", report.elbo_trace[i]}});
    }
    j["trace"] = trace;
  }

  j["runtimes_ms"] = report.runtimes_ms;
  return j;
}

void write_report_atomic(const Report& report, const std::string& path) {
  const std::filesystem::path target(path);
  std::filesystem::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const std::filesystem::path tmp = dir / (target.filename().string() + ".tmp");

  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move report into place at '" + path + "': " + ec.message());
  }
}

std::string error_category(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const NotPositiveDefiniteError*>(&e)) return "not-positive-definite";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity";
  if (dynamic_cast<const RankError*>(&e)) return "rank";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  return "internal";
}

}  // namespace grevf
