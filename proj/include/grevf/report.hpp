#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "grevf/config.hpp"
#include "grevf/dataset_io.hpp"

namespace grevf {

/// Everything one run produces: the resolved configuration, scalar results,
/// the prediction table and (when an optimizer ran) the ELBO trace.
struct Report {
  nlohmann::json config_echo;
  std::map<std::string, double> results;
  std::vector<PredictionRow> predictions;
  std::vector<double> elbo_trace;
  std::map<std::string, double> runtimes_ms;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Full-precision results plus a 6-significant-digit human summary.
nlohmann::json report_to_json(const Report& report);

/// Temp file in the target directory, then rename.
void write_report_atomic(const Report& report, const std::string& path);

/// Machine-readable category for an error (parse, domain, numeric, ...).
std::string error_category(const std::exception& e);

}  // namespace grevf
