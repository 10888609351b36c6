#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "grevf/kernels.hpp"
#include "grevf/variational.hpp"

namespace grevf {

enum class Mode { Exact, VariationalClosed, VariationalOpt, Nystrom, Equivalence, ElboTrace };

Mode mode_from_string(const std::string& name);
std::string to_string(Mode mode);

struct FeatureSpec {
  enum class Family { Dirac, Bump, Eigen, CustomTable };

  Family family = Family::Dirac;
  int count = 0;
  std::vector<double> locations;           // dirac
  std::vector<double> centers;             // bump
  double half_width = 0.0;                 // bump
  std::vector<std::string> tables;         // custom-table CSV paths
};

FeatureSpec::Family feature_family_from_string(const std::string& name);
std::string to_string(FeatureSpec::Family family);

struct ExperimentConfig {
  Mode mode = Mode::Exact;

  KernelFamily kernel_family = KernelFamily::SquaredExponential;
  double lengthscale = 1.0;
  double signal_variance = 1.0;

  double domain_a = 0.0;
  double domain_b = 1.0;
  int quadrature_nodes = 0;  // 0 = default (possibly from GREVF_DEFAULT_NODES)

  bool has_features = false;
  FeatureSpec features;

  std::string dataset_path;
  double noise_variance = 0.0;

  double lambda = 0.0;  // nystrom mode

  OptimizerConfig optimizer;

  double grid_start = 0.0;
  double grid_stop = 0.0;
  int grid_count = 0;

  std::string output_path = "report.json";
  std::string predictions_path;  // empty = derive from output_path

  std::filesystem::path base_dir;  // directory of the config file

  /// Node count after applying the GREVF_DEFAULT_NODES fallback.
  int resolved_nodes() const;

  /// Prediction grid locations (uniform, inclusive endpoints).
  std::vector<double> grid() const;
};

/// Key = value sections; '#' and ';' start comments. Unknown keys are
/// rejected. Mode-required sections are validated here.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::filesystem::path& base_dir);

ExperimentConfig load_config(const std::string& path);

}  // namespace grevf
