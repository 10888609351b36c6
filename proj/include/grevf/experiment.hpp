#pragma once

#include <string>

#include "grevf/config.hpp"
#include "grevf/report.hpp"

namespace grevf {

/// Module error annotated with the experiment stage (config field) that
/// triggered it, plus the machine-readable category of the original error.
class ExperimentError : public std::runtime_error {
public:
  ExperimentError(std::string category, std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what),
        category_(std::move(category)),
        stage_(std::move(stage)) {}

  const std::string& category() const noexcept { return category_; }
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string category_;
  std::string stage_;
};

/// Runs the configured experiment, writes the report (atomically) and the
/// predictions CSV, and returns the report.
Report run_experiment(const ExperimentConfig& cfg);

/// Quadrature rule for a feature spec: plain Gauss-Legendre, except bump
/// features get panels split at every bump kink so the piecewise-linear
/// test functions integrate exactly.
QuadratureRule rule_for(const ExperimentConfig& cfg);

/// Materializes the configured feature set on the given rule.
FeatureSet build_features(const ExperimentConfig& cfg, const Kernel& kernel,
                          const QuadratureRule& rule);

}  // namespace grevf
