#include "grevf/experiment.hpp"

#include <chrono>
#include <filesystem>

#include "grevf/dataset_io.hpp"
#include "grevf/nystrom.hpp"
#include "grevf/variational.hpp"

namespace grevf {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const ExperimentError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentError(error_category(e), name, e.what());
  }
}

std::string resolve_path(const std::filesystem::path& base, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (base / p).string();
}

std::vector<DualElement> dirac_grid(const std::vector<double>& grid) {
  std::vector<DualElement> T;
  T.reserve(grid.size());
  for (double x : grid) T.push_back(DualElement::dirac(x));
  return T;
}

void append_rows(std::vector<PredictionRow>& rows, const std::vector<double>& grid,
                 const Vector& mean, const SymMatrix* cov, const std::string& method) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Index idx = static_cast<Eigen::Index>(i);
    rows.push_back(PredictionRow{grid[i], mean[idx],
                                 cov ? (*cov)(idx, idx) : 0.0, method});
  }
}

}  // namespace

QuadratureRule rule_for(const ExperimentConfig& cfg) {
  const Interval domain(cfg.domain_a, cfg.domain_b);
  const int nodes = cfg.resolved_nodes();
  if (cfg.has_features && cfg.features.family == FeatureSpec::Family::Bump) {
    std::vector<double> breakpoints;
    for (double c : cfg.features.centers) {
      breakpoints.push_back(c - cfg.features.half_width);
      breakpoints.push_back(c);
      breakpoints.push_back(c + cfg.features.half_width);
    }
    return composite_gauss_legendre_rule(domain, breakpoints, nodes);
  }
  return gauss_legendre_rule(domain, nodes);
}

FeatureSet build_features(const ExperimentConfig& cfg, const Kernel& kernel,
                          const QuadratureRule& rule) {
  if (!cfg.has_features) throw DomainError("no [features] section configured");
  const FeatureSpec& spec = cfg.features;
  switch (spec.family) {
    case FeatureSpec::Family::Dirac: {
      std::vector<DualElement> elements;
      for (double z : spec.locations) elements.push_back(DualElement::dirac(z));
      return FeatureSet(std::move(elements), kernel, rule);
    }
    case FeatureSpec::Family::Bump: {
      std::vector<DualElement> elements;
      for (double c : spec.centers) {
        elements.push_back(make_bump_interdomain(c, spec.half_width, rule.domain));
      }
      return FeatureSet(std::move(elements), kernel, rule);
    }
    case FeatureSpec::Family::Eigen:
      return make_eigen_features(kernel, rule, spec.count);
    case FeatureSpec::Family::CustomTable: {
      std::vector<DualElement> elements;
      for (const std::string& table : spec.tables) {
        elements.push_back(DualElement::inter_domain(
            load_feature_table(resolve_path(cfg.base_dir, table))));
      }
      return FeatureSet(std::move(elements), kernel, rule);
    }
  }
  throw DomainError("unreachable feature family");
}

Report run_experiment(const ExperimentConfig& cfg) {
  Report report;
  report.config_echo = config_to_json(cfg);

  const auto t_setup = Clock::now();
  const Interval domain(cfg.domain_a, cfg.domain_b);
  const Kernel kernel(cfg.kernel_family, cfg.lengthscale, cfg.signal_variance);
  const QuadratureRule rule = stage("domain", [&] { return rule_for(cfg); });

  const Dataset dataset = stage("data.path", [&] {
    return load_dataset(resolve_path(cfg.base_dir, cfg.dataset_path), domain,
                        cfg.noise_variance);
  });
  report.runtimes_ms["setup"] = ms_since(t_setup);

  const std::vector<double> grid = cfg.grid();
  const std::vector<DualElement> grid_T = dirac_grid(grid);

  const auto t_run = Clock::now();
  switch (cfg.mode) {
    case Mode::Exact: {
      const auto posterior =
          stage("kernel", [&] { return fit_exact(dataset, kernel, rule); });
      const auto [mean, cov] = predict_exact(posterior, grid_T);
      append_rows(report.predictions, grid, mean, &cov, "exact");
      report.results["log_marginal"] =
          stage("data", [&] { return log_marginal(dataset, kernel); });
      break;
    }
    case Mode::VariationalClosed: {
      const FeatureSet features =
          stage("features", [&] { return build_features(cfg, kernel, rule); });
      const FiniteGaussian q =
          stage("features", [&] { return optimal_params(features, dataset); });
      VariationalState state(features, q);
      report.results["elbo"] = elbo(state, dataset);
      report.results["log_marginal"] = log_marginal(dataset, kernel);
      report.results["kl_to_posterior"] = kl_to_posterior(state, dataset);
      const auto [mean, cov] = optimal_predict(features, dataset, grid_T);
      append_rows(report.predictions, grid, mean, &cov, "variational-closed");
      break;
    }
    case Mode::VariationalOpt:
    case Mode::ElboTrace: {
      const FeatureSet features =
          stage("features", [&] { return build_features(cfg, kernel, rule); });
      const OptimizationResult result = stage("optimizer", [&] {
        return optimize_elbo(features, dataset, cfg.optimizer);
      });
      report.elbo_trace = result.elbo_trace;
      report.results["elbo"] = result.elbo_trace.back();

      const FiniteGaussian q_star = optimal_params(features, dataset);
      VariationalState closed(features, q_star);
      report.results["elbo_closed_form"] = elbo(closed, dataset);
      report.results["elbo_gap_to_closed_form"] =
          report.results["elbo_closed_form"] - report.results["elbo"];
      report.results["log_marginal"] = log_marginal(dataset, kernel);

      const auto [mean, cov] = q_moments(result.state, grid_T);
      append_rows(report.predictions, grid, mean, &cov, "variational-opt");
      break;
    }
    case Mode::Nystrom: {
      const FeatureSet features =
          stage("features", [&] { return build_features(cfg, kernel, rule); });
      const NystromModel model = stage("nystrom.lambda", [&] {
        return krr_nystrom_fit(features, dataset, cfg.lambda);
      });
      const Vector mean = krr_predict(model, grid);
      append_rows(report.predictions, grid, mean, nullptr, "nystrom");
      report.results["krr_objective"] = model.objective;
      break;
    }
    case Mode::Equivalence: {
      const FeatureSet features =
          stage("features", [&] { return build_features(cfg, kernel, rule); });

      report.results["equivalence_gap"] = stage("features", [&] {
        return equivalence_gap(features, dataset, grid);
      });

      const auto posterior = fit_exact(dataset, kernel, rule);
      const auto [exact_mean, exact_cov] = predict_exact(posterior, grid_T);
      const auto [var_mean, var_cov] = optimal_predict(features, dataset, grid_T);

      double mean_gap = 0.0, var_gap = 0.0;
      for (Eigen::Index i = 0; i < exact_mean.size(); ++i) {
        mean_gap = std::max(mean_gap, std::abs(exact_mean[i] - var_mean[i]));
        var_gap = std::max(var_gap, std::abs(exact_cov(i, i) - var_cov(i, i)));
      }
      report.results["variational_exact_mean_gap"] = mean_gap;
      report.results["variational_exact_var_gap"] = var_gap;
      report.results["log_marginal"] = log_marginal(dataset, kernel);

      const double lambda = dataset.noise_variance / static_cast<double>(dataset.size());
      const NystromModel model = krr_nystrom_fit(features, dataset, lambda);
      const Vector krr_mean = krr_predict(model, grid);

      append_rows(report.predictions, grid, exact_mean, &exact_cov, "exact");
      append_rows(report.predictions, grid, var_mean, &var_cov, "variational-closed");
      append_rows(report.predictions, grid, krr_mean, nullptr, "nystrom");
      break;
    }
  }
  report.runtimes_ms["run"] = ms_since(t_run);

  for (const auto& [key, value] : report.results) {
    if (!std::isfinite(value)) {
      throw ExperimentError("numeric", "output",
                            "non-finite result scalar '" + key + "'");
    }
  }

  const auto t_write = Clock::now();
  const std::string report_path = resolve_path(cfg.base_dir, cfg.output_path);
  std::string predictions_path = cfg.predictions_path.empty()
                                     ? std::string()
                                     : resolve_path(cfg.base_dir, cfg.predictions_path);
  if (predictions_path.empty()) {
    std::filesystem::path p(report_path);
    p.replace_extension();
    predictions_path = p.string() + "_predictions.csv";
  }
  stage("output.path", [&] {
    const bool multi_method = cfg.mode == Mode::Equivalence;
    write_predictions_csv(report.predictions, predictions_path, multi_method);
    write_report_atomic(report, report_path);
    return 0;
  });
  report.runtimes_ms["write"] = ms_since(t_write);
  return report;
}

}  // namespace grevf
