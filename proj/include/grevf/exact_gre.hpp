#pragma once

#include <utility>
#include <vector>

#include "grevf/features.hpp"

namespace grevf {

/// Noisy pointwise observations y_n = F(x_n) + eps_n, eps_n ~ N(0, sigma^2).
struct Dataset {
  Interval domain;
  std::vector<double> X;
  Vector y;
  double noise_variance;

  Dataset(Interval domain, std::vector<double> X, Vector y, double noise_variance);

  int size() const noexcept { return static_cast<int>(X.size()); }
};

/// Precomputed posterior state: factor of C_DD + sigma^2 I and
/// alpha = (C_DD + sigma^2 I)^{-1} y.
struct ExactPosterior {
  Dataset dataset;
  Kernel kernel;
  QuadratureRule rule;
  CholFactor factor;
  Vector alpha;
};

/// Builds the data Gram, factors it with jitter and stores alpha.
ExactPosterior fit_exact(const Dataset& ds, const Kernel& k, const QuadratureRule& rule);

/// Convenience overload with the default Gauss-Legendre rule on ds.domain.
ExactPosterior fit_exact(const Dataset& ds, const Kernel& k);

/// Posterior mean and covariance of (T_1 F, ..., T_S F) given the data.
/// Accepts any dual elements, not just point evaluations.
std::pair<Vector, SymMatrix> predict_exact(const ExactPosterior& post,
                                           const std::vector<DualElement>& T);

/// log N(y | 0, C_DD + sigma^2 I).
double log_marginal(const Dataset& ds, const Kernel& k);

}  // namespace grevf
