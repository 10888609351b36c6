#pragma once

#include <span>

#include "grevf/exact_gre.hpp"
#include "grevf/features.hpp"

namespace grevf {

/// Kernel ridge regression restricted to span{ C mu_m }, the realized basis
/// functions of a feature set.
struct NystromModel {
  FeatureSet features;
  double lambda;
  Vector alpha;
  double objective;  // J(alpha) at the fitted coefficients
};

/// Empirical ridge risk J(alpha) = (1/N) ||y - K_XM alpha||^2
///                                + lambda alpha^T K_MM alpha.
double krr_objective(const FeatureSet& fs, const Dataset& ds, double lambda,
                     const Vector& alpha);

/// Minimizes J: alpha = (K_MX K_XM + N lambda K_MM)^{-1} K_MX y, where
/// K_MX = C_LD and K_MM = C_LL.
NystromModel krr_nystrom_fit(const FeatureSet& fs, const Dataset& ds, double lambda);

/// f_hat(x) = sum_m alpha_m (C mu_m)(x).
Vector krr_predict(const NystromModel& model, std::span<const double> Xstar);

/// Max over the grid of |KRR prediction - optimal variational mean| with
/// lambda tied to sigma^2 / N. Small by the equivalence of the two
/// estimators; both routes are computed independently.
double equivalence_gap(const FeatureSet& fs, const Dataset& ds,
                       std::span<const double> grid);

}  // namespace grevf
