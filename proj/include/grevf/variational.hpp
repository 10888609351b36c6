#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "grevf/exact_gre.hpp"
#include "grevf/features.hpp"

namespace grevf {

/// Gaussian on R^M stored as mean, assembled covariance and a lower-triangular
/// covariance factor (S S^T reproduces the covariance up to recorded jitter).
class FiniteGaussian {
public:
  /// Factors cov with the jitter schedule.
  FiniteGaussian(Vector mean, SymMatrix cov);

  /// Builds from a lower-triangular factor; cov is assembled as S S^T.
  static FiniteGaussian from_factor(Vector mean, Matrix lower);

  int dim() const noexcept { return static_cast<int>(mean_.size()); }
  const Vector& mean() const noexcept { return mean_; }
  const SymMatrix& cov() const noexcept { return cov_; }
  const Matrix& lower() const noexcept { return lower_; }
  double log_det_cov() const;

private:
  FiniteGaussian(Vector mean, SymMatrix cov, Matrix lower);

  Vector mean_;
  SymMatrix cov_;
  Matrix lower_;
};

/// KL( N(mu_q, S_q) || N(mu_p, S_p) ) in closed form. p must be positive
/// definite; a singular q sends the value toward +infinity through its
/// jittered factor.
double kl_finite_gaussians(const FiniteGaussian& q, const FiniteGaussian& p);

/// Variational family member: Q^L = N(mu, Sigma) over the feature values,
/// together with the feature covariance C_LL and its factor.
class VariationalState {
public:
  VariationalState(FeatureSet features, FiniteGaussian q);

  const FeatureSet& features() const noexcept { return features_; }
  const FiniteGaussian& q() const noexcept { return q_; }
  const SymMatrix& c_ll() const noexcept { return c_ll_; }
  const CholFactor& c_ll_factor() const noexcept { return c_ll_factor_; }

private:
  FeatureSet features_;
  FiniteGaussian q_;
  SymMatrix c_ll_;
  CholFactor c_ll_factor_;
};

/// Pushforward moments of Q under prediction functionals T:
///   mean(T)     = C_TL C_LL^{-1} mu
///   cov(T, T')  = C_TT' + C_TL C_LL^{-1} (Sigma - C_LL) C_LL^{-1} C_LT'
std::pair<Vector, SymMatrix> q_moments(const VariationalState& vs,
                                       const std::vector<DualElement>& T);

/// Evidence lower bound: per-point Gaussian log densities at the Q-predictive
/// means, minus the predictive-variance corrections, minus KL(Q^L, P^L).
double elbo(const VariationalState& vs, const Dataset& ds);

/// KL from Q to the exact posterior: log p(y) - ELBO. Nonnegative.
double kl_to_posterior(const VariationalState& vs, const Dataset& ds);

/// Closed-form optimum (zero prior mean):
///   mu*    = C_LL (sigma^2 C_LL + C_LD C_DL)^{-1} C_LD y
///   Sigma* = C_LL (C_LL + sigma^{-2} C_LD C_DL)^{-1} C_LL
FiniteGaussian optimal_params(const FeatureSet& fs, const Dataset& ds);

/// Predictive law of the optimal Q, evaluated directly:
///   mean(T) = C_TL (sigma^2 C_LL + C_LD C_DL)^{-1} C_LD y
///   cov(T,T') = C_TT' - C_TL C_LL^{-1} C_LT'
///             + C_TL (C_LL + sigma^{-2} C_LD C_DL)^{-1} C_LT'
std::pair<Vector, SymMatrix> optimal_predict(const FeatureSet& fs, const Dataset& ds,
                                             const std::vector<DualElement>& T);

/// Unconstrained optimizer coordinates for (mu, Sigma): Sigma = L L^T where
/// L is lower triangular with softplus-transformed diagonal.
struct VariationalParams {
  Vector mu;
  Matrix theta;
};

Matrix lower_from_params(const Matrix& theta);
Matrix params_from_lower(const Matrix& lower);

/// Analytic ELBO gradient in the (mu, theta) coordinates, summed over the
/// given observation indices with the given scale on the data term; the KL
/// term always enters once. Full gradient: all indices, scale 1.
VariationalParams elbo_gradient(const VariationalState& vs, const Dataset& ds,
                                std::span<const int> batch, double scale);

struct OptimizerConfig {
  double step = 0.05;
  int iterations = 1000;
  int batch = 0;  // 0 means full batch
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
};

struct OptimizationResult {
  VariationalState state;
  std::vector<double> elbo_trace;  // entry i = ELBO after i iterations
};

/// Gradient ascent from (0, C_LL). Full-batch steps that would lower the
/// ELBO are retried with a halved step; minibatch mode reshuffles a seeded
/// permutation each epoch and never rejects. Throws DivergenceError when the
/// ELBO becomes non-finite.
OptimizationResult optimize_elbo(const FeatureSet& fs, const Dataset& ds,
                                 const OptimizerConfig& cfg);

}  // namespace grevf
