#include "grevf/exact_gre.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace grevf {

Dataset::Dataset(Interval domain_, std::vector<double> X_, Vector y_,
                 double noise_variance_)
    : domain(domain_), X(std::move(X_)), y(std::move(y_)), noise_variance(noise_variance_) {
  if (X.empty()) throw DomainError("Dataset requires at least one observation");
  if (static_cast<Eigen::Index>(X.size()) != y.size()) {
    throw ShapeError("Dataset: " + std::to_string(X.size()) + " locations vs " +
                     std::to_string(y.size()) + " targets");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw DomainError("noise variance must be positive and finite");
  }
  for (double x : X) {
    if (!domain.contains(x)) {
      throw DomainError("observation location " + std::to_string(x) +
                        " outside domain [" + std::to_string(domain.a) + ", " +
                        std::to_string(domain.b) + "]");
    }
  }
  if (!y.allFinite()) throw NumericError("Dataset targets must be finite");
}

ExactPosterior fit_exact(const Dataset& ds, const Kernel& k, const QuadratureRule& rule) {
  const SymMatrix c_dd = gram_matrix(k, ds.X, ds.domain);
  Matrix shifted = c_dd.mat();
  shifted.diagonal().array() += ds.noise_variance;
  CholFactor factor = cholesky_jittered(SymMatrix(std::move(shifted)));
  Vector alpha = psd_solve(factor, ds.y);
  return ExactPosterior{ds, k, rule, std::move(factor), std::move(alpha)};
}

ExactPosterior fit_exact(const Dataset& ds, const Kernel& k) {
  return fit_exact(ds, k, gauss_legendre_rule(ds.domain, kDefaultQuadratureNodes));
}

std::pair<Vector, SymMatrix> predict_exact(const ExactPosterior& post,
                                           const std::vector<DualElement>& T) {
  const Eigen::Index S = static_cast<Eigen::Index>(T.size());
  const Eigen::Index N = post.dataset.size();
  if (S == 0) throw DomainError("predict_exact requires at least one functional");

  // C_TD: covariance of each prediction functional with the data Diracs
  Matrix c_td(S, N);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index n = 0; n < N; ++n) {
      c_td(s, n) = feature_cov(T[static_cast<std::size_t>(s)],
                               DualElement::dirac(post.dataset.X[static_cast<std::size_t>(n)]),
                               post.kernel, post.rule);
    }
  }

  Vector mean = c_td * post.alpha;

  Matrix c_tt(S, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index sp = 0; sp <= s; ++sp) {
      const double v = feature_cov(T[static_cast<std::size_t>(s)],
                                   T[static_cast<std::size_t>(sp)], post.kernel, post.rule);
      c_tt(s, sp) = v;
      c_tt(sp, s) = v;
    }
  }

  Matrix correction = c_td * psd_solve(post.factor, Matrix(c_td.transpose()));
  Matrix cov = c_tt - correction;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), SymMatrix(std::move(cov))};
}

double log_marginal(const Dataset& ds, const Kernel& k) {
  const auto post = fit_exact(ds, k);
  const double n = static_cast<double>(ds.size());
  return -0.5 * (ds.y.dot(post.alpha) + log_det(post.factor) +
                 n * std::log(2.0 * std::numbers::pi));
}

}  // namespace grevf
