#include "grevf/nystrom.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "grevf/variational.hpp"

namespace grevf {

double krr_objective(const FeatureSet& fs, const Dataset& ds, double lambda,
                     const Vector& alpha) {
  const Matrix k_mx = feature_data_cross(fs, ds.X);
  const SymMatrix k_mm = feature_gram(fs);
  const Vector residual = ds.y - k_mx.transpose() * alpha;
  return residual.squaredNorm() / static_cast<double>(ds.size()) +
         lambda * alpha.dot(k_mm.mat() * alpha);
}

NystromModel krr_nystrom_fit(const FeatureSet& fs, const Dataset& ds, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("krr_nystrom_fit requires lambda > 0, got " +
                      std::to_string(lambda));
  }
  const Matrix k_mx = feature_data_cross(fs, ds.X);
  const SymMatrix k_mm = feature_gram(fs);
  const double n = static_cast<double>(ds.size());

  Matrix system = k_mx * k_mx.transpose() + n * lambda * k_mm.mat();
  const CholFactor factor = cholesky_jittered(SymMatrix(std::move(system)));
  Vector alpha = psd_solve(factor, Vector(k_mx * ds.y));
  if (!alpha.allFinite()) throw NumericError("krr_nystrom_fit produced non-finite coefficients");

  const double objective = krr_objective(fs, ds, lambda, alpha);
  return NystromModel{fs, lambda, std::move(alpha), objective};
}

Vector krr_predict(const NystromModel& model, std::span<const double> Xstar) {
  Vector out(static_cast<Eigen::Index>(Xstar.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double x = Xstar[static_cast<std::size_t>(i)];
    out[i] = feature_point_cov(model.features, x).dot(model.alpha);
  }
  return out;
}

double equivalence_gap(const FeatureSet& fs, const Dataset& ds,
                       std::span<const double> grid) {
  if (grid.empty()) throw DomainError("equivalence_gap requires a nonempty grid");
  const double lambda = ds.noise_variance / static_cast<double>(ds.size());
  const NystromModel model = krr_nystrom_fit(fs, ds, lambda);
  const Vector krr = krr_predict(model, grid);

  std::vector<DualElement> T;
  T.reserve(grid.size());
  for (double x : grid) T.push_back(DualElement::dirac(x));
  const auto [variational_mean, cov] = optimal_predict(fs, ds, T);

  return (krr - variational_mean).cwiseAbs().maxCoeff();
}

}  // namespace grevf
