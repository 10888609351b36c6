#include "grevf/variational.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace grevf {

FiniteGaussian::FiniteGaussian(Vector mean, SymMatrix cov, Matrix lower)
    : mean_(std::move(mean)), cov_(std::move(cov)), lower_(std::move(lower)) {
  if (mean_.size() != cov_.dim() || mean_.size() != lower_.rows()) {
    throw ShapeError("FiniteGaussian: mean/cov/factor dimensions disagree");
  }
}

FiniteGaussian::FiniteGaussian(Vector mean, SymMatrix cov)
    : FiniteGaussian(std::move(mean), cov, cholesky_jittered(cov).lower) {}

FiniteGaussian FiniteGaussian::from_factor(Vector mean, Matrix lower) {
  if (lower.rows() != lower.cols()) {
    throw ShapeError("FiniteGaussian::from_factor requires a square factor");
  }
  Matrix assembled = lower * lower.transpose();
  return FiniteGaussian(std::move(mean), SymMatrix(std::move(assembled)), std::move(lower));
}

double FiniteGaussian::log_det_cov() const {
  return 2.0 * lower_.diagonal().array().abs().log().sum();
}

double kl_finite_gaussians(const FiniteGaussian& q, const FiniteGaussian& p) {
  if (q.dim() != p.dim()) {
    throw ShapeError("kl_finite_gaussians: dim " + std::to_string(q.dim()) +
                     " vs " + std::to_string(p.dim()));
  }
  const CholFactor pf{p.lower(), 0.0};
  const double trace_term = psd_solve(pf, q.cov().mat()).trace();
  const Vector d = p.mean() - q.mean();
  const double quad = d.dot(psd_solve(pf, d));
  const double m = static_cast<double>(q.dim());
  return 0.5 * (trace_term + quad - m + p.log_det_cov() - q.log_det_cov());
}

VariationalState::VariationalState(FeatureSet features, FiniteGaussian q)
    : features_(std::move(features)),
      q_(std::move(q)),
      c_ll_(feature_gram(features_)),
      c_ll_factor_(cholesky_jittered(c_ll_)) {
  if (q_.dim() != features_.size()) {
    throw ShapeError("VariationalState: q dim " + std::to_string(q_.dim()) +
                     " vs feature count " + std::to_string(features_.size()));
  }
}

namespace {

// C_LT for arbitrary prediction functionals, using the cached node values
// for Dirac columns.
Matrix cross_cov_features(const FeatureSet& fs, const std::vector<DualElement>& T) {
  const Eigen::Index M = fs.size();
  const Eigen::Index S = static_cast<Eigen::Index>(T.size());
  Matrix c_lt(M, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    const DualElement& t = T[static_cast<std::size_t>(s)];
    if (t.is_dirac()) {
      c_lt.col(s) = feature_point_cov(fs, t.location());
    } else {
      for (Eigen::Index m = 0; m < M; ++m) {
        c_lt(m, s) = feature_cov(fs.element(static_cast<int>(m)), t, fs.kernel(), fs.rule());
      }
    }
  }
  return c_lt;
}

Matrix prior_cov_of(const std::vector<DualElement>& T, const Kernel& k,
                    const QuadratureRule& rule) {
  const Eigen::Index S = static_cast<Eigen::Index>(T.size());
  Matrix c_tt(S, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index sp = 0; sp <= s; ++sp) {
      const double v = feature_cov(T[static_cast<std::size_t>(s)],
                                   T[static_cast<std::size_t>(sp)], k, rule);
      c_tt(s, sp) = v;
      c_tt(sp, s) = v;
    }
  }
  return c_tt;
}

double gaussian_log_density(double y, double mean, double variance) {
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

}  // namespace

std::pair<Vector, SymMatrix> q_moments(const VariationalState& vs,
                                       const std::vector<DualElement>& T) {
  if (T.empty()) throw DomainError("q_moments requires at least one functional");
  const FeatureSet& fs = vs.features();
  const Matrix c_lt = cross_cov_features(fs, T);
  const Matrix a = psd_solve(vs.c_ll_factor(), c_lt);  // C_LL^{-1} C_LT
  Vector mean = a.transpose() * vs.q().mean();
  Matrix cov = prior_cov_of(T, fs.kernel(), fs.rule()) +
               a.transpose() * (vs.q().cov().mat() - vs.c_ll().mat()) * a;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), SymMatrix(std::move(cov))};
}

namespace {

// Shared pieces of the ELBO and its gradient for one (features, data) pair.
struct ElboWorkspace {
  Matrix a;            // C_LL^{-1} C_LD, M x N
  Vector prior_diag;   // k(x_n, x_n)
  Matrix p_inv;        // C_LL^{-1}
  double logdet_cll;
  double sigma2;
  Vector y;

  ElboWorkspace(const VariationalState& vs, const Dataset& ds) {
    const FeatureSet& fs = vs.features();
    const Matrix c_ld = feature_data_cross(fs, ds.X);
    a = psd_solve(vs.c_ll_factor(), c_ld);
    const Eigen::Index n = ds.y.size();
    prior_diag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prior_diag[i] = kernel_eval(fs.kernel(), ds.X[static_cast<std::size_t>(i)],
                                  ds.X[static_cast<std::size_t>(i)]);
    }
    p_inv = psd_solve(vs.c_ll_factor(), Matrix(Matrix::Identity(fs.size(), fs.size())));
    logdet_cll = log_det(vs.c_ll_factor());
    sigma2 = ds.noise_variance;
    y = ds.y;
  }

  double evaluate(const FiniteGaussian& q, const SymMatrix& c_ll) const {
    const Vector& mu = q.mean();
    const Matrix delta = q.cov().mat() - c_ll.mat();
    const Vector pred_mean = a.transpose() * mu;
    double data_term = 0.0;
    for (Eigen::Index n = 0; n < y.size(); ++n) {
      const Vector an = a.col(n);
      const double var_corr = prior_diag[n] + an.dot(delta * an);
      data_term += gaussian_log_density(y[n], pred_mean[n], sigma2) -
                   var_corr / (2.0 * sigma2);
    }
    const double m = static_cast<double>(q.dim());
    const double kl = 0.5 * ((p_inv * q.cov().mat()).trace() + mu.dot(p_inv * mu) -
                             m + logdet_cll - q.log_det_cov());
    return data_term - kl;
  }

  // Gradient w.r.t. (mu, theta); the data sum runs over `batch` scaled by
  // `scale`, the KL term enters once.
  VariationalParams gradient(const FiniteGaussian& q, const Matrix& theta,
                             std::span<const int> batch, double scale) const {
    const Vector& mu = q.mean();
    const Matrix& lower = q.lower();
    const Eigen::Index m = mu.size();

    Vector grad_mu = Vector::Zero(m);
    Matrix grad_sigma = Matrix::Zero(m, m);  // d/dSigma as a symmetric matrix
    for (int n : batch) {
      const Vector an = a.col(n);
      grad_mu += scale * ((y[n] - an.dot(mu)) / sigma2) * an;
      grad_sigma -= (scale / (2.0 * sigma2)) * (an * an.transpose());
    }

    // KL gradients: d/dmu = C_LL^{-1} mu, d/dSigma = (C_LL^{-1} - Sigma^{-1})/2
    grad_mu -= p_inv * mu;
    const CholFactor qf{lower, 0.0};
    const Matrix sigma_inv = psd_solve(qf, Matrix(Matrix::Identity(m, m)));
    grad_sigma -= 0.5 * (p_inv - sigma_inv);

    // chain rule through Sigma = L L^T, then the softplus diagonal
    Matrix grad_l = 2.0 * grad_sigma * lower;
    Matrix grad_theta = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) grad_theta(i, j) = grad_l(i, j);
      const double t = theta(i, i);
      const double sig = 1.0 / (1.0 + std::exp(-t));
      grad_theta(i, i) = grad_l(i, i) * sig;
    }
    return VariationalParams{std::move(grad_mu), std::move(grad_theta)};
  }
};

}  // namespace

double elbo(const VariationalState& vs, const Dataset& ds) {
  const ElboWorkspace ws(vs, ds);
  return ws.evaluate(vs.q(), vs.c_ll());
}

double kl_to_posterior(const VariationalState& vs, const Dataset& ds) {
  return log_marginal(ds, vs.features().kernel()) - elbo(vs, ds);
}

namespace {

struct CollapsedSolution {
  CholFactor c_ll_factor;
  Matrix psi;              // L^{-1} C_LD
  CholFactor inner_mean;   // factor of sigma^2 I + Psi Psi^T
  CholFactor inner_cov;    // factor of I + Psi Psi^T / sigma^2
  Vector w;                // (sigma^2 I + Psi Psi^T)^{-1} Psi y
};

CollapsedSolution collapse(const FeatureSet& fs, const Dataset& ds) {
  const SymMatrix c_ll = feature_gram(fs);
  CholFactor c_ll_factor = cholesky_jittered(c_ll);
  const Matrix c_ld = feature_data_cross(fs, ds.X);
  Matrix psi = c_ll_factor.lower.triangularView<Eigen::Lower>().solve(c_ld);

  const Matrix outer = psi * psi.transpose();
  Matrix inner_mean_mat = outer;
  inner_mean_mat.diagonal().array() += ds.noise_variance;
  Matrix inner_cov_mat = outer / ds.noise_variance;
  inner_cov_mat.diagonal().array() += 1.0;

  CholFactor inner_mean = cholesky_jittered(SymMatrix(std::move(inner_mean_mat)));
  CholFactor inner_cov = cholesky_jittered(SymMatrix(std::move(inner_cov_mat)));
  Vector w = psd_solve(inner_mean, Vector(psi * ds.y));
  return CollapsedSolution{std::move(c_ll_factor), std::move(psi),
                           std::move(inner_mean), std::move(inner_cov), std::move(w)};
}

// Lower-triangular factor S with S S^T = B B^T, positive diagonal, via the
// QR decomposition of B^T.
Matrix lq_lower_factor(const Matrix& b) {
  Eigen::HouseholderQR<Matrix> qr(b.transpose());
  Matrix r = qr.matrixQR().topRows(b.rows()).triangularView<Eigen::Upper>();
  Matrix s = r.transpose();
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    if (s(j, j) < 0.0) s.col(j) = -s.col(j);
  }
  return s;
}

}  // namespace

FiniteGaussian optimal_params(const FeatureSet& fs, const Dataset& ds) {
  const CollapsedSolution cs = collapse(fs, ds);
  const Matrix& lower = cs.c_ll_factor.lower;

  // mu* = C_LL (sigma^2 C_LL + C_LD C_DL)^{-1} C_LD y = L w
  Vector mu = lower.triangularView<Eigen::Lower>() * cs.w;

  // Sigma* = C_LL (C_LL + sigma^{-2} C_LD C_DL)^{-1} C_LL = L R^{-1} L^T with
  // R = I + Psi Psi^T / sigma^2; factored through B = L G^{-T}, R = G G^T.
  Matrix b = cs.inner_cov.lower.triangularView<Eigen::Lower>()
                 .solve(Matrix(lower.transpose()))
                 .transpose();
  Matrix s = lq_lower_factor(b);
  return FiniteGaussian::from_factor(std::move(mu), std::move(s));
}

std::pair<Vector, SymMatrix> optimal_predict(const FeatureSet& fs, const Dataset& ds,
                                             const std::vector<DualElement>& T) {
  if (T.empty()) throw DomainError("optimal_predict requires at least one functional");
  const CollapsedSolution cs = collapse(fs, ds);

  const Matrix c_lt = cross_cov_features(fs, T);
  const Matrix at = cs.c_ll_factor.lower.triangularView<Eigen::Lower>().solve(c_lt);

  Vector mean = at.transpose() * cs.w;

  const Matrix c_tt = prior_cov_of(T, fs.kernel(), fs.rule());
  Matrix cov = c_tt - at.transpose() * at +
               at.transpose() * psd_solve(cs.inner_cov, at);
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), SymMatrix(std::move(cov))};
}

Matrix lower_from_params(const Matrix& theta) {
  const Eigen::Index m = theta.rows();
  Matrix lower = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) lower(i, j) = theta(i, j);
    const double t = theta(i, i);
    lower(i, i) = t > 30.0 ? t : std::log1p(std::exp(t));
  }
  return lower;
}

Matrix params_from_lower(const Matrix& lower) {
  const Eigen::Index m = lower.rows();
  Matrix theta = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) theta(i, j) = lower(i, j);
    const double d = lower(i, i);
    if (!(d > 0.0)) throw DomainError("params_from_lower: diagonal must be positive");
    theta(i, i) = d > 30.0 ? d : std::log(std::expm1(d));
  }
  return theta;
}

VariationalParams elbo_gradient(const VariationalState& vs, const Dataset& ds,
                                std::span<const int> batch, double scale) {
  const ElboWorkspace ws(vs, ds);
  const Matrix theta = params_from_lower(vs.q().lower());
  return ws.gradient(vs.q(), theta, batch, scale);
}

OptimizationResult optimize_elbo(const FeatureSet& fs, const Dataset& ds,
                                 const OptimizerConfig& cfg) {
  if (cfg.batch < 0 || cfg.batch > ds.size()) {
    throw DomainError("optimizer batch size must lie in [0, N]");
  }
  if (cfg.iterations < 0) throw DomainError("optimizer iteration count must be >= 0");
  if (!(cfg.step > 0.0)) throw DomainError("optimizer step must be positive");

  // start at (0, C_LL): the prior pushforward
  const SymMatrix c_ll = feature_gram(fs);
  const CholFactor start_factor = cholesky_jittered(c_ll);
  const Eigen::Index m = c_ll.dim();

  Vector mu = Vector::Zero(m);
  Matrix theta = params_from_lower(start_factor.lower);

  VariationalState state(fs, FiniteGaussian::from_factor(mu, lower_from_params(theta)));
  const ElboWorkspace ws(state, ds);

  auto pack = [&](const Vector& mu_v, const Matrix& theta_m) {
    return FiniteGaussian::from_factor(mu_v, lower_from_params(theta_m));
  };

  const bool full_batch = cfg.batch == 0 || cfg.batch == ds.size();
  std::vector<int> all_indices(static_cast<std::size_t>(ds.size()));
  std::iota(all_indices.begin(), all_indices.end(), 0);

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order = all_indices;
  std::size_t epoch_pos = order.size();  // forces an initial shuffle

  FiniteGaussian q = pack(mu, theta);
  double current = ws.evaluate(q, c_ll);
  if (!std::isfinite(current)) throw DivergenceError("non-finite initial ELBO", 0);

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  trace.push_back(current);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::span<const int> batch;
    double scale = 1.0;
    if (full_batch) {
      batch = all_indices;
    } else {
      if (epoch_pos + static_cast<std::size_t>(cfg.batch) > order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        epoch_pos = 0;
      }
      batch = std::span<const int>(order).subspan(epoch_pos,
                                                  static_cast<std::size_t>(cfg.batch));
      epoch_pos += static_cast<std::size_t>(cfg.batch);
      scale = static_cast<double>(ds.size()) / static_cast<double>(cfg.batch);
    }

    const VariationalParams grad = ws.gradient(q, theta, batch, scale);

    if (full_batch) {
      // reject steps that lower the ELBO, halving until one is accepted
      double step = cfg.step;
      bool moved = false;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Vector mu_try = mu + step * grad.mu;
        Matrix theta_try = theta + step * grad.theta;
        FiniteGaussian q_try = pack(mu_try, theta_try);
        const double value = ws.evaluate(q_try, c_ll);
        if (!std::isfinite(value)) {
          throw DivergenceError("non-finite ELBO at iteration " + std::to_string(iter),
                                iter);
        }
        if (value >= current - 1e-12 * std::abs(current)) {
          mu = std::move(mu_try);
          theta = std::move(theta_try);
          q = std::move(q_try);
          current = value;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) {
        // gradient too steep for any tried step; keep the current iterate
      }
    } else {
      mu += cfg.step * grad.mu;
      theta += cfg.step * grad.theta;
      q = pack(mu, theta);
      current = ws.evaluate(q, c_ll);
      if (!std::isfinite(current)) {
        throw DivergenceError("non-finite ELBO at iteration " + std::to_string(iter),
                              iter);
      }
    }
    trace.push_back(current);
  }

  return OptimizationResult{VariationalState(fs, std::move(q)), std::move(trace)};
}

}  // namespace grevf
