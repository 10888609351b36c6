#include <doctest.h>

#include <cmath>
#include <numeric>

#include "grevf/nystrom.hpp"
#include "grevf/variational.hpp"
#include "test_helpers.hpp"

using namespace grevf;

TEST_SUITE_BEGIN("variational");

namespace {

const Interval kUnit{0.0, 1.0};

Dataset smooth_fixture(int n, double noise = 0.05) {
  std::vector<double> X;
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const double x = 0.04 + 0.92 * i / std::max(n - 1, 1);
    X.push_back(x);
    y[i] = std::sin(3.0 * x) + 0.3 * std::cos(11.0 * x);
  }
  return Dataset(kUnit, std::move(X), std::move(y), noise);
}

FeatureSet dirac_features(const std::vector<double>& Z, const Kernel& k,
                          const QuadratureRule& rule) {
  std::vector<DualElement> elements;
  for (double z : Z) elements.push_back(DualElement::dirac(z));
  return FeatureSet(std::move(elements), k, rule);
}

FeatureSet diracs_at_data(const Dataset& ds, const Kernel& k,
                          const QuadratureRule& rule) {
  return dirac_features(ds.X, k, rule);
}

double elbo_at_params(const FeatureSet& fs, const Dataset& ds, const Vector& mu,
                      const Matrix& theta) {
  return elbo(VariationalState(fs, FiniteGaussian::from_factor(mu, lower_from_params(theta))),
              ds);
}

// central finite differences of the ELBO in the optimizer coordinates
VariationalParams fd_gradient(const FeatureSet& fs, const Dataset& ds,
                              const Vector& mu, const Matrix& theta,
                              double h = 1e-5) {
  VariationalParams grad{Vector::Zero(mu.size()),
                         Matrix::Zero(theta.rows(), theta.cols())};
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    Vector up = mu, down = mu;
    up[i] += h;
    down[i] -= h;
    grad.mu[i] = (elbo_at_params(fs, ds, up, theta) -
                  elbo_at_params(fs, ds, down, theta)) /
                 (2.0 * h);
  }
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Matrix up = theta, down = theta;
      up(i, j) += h;
      down(i, j) -= h;
      grad.theta(i, j) = (elbo_at_params(fs, ds, mu, up) -
                          elbo_at_params(fs, ds, mu, down)) /
                         (2.0 * h);
    }
  }
  return grad;
}

VariationalState prior_state(const FeatureSet& fs) {
  const SymMatrix c_ll = feature_gram(fs);
  return VariationalState(fs, FiniteGaussian(Vector::Zero(c_ll.dim()), c_ll));
}

}  // namespace

TEST_CASE("q with prior moments pushes forward to the prior") {
  const Kernel k(KernelFamily::Matern32, 0.4, 1.2);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const auto fs = dirac_features({0.2, 0.5, 0.8}, k, rule);
  const auto vs = prior_state(fs);

  std::vector<DualElement> T{DualElement::dirac(0.33), DualElement::dirac(0.64)};
  const auto [mean, cov] = q_moments(vs, T);
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double prior = feature_cov(T[static_cast<std::size_t>(i)],
                                       T[static_cast<std::size_t>(j)], k, rule);
      CHECK(std::abs(cov(i, j) - prior) < 1e-9);
    }
  }
}

TEST_CASE("a pinned feature is reproduced with zero variance") {
  const Kernel k(KernelFamily::SquaredExponential, 1.0, 1.0);
  const auto rule = gauss_legendre_rule(kUnit, 32);
  const auto fs = dirac_features({0.5}, k, rule);
  const VariationalState vs(
      fs, FiniteGaussian(Vector::Ones(1), SymMatrix(Matrix::Zero(1, 1))));
  const auto [mean, cov] = q_moments(vs, {DualElement::dirac(0.5)});
  CHECK(mean[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(cov(0, 0)) < 1e-10);
}

TEST_CASE("evaluating q at the features returns its own parameters") {
  const Kernel k(KernelFamily::Matern52, 0.5, 1.0);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const std::vector<double> Z{0.15, 0.45, 0.85};
  const auto fs = dirac_features(Z, k, rule);

  Vector mu(3);
  mu << 0.4, -1.1, 0.7;
  const Matrix sigma = testing::random_spd(91, 3, 10.0);
  const VariationalState vs(fs, FiniteGaussian(mu, SymMatrix(sigma)));

  std::vector<DualElement> T;
  for (double z : Z) T.push_back(DualElement::dirac(z));
  const auto [mean, cov] = q_moments(vs, T);
  CHECK((mean - mu).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((cov.mat() - sigma).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("kl of identical gaussians is zero") {
  const Matrix sigma = testing::random_spd(17, 3, 30.0);
  const FiniteGaussian g(Vector::Ones(3), SymMatrix(sigma));
  CHECK(std::abs(kl_finite_gaussians(g, g)) < 1e-10);
}

TEST_CASE("scalar kl closed form") {
  const FiniteGaussian q(Vector::Ones(1), SymMatrix(Matrix::Identity(1, 1)));
  const FiniteGaussian p(Vector::Zero(1), SymMatrix(Matrix::Identity(1, 1)));
  CHECK(kl_finite_gaussians(q, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl matches a monte-carlo estimate within three standard errors") {
  const Matrix sq = testing::random_spd(41, 3, 8.0);
  const Matrix sp = testing::random_spd(42, 3, 5.0);
  Vector mq(3), mp(3);
  mq << 0.3, -0.2, 0.5;
  mp << -0.1, 0.4, 0.0;
  const FiniteGaussian q(mq, SymMatrix(sq));
  const FiniteGaussian p(mp, SymMatrix(sp));

  const double closed = kl_finite_gaussians(q, p);

  // MC estimate of E_q[log q - log p] with a deterministic sampler
  const Matrix sq_inv = sq.inverse();
  const Matrix sp_inv = sp.inverse();
  const double logdet_q = std::log(sq.determinant());
  const double logdet_p = std::log(sp.determinant());

  testing::NormalSampler sampler(20240817);
  const int samples = 1'000'000;
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector z(3);
    for (int i = 0; i < 3; ++i) z[i] = sampler();
    const Vector x = mq + q.lower() * z;
    const Vector dq = x - mq;
    const Vector dp = x - mp;
    const double log_ratio = 0.5 * (logdet_p - logdet_q) +
                             0.5 * (dp.dot(sp_inv * dp) - dq.dot(sq_inv * dq));
    acc += log_ratio;
    acc2 += log_ratio * log_ratio;
  }
  const double mc = acc / samples;
  const double variance = (acc2 / samples - mc * mc) / samples;
  const double stderr_mc = std::sqrt(variance);
  CHECK(std::abs(closed - mc) <= 3.0 * stderr_mc);
}

TEST_CASE("kl rejects dimension mismatch") {
  const FiniteGaussian a(Vector::Zero(2), SymMatrix(Matrix::Identity(2, 2)));
  const FiniteGaussian b(Vector::Zero(3), SymMatrix(Matrix::Identity(3, 3)));
  CHECK_THROWS_AS(kl_finite_gaussians(a, b), ShapeError);
}

TEST_CASE("elbo is tight when the features are the data diracs") {
  const Kernel k(KernelFamily::SquaredExponential, 0.35, 1.0);
  const auto ds = smooth_fixture(6);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const auto fs = diracs_at_data(ds, k, rule);

  // q set to the exact posterior law of the feature values
  const auto post = fit_exact(ds, k, rule);
  std::vector<DualElement> at_data;
  for (double x : ds.X) at_data.push_back(DualElement::dirac(x));
  const auto [post_mean, post_cov] = predict_exact(post, at_data);

  const VariationalState vs(fs, FiniteGaussian(post_mean, post_cov));
  CHECK(std::abs(elbo(vs, ds) - log_marginal(ds, k)) < 1e-6);
  CHECK(std::abs(kl_to_posterior(vs, ds)) < 1e-6);
}

TEST_CASE("elbo never exceeds the log marginal") {
  const Kernel k(KernelFamily::Matern32, 0.45, 1.0);
  const auto ds = smooth_fixture(9);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const double evidence = log_marginal(ds, k);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto Z = testing::uniform_samples(seed, 3, 0.05, 0.95);
    const auto fs = dirac_features(Z, k, rule);
    const auto mu_vals = testing::uniform_samples(seed + 10, 3, -1.0, 1.0);
    Vector mu(3);
    for (int i = 0; i < 3; ++i) mu[i] = mu_vals[static_cast<std::size_t>(i)];
    const Matrix sigma = testing::random_spd(seed + 20, 3, 12.0);
    const VariationalState vs(fs, FiniteGaussian(mu, SymMatrix(sigma)));
    CHECK(elbo(vs, ds) <= evidence + 1e-8);
    CHECK(kl_to_posterior(vs, ds) >= -1e-8);
  }
}

TEST_CASE("elbo matches a term-by-term reimplementation of the bound") {
  const Kernel k(KernelFamily::Matern12, 0.5, 1.3);
  const auto ds = smooth_fixture(7, 0.09);
  const auto rule = gauss_legendre_rule(kUnit, 96);
  const auto fs = dirac_features({0.2, 0.6, 0.9}, k, rule);
  const double s2 = ds.noise_variance;

  // independent route: dense inverses, explicit per-point sum
  //   sum_n [ log N(y_n | a_n^T mu, s2)
  //           - (k(x_n,x_n) + a_n^T (Sigma - C_LL) a_n) / (2 s2) ]
  //   - KL( N(mu, Sigma), N(0, C_LL) )
  const SymMatrix c_ll = feature_gram(fs);
  const Matrix c_ld = feature_data_cross(fs, ds.X);
  const Matrix c_ll_inv = c_ll.mat().inverse();

  auto oracle = [&](const Vector& mu, const Matrix& sigma) {
    double total = 0.0;
    for (int n = 0; n < ds.size(); ++n) {
      const Vector a_n = c_ll_inv * c_ld.col(n);
      const double pred = a_n.dot(mu);
      const double prior_var = kernel_eval(k, ds.X[static_cast<std::size_t>(n)],
                                           ds.X[static_cast<std::size_t>(n)]);
      const double var_corr = prior_var + a_n.dot((sigma - c_ll.mat()) * a_n);
      total += -0.5 * std::log(2.0 * std::numbers::pi * s2) -
               (ds.y[n] - pred) * (ds.y[n] - pred) / (2.0 * s2) -
               var_corr / (2.0 * s2);
    }
    const double kl =
        0.5 * ((c_ll_inv * sigma).trace() + mu.dot(c_ll_inv * mu) - 3.0 +
               std::log(c_ll.mat().determinant()) - std::log(sigma.determinant()));
    return total - kl;
  };

  // prior state: Sigma - C_LL = 0, so the per-point correction is the full
  // prior variance k(x_n, x_n) and the KL vanishes
  const auto vs0 = prior_state(fs);
  CHECK(elbo(vs0, ds) == doctest::Approx(oracle(Vector::Zero(3), c_ll.mat()))
                             .epsilon(1e-9));

  // generic state
  Vector mu(3);
  mu << 0.5, -0.3, 0.9;
  const Matrix sigma = testing::random_spd(73, 3, 9.0);
  const VariationalState vs(fs, FiniteGaussian(mu, SymMatrix(sigma)));
  CHECK(elbo(vs, ds) == doctest::Approx(oracle(mu, sigma)).epsilon(1e-9));
}

TEST_CASE("optimal parameters recover the exact posterior for data diracs") {
  const Kernel k(KernelFamily::SquaredExponential, 0.3, 1.0);
  const auto ds = smooth_fixture(8);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const auto fs = diracs_at_data(ds, k, rule);

  const FiniteGaussian opt = optimal_params(fs, ds);
  const auto post = fit_exact(ds, k, rule);
  std::vector<DualElement> at_data;
  for (double x : ds.X) at_data.push_back(DualElement::dirac(x));
  const auto [post_mean, post_cov] = predict_exact(post, at_data);

  CHECK((opt.mean() - post_mean).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((opt.cov().mat() - post_cov.mat()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("zero targets give a zero optimal mean") {
  const Kernel k(KernelFamily::Matern52, 0.4, 1.0);
  Dataset ds(kUnit, {0.2, 0.5, 0.8}, Vector::Zero(3), 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.3, 0.7}, k, rule);
  const FiniteGaussian opt = optimal_params(fs, ds);
  CHECK(opt.mean().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar fixture closed form: mu* = k y / (k + s2)") {
  const Kernel k(KernelFamily::SquaredExponential, 1.0, 1.0);
  Dataset ds(kUnit, {0.0}, Vector::Ones(1), 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 16);
  const auto fs = dirac_features({0.0}, k, rule);
  const FiniteGaussian opt = optimal_params(fs, ds);
  CHECK(opt.mean()[0] == doctest::Approx(1.0 / 1.1).epsilon(1e-12));
  // Sigma* = k (k + s2/1)^{-1} k with N = 1: 1 * (1 + 10)^{-1} * 1
  CHECK(opt.cov()(0, 0) == doctest::Approx(1.0 / 11.0).epsilon(1e-10));
}

TEST_CASE("optimal_predict agrees with q_moments at the optimum") {
  const Kernel k(KernelFamily::Matern32, 0.5, 1.1);
  const auto ds = smooth_fixture(10, 0.08);
  const auto rule = gauss_legendre_rule(kUnit, 64);

  for (std::uint64_t seed : {5u, 6u}) {
    const auto Z = testing::uniform_samples(seed, 4, 0.05, 0.95);
    const auto fs = dirac_features(Z, k, rule);

    std::vector<DualElement> T;
    for (double x : {0.1, 0.37, 0.62, 0.88}) T.push_back(DualElement::dirac(x));

    const auto [direct_mean, direct_cov] = optimal_predict(fs, ds, T);
    const VariationalState vs(fs, optimal_params(fs, ds));
    const auto [via_mean, via_cov] = q_moments(vs, T);

    CHECK((direct_mean - via_mean).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((direct_cov.mat() - via_cov.mat()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("optimal prediction with all data diracs equals the exact posterior") {
  const Kernel k(KernelFamily::SquaredExponential, 0.3, 1.0);
  const auto ds = smooth_fixture(12);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const auto fs = diracs_at_data(ds, k, rule);

  std::vector<DualElement> T;
  for (double x : testing::uniform_samples(77, 15)) T.push_back(DualElement::dirac(x));

  const auto [var_mean, var_cov] = optimal_predict(fs, ds, T);
  const auto [ex_mean, ex_cov] = predict_exact(fit_exact(ds, k, rule), T);
  CHECK((var_mean - ex_mean).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((var_cov.mat() - ex_cov.mat()).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("predictions far from data and features fall back to the prior") {
  const Kernel k(KernelFamily::SquaredExponential, 0.02, 1.0);
  Vector y(3);
  y << 1.0, -0.5, 0.8;
  Dataset ds(kUnit, {0.05, 0.1, 0.15}, y, 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 64);
  const auto fs = dirac_features({0.06, 0.12}, k, rule);

  const auto [mean, cov] = optimal_predict(fs, ds, {DualElement::dirac(0.9)});
  CHECK(std::abs(mean[0]) < 1e-3);
  CHECK(std::abs(cov(0, 0) - kernel_eval(k, 0.9, 0.9)) < 1e-3);
}

TEST_CASE("analytic gradient matches finite differences on random fixtures") {
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const KernelFamily families[] = {KernelFamily::SquaredExponential,
                                   KernelFamily::Matern12, KernelFamily::Matern32,
                                   KernelFamily::Matern52,
                                   KernelFamily::SquaredExponential};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Kernel k(families[seed], 0.3 + 0.1 * static_cast<double>(seed), 1.0);
    const auto ds = smooth_fixture(6 + static_cast<int>(seed), 0.07);
    const auto Z = testing::uniform_samples(300 + seed, 3, 0.05, 0.95);
    const auto fs = dirac_features(Z, k, rule);

    const auto mu_vals = testing::uniform_samples(400 + seed, 3, -0.8, 0.8);
    Vector mu(3);
    for (int i = 0; i < 3; ++i) mu[i] = mu_vals[static_cast<std::size_t>(i)];
    const Matrix sigma = testing::random_spd(500 + seed, 3, 6.0);
    const FiniteGaussian q(mu, SymMatrix(sigma));
    const Matrix theta = params_from_lower(q.lower());

    const VariationalState vs(fs, q);
    std::vector<int> all(static_cast<std::size_t>(ds.size()));
    std::iota(all.begin(), all.end(), 0);
    const VariationalParams analytic = elbo_gradient(vs, ds, all, 1.0);
    const VariationalParams fd = fd_gradient(fs, ds, mu, theta);

    const double scale = std::max({fd.mu.cwiseAbs().maxCoeff(),
                                   fd.theta.cwiseAbs().maxCoeff(), 1.0});
    CHECK((analytic.mu - fd.mu).cwiseAbs().maxCoeff() <= 1e-5 * scale);
    CHECK((analytic.theta - fd.theta).cwiseAbs().maxCoeff() <= 1e-5 * scale);
  }
}

TEST_CASE("finite-difference gradient vanishes at the closed-form optimum") {
  const Kernel k(KernelFamily::Matern32, 0.4, 1.0);
  const auto ds = smooth_fixture(8);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.2, 0.5, 0.8}, k, rule);

  const FiniteGaussian opt = optimal_params(fs, ds);
  const Matrix theta = params_from_lower(opt.lower());
  const VariationalParams fd = fd_gradient(fs, ds, opt.mean(), theta);
  CHECK(fd.mu.cwiseAbs().maxCoeff() <= 1e-5);
  CHECK(fd.theta.cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("perturbing the optimal mean strictly increases the posterior kl") {
  const Kernel k(KernelFamily::SquaredExponential, 0.4, 1.0);
  const auto ds = smooth_fixture(7);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.25, 0.75}, k, rule);

  const FiniteGaussian opt = optimal_params(fs, ds);
  const VariationalState at_opt(fs, opt);
  const double kl_opt = kl_to_posterior(at_opt, ds);

  Vector bumped = opt.mean();
  bumped[0] += 1.0;
  const VariationalState moved(fs, FiniteGaussian(bumped, opt.cov()));
  CHECK(kl_to_posterior(moved, ds) > kl_opt + 1e-6);
}

TEST_CASE("adding a feature never lowers the optimal elbo") {
  const Kernel k(KernelFamily::Matern52, 0.35, 1.0);
  const auto ds = smooth_fixture(12, 0.06);
  const auto rule = gauss_legendre_rule(kUnit, 64);

  std::vector<double> Z{0.3, 0.7};
  double previous = -HUGE_VAL;
  for (double extra : {0.5, 0.12, 0.9}) {
    const auto fs = dirac_features(Z, k, rule);
    const VariationalState vs(fs, optimal_params(fs, ds));
    const double value = elbo(vs, ds);
    CHECK(value >= previous - 1e-8);
    previous = value;
    Z.push_back(extra);
  }
}

TEST_CASE("full-batch ascent reaches the closed-form optimum") {
  const Kernel k(KernelFamily::Matern32, 0.45, 1.0);
  const auto ds = smooth_fixture(20, 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.15, 0.5, 0.85}, k, rule);

  OptimizerConfig cfg;
  cfg.step = 0.05;
  cfg.iterations = 2000;
  cfg.batch = 0;

  const OptimizationResult result = optimize_elbo(fs, ds, cfg);
  const VariationalState closed(fs, optimal_params(fs, ds));
  const double target = elbo(closed, ds);
  CHECK(std::abs(result.elbo_trace.back() - target) <= 1e-4);

  // the trace is monotone, so the kl to the posterior is nonincreasing
  for (std::size_t i = 1; i < result.elbo_trace.size(); ++i) {
    CHECK(result.elbo_trace[i] >= result.elbo_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("zero iterations return the initial state unchanged") {
  const Kernel k(KernelFamily::SquaredExponential, 0.5, 1.0);
  const auto ds = smooth_fixture(5);
  const auto rule = gauss_legendre_rule(kUnit, 32);
  const auto fs = dirac_features({0.4, 0.6}, k, rule);

  OptimizerConfig cfg;
  cfg.iterations = 0;

  const OptimizationResult result = optimize_elbo(fs, ds, cfg);
  REQUIRE(result.elbo_trace.size() == 1);
  CHECK(result.state.q().mean().cwiseAbs().maxCoeff() == 0.0);
  const SymMatrix c_ll = feature_gram(fs);
  CHECK((result.state.q().cov().mat() - c_ll.mat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one epoch of minibatch gradients averages to the full gradient") {
  const Kernel k(KernelFamily::SquaredExponential, 0.4, 1.0);
  const auto ds = smooth_fixture(20, 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.2, 0.5, 0.8}, k, rule);

  const auto mu_vals = testing::uniform_samples(9, 3, -0.5, 0.5);
  Vector mu(3);
  for (int i = 0; i < 3; ++i) mu[i] = mu_vals[static_cast<std::size_t>(i)];
  const Matrix sigma = testing::random_spd(10, 3, 5.0);
  const VariationalState vs(fs, FiniteGaussian(mu, SymMatrix(sigma)));

  std::vector<int> all(20);
  std::iota(all.begin(), all.end(), 0);
  const VariationalParams full = elbo_gradient(vs, ds, all, 1.0);

  const int batch_size = 5;
  Vector avg_mu = Vector::Zero(3);
  Matrix avg_theta = Matrix::Zero(3, 3);
  for (int start = 0; start < 20; start += batch_size) {
    const std::span<const int> batch(all.data() + start, batch_size);
    const VariationalParams g = elbo_gradient(vs, ds, batch, 20.0 / batch_size);
    avg_mu += g.mu;
    avg_theta += g.theta;
  }
  avg_mu /= 4.0;
  avg_theta /= 4.0;

  CHECK((avg_mu - full.mu).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((avg_theta - full.theta).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("minibatch optimization is reproducible and improves the elbo") {
  const Kernel k(KernelFamily::Matern32, 0.4, 1.0);
  const auto ds = smooth_fixture(20, 0.1);
  const auto rule = gauss_legendre_rule(kUnit, 48);
  const auto fs = dirac_features({0.3, 0.7}, k, rule);

  OptimizerConfig cfg;
  cfg.step = 0.01;
  cfg.iterations = 200;
  cfg.batch = 5;
  cfg.seed = 1234;

  const OptimizationResult a = optimize_elbo(fs, ds, cfg);
  const OptimizationResult b = optimize_elbo(fs, ds, cfg);
  REQUIRE(a.elbo_trace.size() == b.elbo_trace.size());
  for (std::size_t i = 0; i < a.elbo_trace.size(); ++i) {
    CHECK(a.elbo_trace[i] == b.elbo_trace[i]);
  }
  CHECK(a.elbo_trace.back() > a.elbo_trace.front());
}

TEST_CASE("parameterization round-trips through softplus") {
  const Matrix sigma = testing::random_spd(61, 4, 20.0);
  const FiniteGaussian g(Vector::Zero(4), SymMatrix(sigma));
  const Matrix theta = params_from_lower(g.lower());
  const Matrix back = lower_from_params(theta);
  CHECK((back - g.lower()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_SUITE_END();
