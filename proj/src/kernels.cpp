#include "grevf/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace grevf {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "se" || name == "squared-exponential") return KernelFamily::SquaredExponential;
  if (name == "matern12") return KernelFamily::Matern12;
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "matern52") return KernelFamily::Matern52;
  throw DomainError("unknown kernel family '" + name + "'");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
  }
  return "unknown";
}

Kernel::Kernel(KernelFamily family, double lengthscale, double signal_variance)
    : family_(family), lengthscale_(lengthscale), signal_variance_(signal_variance) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw DomainError("kernel lengthscale must be positive and finite");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw DomainError("kernel signal variance must be positive and finite");
  }
}

double kernel_eval(const Kernel& k, double x, double xp) {
  if (!std::isfinite(x) || !std::isfinite(xp)) {
    throw NumericError("kernel_eval: non-finite input");
  }
  const double r = std::abs(x - xp) / k.lengthscale();
  const double s2 = k.signal_variance();
  switch (k.family()) {
    case KernelFamily::SquaredExponential:
      return s2 * std::exp(-0.5 * r * r);
    case KernelFamily::Matern12:
      return s2 * std::exp(-r);
    case KernelFamily::Matern32: {
      const double t = std::sqrt(3.0) * r;
      return s2 * (1.0 + t) * std::exp(-t);
    }
    case KernelFamily::Matern52: {
      const double t = std::sqrt(5.0) * r;
      return s2 * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  throw NumericError("kernel_eval: unreachable family");
}

namespace {

void check_in_domain(std::span<const double> X, const Interval& domain,
                     const char* what) {
  for (double x : X) {
    if (!domain.contains(x)) {
      throw DomainError(std::string(what) + ": location " + std::to_string(x) +
                        " outside domain [" + std::to_string(domain.a) + ", " +
                        std::to_string(domain.b) + "]");
    }
  }
}

}  // namespace

Matrix gram_matrix(const Kernel& k, std::span<const double> X,
                   std::span<const double> Xp, const Interval& domain) {
  check_in_domain(X, domain, "gram_matrix");
  check_in_domain(Xp, domain, "gram_matrix");
  Matrix G(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(Xp.size()));
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      G(i, j) = kernel_eval(k, X[static_cast<std::size_t>(i)],
                            Xp[static_cast<std::size_t>(j)]);
    }
  }
  return G;
}

SymMatrix gram_matrix(const Kernel& k, std::span<const double> X,
                      const Interval& domain) {
  return SymMatrix(gram_matrix(k, X, X, domain));
}

double integral_operator_apply(const Kernel& k, const RealFn& f,
                               const QuadratureRule& rule, double x) {
  if (!rule.domain.contains(x)) {
    throw DomainError("integral_operator_apply: evaluation point outside domain");
  }
  return integrate([&](double t) { return kernel_eval(k, x, t) * f(t); }, rule);
}

struct EigenSystem::Data {
  Kernel kernel;
  QuadratureRule rule;
  Vector eigenvalues;
  Matrix node_values;  // p x rank
  Matrix scaled;       // p x rank, column m = (w .* e_m) / lambda_m

  Data(Kernel k, QuadratureRule r, Vector evals, Matrix nodevals)
      : kernel(std::move(k)),
        rule(std::move(r)),
        eigenvalues(std::move(evals)),
        node_values(std::move(nodevals)) {
    scaled = node_values;
    for (Eigen::Index m = 0; m < eigenvalues.size(); ++m) {
      scaled.col(m) = (rule.weights.array() * node_values.col(m).array()) / eigenvalues(m);
    }
  }
};

EigenSystem::EigenSystem(Kernel kernel, QuadratureRule rule, Vector eigenvalues,
                         Matrix node_values) {
  if (node_values.rows() != rule.nodes.size() ||
      node_values.cols() != eigenvalues.size()) {
    throw ShapeError("EigenSystem: node_values must be p x rank");
  }
  data_ = std::make_shared<const Data>(std::move(kernel), std::move(rule),
                                       std::move(eigenvalues), std::move(node_values));
}

int EigenSystem::rank() const noexcept { return static_cast<int>(data_->eigenvalues.size()); }
double EigenSystem::eigenvalue(int m) const { return data_->eigenvalues(m); }
const Vector& EigenSystem::eigenvalues() const noexcept { return data_->eigenvalues; }
const QuadratureRule& EigenSystem::rule() const noexcept { return data_->rule; }
const Kernel& EigenSystem::kernel() const noexcept { return data_->kernel; }

double EigenSystem::eval(int m, double x) const {
  const Data& d = *data_;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.rule.size(); ++i) {
    acc += kernel_eval(d.kernel, x, d.rule.nodes[i]) * d.scaled(i, m);
  }
  return acc;
}

RealFn EigenSystem::eigenfunction(int m) const {
  if (m < 0 || m >= rank()) {
    throw CapacityError("eigenfunction index " + std::to_string(m) +
                        " out of range for rank " + std::to_string(rank()));
  }
  auto data = data_;
  return [data, m](double x) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data->rule.size(); ++i) {
      acc += kernel_eval(data->kernel, x, data->rule.nodes[i]) * data->scaled(i, m);
    }
    return acc;
  };
}

EigenSystem nystrom_eigensystem(const Kernel& k, const QuadratureRule& rule, int M) {
  const Eigen::Index p = rule.size();
  if (M < 1) throw CapacityError("nystrom_eigensystem requires M >= 1");
  if (M > p) {
    throw CapacityError("nystrom_eigensystem: M = " + std::to_string(M) +
                        " exceeds node count p = " + std::to_string(p));
  }

  const Vector sqrt_w = rule.weights.array().sqrt();
  Matrix B(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = sqrt_w[i] * kernel_eval(k, rule.nodes[i], rule.nodes[j]) * sqrt_w[j];
      B(i, j) = v;
      B(j, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(B);
  if (solver.info() != Eigen::Success) {
    throw RankError("nystrom_eigensystem: eigendecomposition failed");
  }
  // Eigen sorts ascending; we want descending.
  const Vector all_vals = solver.eigenvalues().reverse();
  const double lambda1 = all_vals(0);
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) {
    throw RankError("nystrom_eigensystem: degenerate spectrum, lambda_1 = " +
                    std::to_string(lambda1));
  }

  int rank = 0;
  while (rank < M && all_vals(rank) >= 1e-12 * lambda1) ++rank;
  if (rank == 0) throw RankError("nystrom_eigensystem: no eigenvalue above the floor");

  Vector eigenvalues = all_vals.head(rank);
  Matrix node_values(p, rank);
  for (int m = 0; m < rank; ++m) {
    Vector v = solver.eigenvectors().col(p - 1 - m);
    // sign convention: largest-magnitude component positive
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    node_values.col(m) = v.array() / sqrt_w.array();
  }
  return EigenSystem(k, rule, std::move(eigenvalues), std::move(node_values));
}

}  // namespace grevf
