#pragma once

#include <memory>
#include <span>
#include <string>

#include "grevf/numerics.hpp"

namespace grevf {

enum class KernelFamily { SquaredExponential, Matern12, Matern32, Matern52 };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

/// Stationary kernel k(x,x') = sigma_f^2 * rho(|x-x'| / lengthscale).
class Kernel {
public:
  Kernel(KernelFamily family, double lengthscale, double signal_variance);

  KernelFamily family() const noexcept { return family_; }
  double lengthscale() const noexcept { return lengthscale_; }
  double signal_variance() const noexcept { return signal_variance_; }

private:
  KernelFamily family_;
  double lengthscale_;
  double signal_variance_;
};

double kernel_eval(const Kernel& k, double x, double xp);

/// Cross-Gram matrix with entry (i,j) = k(X_i, Xp_j). All locations must lie
/// inside the domain.
Matrix gram_matrix(const Kernel& k, std::span<const double> X,
                   std::span<const double> Xp, const Interval& domain);

/// Gram of one location set, returned with the symmetry invariant enforced.
SymMatrix gram_matrix(const Kernel& k, std::span<const double> X,
                      const Interval& domain);

/// (T_k f)(x) = int k(x,t) f(t) dt, discretized on the rule's nodes.
double integral_operator_apply(const Kernel& k, const RealFn& f,
                               const QuadratureRule& rule, double x);

/// Leading eigenpairs of T_k from the weighted node eigenproblem
/// W^{1/2} K W^{1/2}. Eigenfunctions are L2-orthonormal under the rule and
/// extend off-node through e_m(x) = (1/lambda_m) sum_i w_i k(x, x_i) e_m(x_i).
/// Cheap to copy; eigenfunction closures share the underlying storage.
class EigenSystem {
public:
  EigenSystem(Kernel kernel, QuadratureRule rule, Vector eigenvalues,
              Matrix node_values);

  int rank() const noexcept;
  double eigenvalue(int m) const;
  const Vector& eigenvalues() const noexcept;
  const QuadratureRule& rule() const noexcept;
  const Kernel& kernel() const noexcept;

  /// Nystrom extension of the m-th eigenfunction.
  double eval(int m, double x) const;

  /// Callable view of the m-th eigenfunction (keeps this system's storage alive).
  RealFn eigenfunction(int m) const;

private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

/// Computes the top-M eigenpairs. Truncates at the first eigenvalue below
/// 1e-12 * lambda_1, so the returned rank may be smaller than M.
EigenSystem nystrom_eigensystem(const Kernel& k, const QuadratureRule& rule, int M);

}  // namespace grevf
