#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "grevf/errors.hpp"

namespace grevf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RealFn = std::function<double(double)>;

/// Compact interval [a, b] with a < b.
struct Interval {
  double a;
  double b;

  Interval(double a_, double b_);

  double length() const noexcept { return b - a; }
  bool contains(double x) const noexcept { return x >= a && x <= b; }
};

/// Dense symmetric matrix. Construction symmetrizes the input as (A + A^T)/2
/// and rejects non-finite entries or asymmetry beyond 1e-12 relative.
class SymMatrix {
public:
  explicit SymMatrix(Matrix entries);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& mat() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  double trace() const { return entries_.trace(); }
  double mean_diagonal() const { return entries_.diagonal().mean(); }

private:
  Matrix entries_;
};

/// Lower-triangular Cholesky factor of A + jitter_used * I.
struct CholFactor {
  Matrix lower;
  double jitter_used = 0.0;

  Eigen::Index dim() const noexcept { return lower.rows(); }
};

/// Nodes and positive weights on an interval. Weights sum to the interval
/// length; nodes are strictly increasing.
struct QuadratureRule {
  Interval domain;
  Vector nodes;
  Vector weights;

  Eigen::Index size() const noexcept { return nodes.size(); }
};

inline constexpr int kDefaultQuadratureNodes = 128;

/// Gauss-Legendre rule with p nodes mapped from [-1,1] onto the interval.
QuadratureRule gauss_legendre_rule(const Interval& domain, int p);

/// Panelwise Gauss-Legendre rule: one p-node panel between consecutive
/// breakpoints. Interior breakpoints let piecewise-smooth integrands (bump
/// features) integrate to machine precision.
QuadratureRule composite_gauss_legendre_rule(const Interval& domain,
                                             std::span<const double> interior_breakpoints,
                                             int p_per_panel);

/// Weighted sum of f over the rule's nodes. Throws NumericError (with the
/// node index) if f returns a non-finite value.
double integrate(const RealFn& f, const QuadratureRule& rule);

/// Cholesky of A + eps*I for the smallest eps in the schedule
/// {0, 1e-10, 1e-8, 1e-6, 1e-4} * mean_diagonal(A) that succeeds.
/// Throws NotPositiveDefiniteError if every attempt fails.
CholFactor cholesky_jittered(const SymMatrix& A);

/// A^{-1} B through two triangular solves on the stored factor.
Matrix psd_solve(const CholFactor& factor, const Matrix& B);
Vector psd_solve(const CholFactor& factor, const Vector& b);

/// log det(A + jitter*I) = 2 * sum(log(diag(lower))).
double log_det(const CholFactor& factor);

}  // namespace grevf
