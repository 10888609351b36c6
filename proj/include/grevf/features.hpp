#pragma once

#include <span>
#include <vector>

#include "grevf/kernels.hpp"
#include "grevf/numerics.hpp"

namespace grevf {

/// One continuous linear functional on the path space: a point evaluation
/// (Dirac measure), an L2 inner product against a test function g, or an
/// RKHS-side feature stored through its preimage f (realized feature T_k f).
class DualElement {
public:
  enum class Kind { Dirac, InterDomain, RkhsPreimage };

  static DualElement dirac(double location);
  static DualElement inter_domain(RealFn g);

  /// The realized RKHS feature is g = T_k f. Supplying the preimage keeps the
  /// feature well defined; whether a given g of interest actually lies in the
  /// range of T_k (for every kernel parameter in play) is the caller's
  /// responsibility and cannot be checked programmatically.
  static DualElement rkhs_preimage(RealFn f);

  Kind kind() const noexcept { return kind_; }
  bool is_dirac() const noexcept { return kind_ == Kind::Dirac; }

  /// Dirac location; throws for function elements.
  double location() const;

  /// Test function (g for InterDomain, the preimage f for RkhsPreimage);
  /// throws for Dirac elements.
  const RealFn& function() const;

private:
  DualElement(Kind kind, double location, RealFn fn)
      : kind_(kind), location_(location), fn_(std::move(fn)) {}

  Kind kind_;
  double location_ = 0.0;
  RealFn fn_;
};

/// Triangular bump of width 2h and unit integral centered at c. Support must
/// lie inside the domain. Converges to the Dirac feature at c as h -> 0.
DualElement make_bump_interdomain(double center, double half_width,
                                  const Interval& domain);

/// Ordered features sharing one kernel and one quadrature context. Function
/// elements are evaluated on the nodes at construction (and checked finite);
/// the kernel node matrix is cached once for double-quadrature entries.
class FeatureSet {
public:
  FeatureSet(std::vector<DualElement> elements, Kernel kernel, QuadratureRule rule);

  int size() const noexcept { return static_cast<int>(elements_.size()); }
  const DualElement& element(int m) const { return elements_.at(static_cast<std::size_t>(m)); }
  const std::vector<DualElement>& elements() const noexcept { return elements_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const QuadratureRule& rule() const noexcept { return rule_; }

  /// weights .* g_m(nodes) for function element m (empty column for Diracs).
  const Matrix& weighted_node_values() const noexcept { return weighted_node_values_; }

private:
  std::vector<DualElement> elements_;
  Kernel kernel_;
  QuadratureRule rule_;
  Matrix weighted_node_values_;  // p x M
  Matrix kernel_nodes_;          // p x p, empty when every element is a Dirac
  bool has_function_elements_ = false;

  friend SymMatrix feature_gram(const FeatureSet& fs);
  friend Matrix feature_data_cross(const FeatureSet& fs, std::span<const double> X);
  friend Vector feature_point_cov(const FeatureSet& fs, double x);
};

/// Cov(a(F), b(F)) under the prior, by the case table:
///   Dirac/Dirac          k(z, z')
///   Dirac/InterDomain    (T_k g)(z)
///   Inter/Inter          double quadrature of k(x,x') g(x) g'(x')
/// RkhsPreimage elements behave as InterDomain with g = f.
double feature_cov(const DualElement& a, const DualElement& b, const Kernel& k,
                   const QuadratureRule& rule);

/// M x M feature covariance C_LL.
SymMatrix feature_gram(const FeatureSet& fs);

/// M x N cross covariance C_LD against Dirac functionals at X.
Matrix feature_data_cross(const FeatureSet& fs, std::span<const double> X);

/// Length-M vector of Cov(F(x), L_m F), the C_TL row for T = Dirac x.
Vector feature_point_cov(const FeatureSet& fs, double x);

/// RKHS features g_m = e_m realized through preimages f_m = e_m / lambda_m,
/// so the feature gram is diagonal with entries 1/lambda_m.
FeatureSet make_eigen_features(const Kernel& k, const QuadratureRule& rule, int M);

}  // namespace grevf
