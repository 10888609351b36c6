#include "grevf/features.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace grevf {

DualElement DualElement::dirac(double location) {
  if (!std::isfinite(location)) throw DomainError("Dirac location must be finite");
  return DualElement(Kind::Dirac, location, nullptr);
}

DualElement DualElement::inter_domain(RealFn g) {
  if (!g) throw DomainError("InterDomain element requires a function");
  return DualElement(Kind::InterDomain, 0.0, std::move(g));
}

DualElement DualElement::rkhs_preimage(RealFn f) {
  if (!f) throw DomainError("RkhsPreimage element requires a function");
  return DualElement(Kind::RkhsPreimage, 0.0, std::move(f));
}

double DualElement::location() const {
  if (kind_ != Kind::Dirac) {
    throw DomainError("location() is only defined for Dirac elements");
  }
  return location_;
}

const RealFn& DualElement::function() const {
  if (kind_ == Kind::Dirac) {
    throw DomainError("function() is not defined for Dirac elements");
  }
  return fn_;
}

DualElement make_bump_interdomain(double center, double half_width,
                                  const Interval& domain) {
  if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
    throw DomainError("bump requires finite center and half_width > 0");
  }
  if (center - half_width < domain.a || center + half_width > domain.b) {
    throw DomainError("bump support [" + std::to_string(center - half_width) + ", " +
                      std::to_string(center + half_width) + "] outside domain");
  }
  return DualElement::inter_domain([center, half_width](double x) {
    const double t = 1.0 - std::abs(x - center) / half_width;
    return t > 0.0 ? t / half_width : 0.0;
  });
}

FeatureSet::FeatureSet(std::vector<DualElement> elements, Kernel kernel,
                       QuadratureRule rule)
    : elements_(std::move(elements)), kernel_(std::move(kernel)), rule_(std::move(rule)) {
  if (elements_.empty()) throw DomainError("FeatureSet requires at least one element");

  const Eigen::Index p = rule_.size();
  const Eigen::Index M = static_cast<Eigen::Index>(elements_.size());
  weighted_node_values_ = Matrix::Zero(p, M);

  for (Eigen::Index m = 0; m < M; ++m) {
    const DualElement& el = elements_[static_cast<std::size_t>(m)];
    if (el.is_dirac()) {
      if (!rule_.domain.contains(el.location())) {
        throw DomainError("Dirac feature location " + std::to_string(el.location()) +
                          " outside domain");
      }
      continue;
    }
    has_function_elements_ = true;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double gi = el.function()(rule_.nodes[i]);
      if (!std::isfinite(gi)) {
        throw NumericError("feature " + std::to_string(m) +
                               " is non-finite at quadrature node " + std::to_string(i),
                           static_cast<long>(i));
      }
      weighted_node_values_(i, m) = rule_.weights[i] * gi;
    }
  }

  if (has_function_elements_) {
    kernel_nodes_.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = kernel_eval(kernel_, rule_.nodes[i], rule_.nodes[j]);
        kernel_nodes_(i, j) = v;
        kernel_nodes_(j, i) = v;
      }
    }
  }
}

namespace {

// (T_k g)(z) = sum_i w_i k(z, x_i) g(x_i)
double apply_operator_at(const Kernel& k, const QuadratureRule& rule,
                         const RealFn& g, double z) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const double gi = g(rule.nodes[i]);
    if (!std::isfinite(gi)) {
      throw NumericError("feature function non-finite at quadrature node " +
                             std::to_string(i),
                         static_cast<long>(i));
    }
    acc += rule.weights[i] * kernel_eval(k, z, rule.nodes[i]) * gi;
  }
  return acc;
}

}  // namespace

double feature_cov(const DualElement& a, const DualElement& b, const Kernel& k,
                   const QuadratureRule& rule) {
  // canonical order (Dirac first) so both argument orders share one path
  if (!a.is_dirac() && b.is_dirac()) return feature_cov(b, a, k, rule);

  if (a.is_dirac() && b.is_dirac()) {
    return kernel_eval(k, a.location(), b.location());
  }
  if (a.is_dirac()) {
    return apply_operator_at(k, rule, b.function(), a.location());
  }
  // double quadrature over the tensor grid
  const RealFn& g = a.function();
  const RealFn& gp = b.function();
  const Eigen::Index p = rule.size();
  Vector wg(p), wgp(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double gi = g(rule.nodes[i]);
    const double gpi = gp(rule.nodes[i]);
    if (!std::isfinite(gi) || !std::isfinite(gpi)) {
      throw NumericError("feature function non-finite at quadrature node " +
                             std::to_string(i),
                         static_cast<long>(i));
    }
    wg[i] = rule.weights[i] * gi;
    wgp[i] = rule.weights[i] * gpi;
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      row += kernel_eval(k, rule.nodes[i], rule.nodes[j]) * wgp[j];
    }
    acc += wg[i] * row;
  }
  return acc;
}

SymMatrix feature_gram(const FeatureSet& fs) {
  const int M = fs.size();
  Matrix G(M, M);

  // K * (w .* g_m) for every function element, shared across entries
  Matrix kwg;
  if (fs.has_function_elements_) kwg = fs.kernel_nodes_ * fs.weighted_node_values_;

  for (int m = 0; m < M; ++m) {
    for (int mp = 0; mp <= m; ++mp) {
      const DualElement& a = fs.element(m);
      const DualElement& b = fs.element(mp);
      double v;
      if (a.is_dirac() && b.is_dirac()) {
        v = kernel_eval(fs.kernel(), a.location(), b.location());
      } else if (a.is_dirac()) {
        // (T_k g_mp)(z_m)
        double acc = 0.0;
        for (Eigen::Index i = 0; i < fs.rule().size(); ++i) {
          acc += kernel_eval(fs.kernel(), a.location(), fs.rule().nodes[i]) *
                 fs.weighted_node_values_(i, mp);
        }
        v = acc;
      } else if (b.is_dirac()) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < fs.rule().size(); ++i) {
          acc += kernel_eval(fs.kernel(), b.location(), fs.rule().nodes[i]) *
                 fs.weighted_node_values_(i, m);
        }
        v = acc;
      } else {
        v = fs.weighted_node_values_.col(m).dot(kwg.col(mp));
      }
      G(m, mp) = v;
      G(mp, m) = v;
    }
  }
  return SymMatrix(std::move(G));
}

Matrix feature_data_cross(const FeatureSet& fs, std::span<const double> X) {
  const int M = fs.size();
  const Eigen::Index N = static_cast<Eigen::Index>(X.size());
  Matrix C(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double x = X[static_cast<std::size_t>(n)];
    if (!fs.rule().domain.contains(x)) {
      throw DomainError("feature_data_cross: location " + std::to_string(x) +
                        " outside domain");
    }
    C.col(n) = feature_point_cov(fs, x);
  }
  return C;
}

Vector feature_point_cov(const FeatureSet& fs, double x) {
  if (!fs.rule().domain.contains(x)) {
    throw DomainError("feature_point_cov: point " + std::to_string(x) +
                      " outside domain");
  }
  const int M = fs.size();
  Vector out(M);
  Vector kx;  // kernel row at the nodes, built on first use
  for (int m = 0; m < M; ++m) {
    const DualElement& el = fs.element(m);
    if (el.is_dirac()) {
      out[m] = kernel_eval(fs.kernel(), x, el.location());
    } else {
      if (kx.size() == 0) {
        kx.resize(fs.rule().size());
        for (Eigen::Index i = 0; i < fs.rule().size(); ++i) {
          kx[i] = kernel_eval(fs.kernel(), x, fs.rule().nodes[i]);
        }
      }
      out[m] = kx.dot(fs.weighted_node_values_.col(m));
    }
  }
  return out;
}

FeatureSet make_eigen_features(const Kernel& k, const QuadratureRule& rule, int M) {
  const EigenSystem es = nystrom_eigensystem(k, rule, M);
  if (es.rank() < M) {
    throw RankError("make_eigen_features: requested M = " + std::to_string(M) +
                    " but eigensystem truncated at rank " + std::to_string(es.rank()));
  }
  std::vector<DualElement> elements;
  elements.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double lambda = es.eigenvalue(m);
    RealFn e_m = es.eigenfunction(m);
    elements.push_back(DualElement::rkhs_preimage(
        [e_m, lambda](double x) { return e_m(x) / lambda; }));
  }
  return FeatureSet(std::move(elements), k, rule);
}

}  // namespace grevf
