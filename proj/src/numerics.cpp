#include "grevf/numerics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace grevf {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || !std::isfinite(b) || a >= b) {
    throw DomainError("invalid interval [" + std::to_string(a_) + ", " +
                      std::to_string(b_) + "]: require finite a < b");
  }
}

SymMatrix::SymMatrix(Matrix entries) {
  if (entries.rows() != entries.cols()) {
    throw ShapeError("SymMatrix requires a square matrix, got " +
                     std::to_string(entries.rows()) + "x" +
                     std::to_string(entries.cols()));
  }
  if (!entries.allFinite()) {
    throw NumericError("SymMatrix entries must be finite");
  }
  const double scale = std::max(entries.cwiseAbs().maxCoeff(), 1.0);
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw NumericError("matrix asymmetry " + std::to_string(asym / scale) +
                       " exceeds 1e-12 relative");
  }
  entries_ = 0.5 * (entries + entries.transpose());
}

namespace {

// Nodes/weights of the p-point Gauss-Legendre rule on [-1,1] by Newton
// iteration on the Legendre recurrence. Symmetric pairs are filled together.
void leggauss_reference(int p, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(p), 0.0);
  weights.assign(static_cast<std::size_t>(p), 0.0);
  const int half = (p + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= p; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = p * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one clean-up Newton step to settle the weight derivative
    {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= p; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = p * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(p - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(p - 1 - i)] = w;
  }
  if (p % 2 == 1) nodes[static_cast<std::size_t>(half - 1)] = 0.0;
}

}  // namespace

QuadratureRule gauss_legendre_rule(const Interval& domain, int p) {
  if (p < 1) {
    throw DomainError("gauss_legendre_rule requires p >= 1, got " + std::to_string(p));
  }
  std::vector<double> ref_nodes, ref_weights;
  leggauss_reference(p, ref_nodes, ref_weights);

  QuadratureRule rule{domain, Vector(p), Vector(p)};
  const double mid = 0.5 * (domain.a + domain.b);
  const double halfw = 0.5 * domain.length();
  for (int i = 0; i < p; ++i) {
    rule.nodes[i] = mid + halfw * ref_nodes[static_cast<std::size_t>(i)];
    rule.weights[i] = halfw * ref_weights[static_cast<std::size_t>(i)];
  }
  return rule;
}

QuadratureRule composite_gauss_legendre_rule(const Interval& domain,
                                             std::span<const double> interior_breakpoints,
                                             int p_per_panel) {
  std::vector<double> cuts{domain.a};
  for (double c : interior_breakpoints) {
    if (c > domain.a && c < domain.b) cuts.push_back(c);
  }
  cuts.push_back(domain.b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> nodes, weights;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadratureRule panel =
        gauss_legendre_rule(Interval(cuts[i], cuts[i + 1]), p_per_panel);
    nodes.insert(nodes.end(), panel.nodes.begin(), panel.nodes.end());
    weights.insert(weights.end(), panel.weights.begin(), panel.weights.end());
  }
  QuadratureRule rule{domain, Eigen::Map<Vector>(nodes.data(), static_cast<Eigen::Index>(nodes.size())),
                      Eigen::Map<Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()))};
  return rule;
}

double integrate(const RealFn& f, const QuadratureRule& rule) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const double fi = f(rule.nodes[i]);
    if (!std::isfinite(fi)) {
      throw NumericError("integrand returned non-finite value at node " +
                             std::to_string(i),
                         static_cast<long>(i));
    }
    acc += rule.weights[i] * fi;
  }
  return acc;
}

CholFactor cholesky_jittered(const SymMatrix& A) {
  static constexpr std::array<double, 5> kSchedule{0.0, 1e-10, 1e-8, 1e-6, 1e-4};
  const Eigen::Index n = A.dim();
  // scale jitter by the mean diagonal; fall back to 1 for zero matrices
  double scale = A.mean_diagonal();
  if (!(scale > 0.0)) scale = 1.0;

  double attempted = 0.0;
  for (double mult : kSchedule) {
    const double eps = mult * scale;
    attempted = eps;
    Matrix shifted = A.mat();
    shifted.diagonal().array() += eps;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all()) {
        return CholFactor{std::move(lower), eps};
      }
    }
  }
  throw NotPositiveDefiniteError(
      "Cholesky failed for " + std::to_string(n) + "x" + std::to_string(n) +
          " matrix even with jitter " + std::to_string(attempted),
      attempted);
}

Matrix psd_solve(const CholFactor& factor, const Matrix& B) {
  if (factor.dim() != B.rows()) {
    throw ShapeError("psd_solve: factor dim " + std::to_string(factor.dim()) +
                     " vs rhs rows " + std::to_string(B.rows()));
  }
  Matrix z = factor.lower.triangularView<Eigen::Lower>().solve(B);
  return factor.lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

Vector psd_solve(const CholFactor& factor, const Vector& b) {
  if (factor.dim() != b.size()) {
    throw ShapeError("psd_solve: factor dim " + std::to_string(factor.dim()) +
                     " vs rhs size " + std::to_string(b.size()));
  }
  Vector z = factor.lower.triangularView<Eigen::Lower>().solve(b);
  return factor.lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

double log_det(const CholFactor& factor) {
  return 2.0 * factor.lower.diagonal().array().log().sum();
}

}  // namespace grevf
