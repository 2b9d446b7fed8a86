#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mbm {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite rule: an `order`-point Gauss-Legendre rule on every panel
/// [breakpoints[i], breakpoints[i+1]].
QuadratureRule composite_gauss_legendre(std::span<const double> breakpoints, int order);

/// Composite Gauss-Legendre rule on panels of width at most `max_width`.
QuadratureRule composite_gauss_legendre(double a, double b, double max_width, int order);

/// Panels graded geometrically towards 0 on [0, top]: [top*r^{j+1}, top*r^j]
/// for j < levels, plus the innermost panel [0, top*r^levels].
/// Integrates y^a log(y)^m g(y) with smooth g to near machine precision.
QuadratureRule graded_gauss_legendre(double top, double ratio, int levels, int order);

/// Concatenate rules.
QuadratureRule concatenate(std::span<const QuadratureRule> rules);

/// Time-quadrature grid for Bochner integrals: Gauss-Legendre panels whose
/// boundaries are recorded, so callers can keep discontinuities on panel edges.
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  /// `panels` equal panels on [a, b] with `order` nodes each.
  static QuadratureGrid uniform(double a, double b, int panels, int order);

  double lower() const { return breakpoints_.front(); }
  double upper() const { return breakpoints_.back(); }
  int order() const { return order_; }
  int panels() const { return static_cast<int>(breakpoints_.size()) - 1; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Eigen::VectorXd& nodes() const { return rule_.nodes; }
  const Eigen::VectorXd& weights() const { return rule_.weights; }
  Eigen::Index size() const { return rule_.size(); }

  /// Index range [first, last) of the nodes lying in panel p.
  std::pair<Eigen::Index, Eigen::Index> panel_nodes(int p) const {
    return {static_cast<Eigen::Index>(p) * order_, static_cast<Eigen::Index>(p + 1) * order_};
  }

  /// True when x coincides with a panel boundary (up to 1e-12).
  bool is_breakpoint(double x) const;

 private:
  std::vector<double> breakpoints_;
  int order_ = 0;
  QuadratureRule rule_;
};

}  // namespace mbm
