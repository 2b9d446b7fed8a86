#include "mbm/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mbm {

namespace {

// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  rule.nodes = (rule.nodes.array() * half + mid).matrix();
  rule.weights *= half;
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breakpoints, int order) {
  if (breakpoints.size() < 2) throw std::invalid_argument("composite rule needs at least one panel");
  const QuadratureRule base = gauss_legendre(order);
  const auto panels = static_cast<Eigen::Index>(breakpoints.size() - 1);
  QuadratureRule rule{Eigen::VectorXd(panels * order), Eigen::VectorXd(panels * order)};
  for (Eigen::Index p = 0; p < panels; ++p) {
    const double a = breakpoints[p], b = breakpoints[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    rule.nodes.segment(p * order, order) = (base.nodes.array() * half + mid).matrix();
    rule.weights.segment(p * order, order) = base.weights * half;
  }
  return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, double max_width, int order) {
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / max_width)));
  std::vector<double> bp(panels + 1);
  for (int i = 0; i <= panels; ++i) bp[i] = a + (b - a) * i / panels;
  bp.back() = b;
  return composite_gauss_legendre(bp, order);
}

QuadratureRule graded_gauss_legendre(double top, double ratio, int levels, int order) {
  std::vector<double> bp;
  bp.reserve(levels + 2);
  bp.push_back(0.0);
  for (int j = levels; j >= 0; --j) bp.push_back(top * std::pow(ratio, j));
  return composite_gauss_legendre(bp, order);
}

QuadratureRule concatenate(std::span<const QuadratureRule> rules) {
  Eigen::Index total = 0;
  for (const auto& r : rules) total += r.size();
  QuadratureRule out{Eigen::VectorXd(total), Eigen::VectorXd(total)};
  Eigen::Index offset = 0;
  for (const auto& r : rules) {
    out.nodes.segment(offset, r.size()) = r.nodes;
    out.weights.segment(offset, r.size()) = r.weights;
    offset += r.size();
  }
  return out;
}

QuadratureGrid QuadratureGrid::uniform(double a, double b, int panels, int order) {
  if (!(b > a)) throw std::invalid_argument("QuadratureGrid: empty interval");
  if (panels < 1 || order < 1) throw std::invalid_argument("QuadratureGrid: panels and order must be positive");
  QuadratureGrid grid;
  grid.order_ = order;
  grid.breakpoints_.resize(panels + 1);
  for (int i = 0; i <= panels; ++i) grid.breakpoints_[i] = a + (b - a) * static_cast<double>(i) / panels;
  grid.breakpoints_.back() = b;
  grid.rule_ = composite_gauss_legendre(grid.breakpoints_, order);
  return grid;
}

bool QuadratureGrid::is_breakpoint(double x) const {
  for (double b : breakpoints_)
    if (std::abs(b - x) <= 1e-12) return true;
  return false;
}

}  // namespace mbm
