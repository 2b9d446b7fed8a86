#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mbm/quadrature.hpp"

using namespace mbm;

TEST(GaussLegendre, IntegratesPolynomialsUpToDegree2nMinus1) {
  for (int n : {1, 2, 5, 12, 40}) {
    const QuadratureRule rule = gauss_legendre(n, -1.0, 2.0);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      const double exact = (std::pow(2.0, d + 1) - std::pow(-1.0, d + 1)) / (d + 1);
      EXPECT_NEAR(rule.integrate([d](double x) { return std::pow(x, d); }), exact, 1e-12 * std::max(1.0, std::abs(exact)))
          << "n = " << n << ", degree " << d;
    }
  }
}

TEST(GaussLegendre, NodesSortedInsideInterval) {
  const QuadratureRule rule = gauss_legendre(17, 0.5, 3.0);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    EXPECT_GT(rule.nodes[i], 0.5);
    EXPECT_LT(rule.nodes[i], 3.0);
    EXPECT_GT(rule.weights[i], 0.0);
    if (i) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
  }
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(CompositeRule, SmoothIntegrand) {
  const QuadratureRule rule = composite_gauss_legendre(0.0, 10.0, 1.0, 10);
  EXPECT_NEAR(rule.integrate([](double x) { return std::exp(-x) * std::cos(3 * x); }),
              (1.0 - std::exp(-10.0) * (std::cos(30.0) - 3 * std::sin(30.0))) / 10.0, 1e-13);
}

TEST(GradedRule, ResolvesEndpointSingularity) {
  // int_0^1 y^{-0.4} dy = 1/0.6; the graded panels reach down to 0.25^40.
  const QuadratureRule rule = graded_gauss_legendre(1.0, 0.25, 40, 16);
  EXPECT_NEAR(rule.integrate([](double y) { return std::pow(y, -0.4); }), 1.0 / 0.6, 1e-12);
}

TEST(QuadratureGrid, UniformPanelsAndBreakpoints) {
  const QuadratureGrid g = QuadratureGrid::uniform(0.0, 1.0, 8, 4);
  EXPECT_EQ(g.panels(), 8);
  EXPECT_EQ(g.size(), 32);
  EXPECT_TRUE(g.is_breakpoint(0.375));
  EXPECT_FALSE(g.is_breakpoint(0.3));
  const auto [first, last] = g.panel_nodes(3);
  EXPECT_EQ(first, 12);
  EXPECT_EQ(last, 16);
  for (Eigen::Index i = first; i < last; ++i) {
    EXPECT_GT(g.nodes()[i], 0.375);
    EXPECT_LT(g.nodes()[i], 0.5);
  }
  EXPECT_NEAR(g.weights().sum(), 1.0, 1e-15);
  EXPECT_THROW(QuadratureGrid::uniform(1.0, 1.0, 2, 2), std::invalid_argument);
}
