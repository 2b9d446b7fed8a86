#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "mbm/hermite_basis.hpp"

using namespace mbm;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

// e_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) e^{-x^2/2}, with the physicists'
// polynomial expanded term by term in 50-digit arithmetic.
Big hermite_function_50(int n, const Big& x) {
  Big poly = 0, nfact = 1;
  for (int i = 2; i <= n; ++i) nfact *= i;
  for (int m = 0; 2 * m <= n; ++m) {
    Big mf = 1, rest = 1;
    for (int i = 2; i <= m; ++i) mf *= i;
    for (int i = 2; i <= n - 2 * m; ++i) rest *= i;
    Big term = nfact / (mf * rest) * pow(2 * x, n - 2 * m);
    poly += (m % 2 == 0) ? term : Big(-term);
  }
  const Big pi = boost::math::constants::pi<Big>();
  return poly * exp(-x * x / 2) / sqrt(pow(Big(2), n) * nfact * sqrt(pi));
}

}  // namespace

TEST(HermiteBasis, ValueAtOrigin) {
  const HermiteBasis basis(16);
  EXPECT_NEAR(basis(0, 0.0), std::pow(std::numbers::pi, -0.25), 1e-15);
  EXPECT_NEAR(basis(0, 0.0), 0.7511255, 1e-7);
  EXPECT_EQ(basis(1, 0.0), 0.0);
}

TEST(HermiteBasis, MatchesFiftyDigitOracle) {
  const HermiteBasis basis(64);
  EXPECT_NEAR(basis(5, 1.3), hermite_function_50(5, Big("1.3")).convert_to<double>(), 1e-10);
  for (int n : {0, 1, 2, 7, 20, 45})
    for (const char* x : {"-3.7", "0.25", "1.3", "6.1"})
      EXPECT_NEAR(basis(n, std::stod(x)), hermite_function_50(n, Big(x)).convert_to<double>(), 1e-10)
          << "n = " << n << ", x = " << x;
}

TEST(HermiteBasis, TemplateRecurrenceRunsInHighPrecision) {
  const auto v = hermite_functions<Big>(30, Big("2.5"));
  for (int n : {0, 13, 29})
    EXPECT_LT(abs(v[n] - hermite_function_50(n, Big("2.5"))), Big("1e-40")) << "n = " << n;
}

TEST(HermiteBasis, OrthonormalUnderItsQuadrature) {
  const int K = 512;
  const HermiteBasis basis(K);
  const Eigen::MatrixXd gram = basis.gram();
  const double err = (gram - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
  EXPECT_LE(err, 1e-8);
}

TEST(HermiteBasis, ThreeTermRecurrence) {
  const int K = 256;
  const HermiteBasis basis(K);
  for (double x : {-20.0, -4.5, -0.3, 0.0, 1.7, 9.0, 22.0}) {
    const Eigen::VectorXd e = basis.values(x);
    for (int n = 1; n + 1 < K; ++n) {
      const double lhs = e[n + 1] * std::sqrt(n + 1.0);
      const double rhs = x * std::sqrt(2.0) * e[n] - std::sqrt(double(n)) * e[n - 1];
      const double scale = std::max({std::abs(lhs), std::abs(rhs)});
      if (scale > 1e-30) EXPECT_LE(std::abs(lhs - rhs), 1e-9 * scale) << "n = " << n << ", x = " << x;
    }
  }
}

TEST(HermiteBasis, NoOverflowAndFlushing) {
  const HermiteBasis basis(1024);
  const Eigen::VectorXd far = basis.values(40.0);
  EXPECT_TRUE(far.allFinite());
  for (Eigen::Index n = 0; n < far.size(); ++n)
    if (far[n] != 0.0) EXPECT_GE(std::abs(far[n]), 1e-300);
  EXPECT_EQ(far[0], 0.0);  // e^{-800} underflows the threshold
}

TEST(HermiteBasis, IndexErrors) {
  const HermiteBasis basis(8);
  EXPECT_THROW(basis(8, 0.0), std::invalid_argument);
  EXPECT_THROW(basis(-1, 0.0), std::invalid_argument);
  EXPECT_THROW(basis.cumulative_integral(9, 0.5), std::invalid_argument);
  EXPECT_THROW(HermiteBasis(0), std::invalid_argument);
}

TEST(HermiteBasis, CumulativeIntegralExamples) {
  const HermiteBasis basis(32);
  EXPECT_EQ(basis.cumulative_integral(0, 0.0), 0.0);
  for (double t : {0.3, 1.1, 2.5}) {
    EXPECT_NEAR(basis.cumulative_integral(1, t), basis.cumulative_integral(1, -t), 1e-14);
    EXPECT_NEAR(basis.cumulative_integral(4, t), -basis.cumulative_integral(4, -t), 1e-14);
  }
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double s) { return std::pow(std::numbers::pi, -0.25) * std::exp(-s * s / 2); }, 0.0, 1.0, 15, 1e-14);
  EXPECT_NEAR(basis.cumulative_integral(0, 1.0), oracle, 1e-10);
}

TEST(HermiteBasis, CumulativeIntegralsAgreeWithAdaptiveQuadrature) {
  const HermiteBasis basis(64);
  for (int n : {3, 10, 31, 63})
    for (double t : {0.4, 1.0, 3.3}) {
      const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double s) { return basis(n, s); }, 0.0, t, 20, 1e-14);
      EXPECT_NEAR(basis.cumulative_integral(n, t), oracle, 1e-10) << "n = " << n << ", t = " << t;
      EXPECT_NEAR(basis.cumulative_integrals(t)[n], oracle, 1e-10);
    }
}
