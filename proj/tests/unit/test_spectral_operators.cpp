#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hermite.hpp>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mbm/spectral_operators.hpp"

using namespace mbm;
using mbm::testing::linspace;

namespace {

constexpr double kPi = std::numbers::pi;

// c_x = (2 cos(pi x) Gamma(2 - 2x) / (x (1 - 2x)))^{1/2}, away from x = 1/2.
double c_closed_form(double x) {
  return std::sqrt(2.0 * std::cos(kPi * x) * boost::math::tgamma(2.0 - 2.0 * x) / (x * (1.0 - 2.0 * x)));
}

double hermite_function(int k, double y) {
  if (std::abs(y) > 38.0) return 0.0;
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return boost::math::hermite(k, y) * std::exp(-y * y / 2) / std::sqrt(std::pow(2.0, k) * f * std::sqrt(kPi));
}

// (1/2pi) int_R symbol(y) ehat_k(y) e^{ity} dy with ehat_k = (-i)^k sqrt(2pi) e_k,
// split into |y| <= 1 and |y| > 1. The symbol is (sqrt(2pi)/c_H)|y|^{1/2-H},
// optionally times -(beta_H + ln|y|).
double fourier_oracle(int k, double H, double t, bool derivative) {
  const std::complex<double> phase = std::pow(std::complex<double>(0.0, -1.0), k);
  const double c = H == 0.5 ? std::sqrt(2 * kPi) : c_closed_form(H), beta = derivative ? beta_of_H(H) : 0.0;
  auto real_part = [&](double y) {
    const double s = std::abs(y);
    double sym = std::sqrt(2 * kPi) / c * std::pow(s, 0.5 - H);
    if (derivative) sym *= -(beta + std::log(s));
    const std::complex<double> v = sym * phase * std::sqrt(2 * kPi) * hermite_function(k, y) *
                                   std::exp(std::complex<double>(0.0, t * y));
    return v.real() / (2 * kPi);
  };
  boost::math::quadrature::tanh_sinh<double> inner;
  boost::math::quadrature::exp_sinh<double> outer;
  const double near = inner.integrate([&](double y) { return real_part(y) + real_part(-y); }, 0.0, 1.0);
  const double far = outer.integrate([&](double y) { return real_part(y) + real_part(-y); }, 1.0,
                                     std::numeric_limits<double>::infinity());
  return near + far;
}

std::shared_ptr<const SpectralOperators> operators(int K) {
  return std::make_shared<const SpectralOperators>(HermiteBasis(K));
}

}  // namespace

TEST(SpectralConstants, CofH) {
  EXPECT_NEAR(c_of_H(0.5), std::sqrt(2 * kPi), 1e-14);
  EXPECT_NEAR(c_of_H(0.5), 2.5066283, 1e-7);
  // the closed form on both sides of its removable singularity
  EXPECT_NEAR(c_of_H(0.5), 0.5 * (c_closed_form(0.5 - 1e-6) + c_closed_form(0.5 + 1e-6)), 1e-9);
  EXPECT_NEAR(c_of_H(0.25), 3.16646, 1e-5);
  for (double H = 0.1; H < 0.95; H += 0.1) {
    EXPECT_GT(c_of_H(H), 0.0);
    if (std::abs(H - 0.5) > 1e-3) EXPECT_NEAR(c_of_H(H), c_closed_form(H), 1e-12 * c_closed_form(H));
  }
  EXPECT_THROW(c_of_H(0.0), std::domain_error);
  EXPECT_THROW(c_of_H(1.0), std::domain_error);
}

TEST(SpectralConstants, BetaIsLogDerivativeOfC) {
  const double d = 1e-5;
  for (double H : {0.3, 0.12, 0.5, 0.77, 0.93}) {
    const double fd = (c_of_H(H + d) - c_of_H(H - d)) / (2 * d * c_of_H(H));
    EXPECT_NEAR(beta_of_H(H), fd, 1e-4) << "H = " << H;
  }
  EXPECT_TRUE(std::isfinite(beta_of_H(0.5)));
  EXPECT_NEAR(beta_of_H(0.5), 0.5 * (beta_of_H(0.5 - 1e-7) + beta_of_H(0.5 + 1e-7)), 1e-8);
  EXPECT_THROW(beta_of_H(-0.1), std::domain_error);
}

TEST(SpectralConstants, SymbolDerivative) {
  const double H = 0.4, y = 2.0, d = 1e-5;
  auto symbol = [y](double h) { return std::sqrt(2 * kPi) / c_of_H(h) * std::pow(y, 0.5 - h); };
  const double fd = (symbol(H + d) - symbol(H - d)) / (2 * d);
  const double expected = -(beta_of_H(H) + std::log(2.0)) * symbol(H);
  EXPECT_NEAR(fd, expected, 1e-5 * std::abs(expected));
}

TEST(SpectralConstants, DigammaAgainstBoost) {
  for (double x : {1e-3, 0.07, 0.5, 1.0, 1.4, 2.9, 7.99, 8.0, 31.0, 1e4})
    EXPECT_NEAR(digamma(x), boost::math::digamma(x), 1e-13 * std::max(1.0, std::abs(boost::math::digamma(x))))
        << "x = " << x;
  EXPECT_THROW(digamma(0.0), std::domain_error);
}

TEST(SpectralOperators, IdentityAtOneHalf) {
  const auto ops = operators(128);
  for (int k : {0, 1, 2, 5, 17, 31, 64, 127})
    for (double t : {-1.0, -0.3, 0.0, 0.25, 0.5, 0.9, 1.0})
      EXPECT_NEAR(ops->apply_M(k, 0.5, t), ops->basis()(k, t), 1e-6) << "k = " << k << ", t = " << t;
}

TEST(SpectralOperators, OddModesVanishAtZero) {
  const auto ops = operators(64);
  for (int k = 1; k < 64; k += 2)
    for (double H : {0.2, 0.5, 0.8}) {
      EXPECT_EQ(ops->apply_M(k, H, 0.0), 0.0);
      EXPECT_EQ(ops->apply_dM(k, H, 0.0), 0.0);
    }
}

TEST(SpectralOperators, FourierOracle) {
  const auto ops = operators(64);
  EXPECT_NEAR(ops->apply_M(3, 0.7, 0.4), fourier_oracle(3, 0.7, 0.4, false), 1e-6);
  EXPECT_NEAR(ops->apply_dM(0, 0.5, 0.5), fourier_oracle(0, 0.5, 0.5, true), 1e-6);
  for (int k : {0, 1, 2, 7, 12})
    for (double H : {0.15, 0.35, 0.85})
      EXPECT_NEAR(ops->apply_M(k, H, 0.6), fourier_oracle(k, H, 0.6, false), 1e-6)
          << "k = " << k << ", H = " << H;
}

TEST(SpectralOperators, DerivativeMatchesFiniteDifferences) {
  const auto ops = operators(64);
  const double d = 1e-5;
  for (double H : linspace(0.2, 0.8, 5))
    for (double t : linspace(0.1, 1.0, 5))
      for (int k : {0, 3, 10, 40}) {
        const double fd = (ops->apply_M(k, H + d, t) - ops->apply_M(k, H - d, t)) / (2 * d);
        EXPECT_NEAR(ops->apply_dM(k, H, t), fd, 1e-4) << "k = " << k << ", H = " << H << ", t = " << t;
        const double cfd = (ops->cumulative_M(k, H + d, t) - ops->cumulative_M(k, H - d, t)) / (2 * d);
        EXPECT_NEAR(ops->cumulative_dM(k, H, t), cfd, 1e-4);
      }
}

TEST(SpectralOperators, CumulativeIsTimeIntegral) {
  const auto ops = operators(64);
  boost::math::quadrature::tanh_sinh<double> q;
  for (int k : {0, 1, 6, 21})
    for (double H : {0.3, 0.75}) {
      EXPECT_EQ(ops->cumulative_M(k, H, 0.0), 0.0);
      const double t = 0.8;
      EXPECT_NEAR(ops->cumulative_M(k, H, t), q.integrate([&](double s) { return ops->apply_M(k, H, s); }, 0.0, t),
                  1e-9);
      EXPECT_NEAR(ops->cumulative_dM(k, H, t),
                  q.integrate([&](double s) { return ops->apply_dM(k, H, s); }, 0.0, t), 1e-9);
    }
  for (int k = 0; k < 64; ++k)
    EXPECT_NEAR(ops->cumulative_M(k, 0.5, 0.7), ops->basis().cumulative_integral(k, 0.7), 1e-6);
}

TEST(SpectralOperators, ParsevalVarianceAtOneHalf) {
  // sum_{k<512} (int_0^1 M_{1/2} e_k)^2 -> 1
  const auto ops = operators(512);
  const SpectralPoint p{0.5, 1.0};
  const OperatorColumns c = ops->evaluate(std::span<const SpectralPoint>(&p, 1), kCumM);
  EXPECT_NEAR(c.cum_m.col(0).squaredNorm(), 1.0, 0.02);
}

TEST(SpectralOperators, RangeErrors) {
  const auto ops = operators(16);
  EXPECT_THROW(ops->apply_M(16, 0.5, 0.1), std::invalid_argument);
  EXPECT_THROW(ops->apply_M(0, 1.2, 0.1), std::domain_error);
  EXPECT_THROW(ops->apply_M(0, 0.5, 1.5), std::out_of_range);
}

TEST(SpectralOperators, BatchIndependentOfWorkers) {
  const auto ops = operators(96);
  std::vector<SpectralPoint> pts;
  for (double H : linspace(0.1, 0.9, 9))
    for (double t : linspace(0.0, 1.0, 11)) pts.push_back({H, t});
  const OperatorColumns a = ops->evaluate(pts, kAllQuantities, 1);
  const OperatorColumns b = ops->evaluate(pts, kAllQuantities, 4);
  EXPECT_TRUE(a.m == b.m && a.dm == b.dm && a.cum_m == b.cum_m && a.cum_dm == b.cum_dm);
  const OperatorColumns only = ops->evaluate(pts, kCumDM, 3);
  EXPECT_TRUE(only.cum_dm == a.cum_dm);
  EXPECT_EQ(only.m.size(), 0);
}

TEST(OperatorTable, GridAndOffGridAgreeWithDirectEvaluation) {
  const auto table = mbm::testing::table(64);
  const auto& ops = table->operators();
  for (auto [H, t] : std::vector<std::pair<double, double>>{{0.05, 0.0}, {0.5, 0.5}, {0.95, 1.0}, {0.333, 0.1234}}) {
    for (int k : {0, 9, 63}) {
      const double m = ops.apply_M(k, H, t), dm = ops.cumulative_dM(k, H, t);
      EXPECT_NEAR(table->apply_M(k, H, t), m, 1e-13 * (1.0 + std::abs(m)));
      EXPECT_NEAR(table->cumulative_dM(k, H, t), dm, 1e-13 * (1.0 + std::abs(dm)));
    }
  }
  EXPECT_THROW(table->apply_M(0, 0.97, 0.5), std::out_of_range);
  EXPECT_THROW(table->apply_M(0, 0.5, -0.1), std::out_of_range);
  EXPECT_EQ(table->apply_M(1, 0.3, 0.0), 0.0);
  EXPECT_EQ(table->cumulative_M(5, 0.3, 0.0), 0.0);
}

TEST(OperatorTable, IdentityOnEveryGridPoint) {
  const auto table = mbm::testing::table(64);
  const auto& times = table->time_grid();
  std::size_t ih = 0;
  while (std::abs(table->hurst_grid()[ih] - 0.5) > 1e-12) ++ih;
  for (std::size_t it = 0; it < times.size(); ++it)
    for (int k = 0; k < 64; ++k) EXPECT_NEAR(table->cached(kM, k, ih, it), table->operators().basis()(k, times[it]), 1e-6);
}

TEST(OperatorTable, CacheRoundTripAndReuse) {
  namespace fs = std::filesystem;
  const fs::path dir = mbm::testing::scratch_dir("table_cache");
  fs::remove_all(dir);
  const auto ops = operators(24);
  const auto hs = linspace(0.1, 0.9, 5), ts = linspace(0.0, 1.0, 9);
  bool built = false;
  const OperatorTable first = OperatorTable::load_or_build(dir, ops, hs, ts, false, 1, &built);
  EXPECT_TRUE(built);
  const fs::path file = OperatorTable::cache_path(dir, first.content_hash());
  ASSERT_TRUE(fs::exists(file));
  EXPECT_EQ(file.filename().string().size(), std::string("operator_table_.bin").size() + 16);
  const auto stamp = fs::last_write_time(file);

  const OperatorTable second = OperatorTable::load_or_build(dir, ops, hs, ts, false, 1, &built);
  EXPECT_FALSE(built);
  EXPECT_EQ(fs::last_write_time(file), stamp);
  for (std::size_t ih = 0; ih < hs.size(); ++ih)
    for (std::size_t it = 0; it < ts.size(); ++it)
      for (Quantity q : {kM, kDM, kCumM, kCumDM})
        for (int k = 0; k < 24; ++k) ASSERT_EQ(first.cached(q, k, ih, it), second.cached(q, k, ih, it));

  // another grid hashes to another file
  EXPECT_NE(OperatorTable::content_hash(*ops, hs, linspace(0.0, 1.0, 17)), first.content_hash());

  // a damaged file is rejected by load and silently rebuilt by load_or_build
  {
    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(12);
    const char junk[4] = {'x', 'x', 'x', 'x'};
    f.write(junk, 4);
  }
  EXPECT_THROW(OperatorTable::load(file, ops, hs, ts), std::runtime_error);
  OperatorTable::load_or_build(dir, ops, hs, ts, false, 1, &built);
  EXPECT_TRUE(built);
  {
    std::ofstream f(file, std::ios::app | std::ios::binary);
    f << "trailing";
  }
  EXPECT_THROW(OperatorTable::load(file, ops, hs, ts), std::runtime_error);
  OperatorTable::load_or_build(dir, ops, hs, ts, true, 1, &built);
  EXPECT_TRUE(built);
}
