#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mbm/statistics.hpp"

using namespace mbm;

namespace {

// Jacobi theta form of the Kolmogorov distribution function.
double kolmogorov_cdf_theta(double x) {
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) s += std::exp(-(2 * k - 1) * (2 * k - 1) * pi * pi / (8 * x * x));
  return std::sqrt(2 * pi) / x * s;
}

double brute_force_d(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pooled) {
    const double fa = double(std::count_if(a.begin(), a.end(), [x](double v) { return v <= x; })) / a.size();
    const double fb = double(std::count_if(b.begin(), b.end(), [x](double v) { return v <= x; })) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

std::vector<double> normals(std::mt19937_64& gen, int n, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

}  // namespace

TEST(Kolmogorov, TailMatchesThetaForm) {
  for (double x : {0.3, 0.5, 0.8, 1.0, 1.36, 1.63, 2.5})
    EXPECT_NEAR(kolmogorov_tail(x), 1.0 - kolmogorov_cdf_theta(x), 1e-12) << "lambda = " << x;
  EXPECT_NEAR(kolmogorov_tail(1.36), 0.0494, 1e-4);
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
}

TEST(KsTwoSample, StatisticMatchesBruteForce) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = normals(gen, 150 + trial), b = normals(gen, 220, 0.1 * trial);
    EXPECT_NEAR(ks_two_sample(a, b).statistic, brute_force_d(a, b), 1e-15);
  }
}

TEST(KsTwoSample, NullCalibrationAndPower) {
  std::mt19937_64 gen(9);
  int rejections = 0;
  for (int r = 0; r < 300; ++r)
    if (ks_two_sample(normals(gen, 400), normals(gen, 400)).p_value < 0.05) ++rejections;
  EXPECT_GE(rejections, 5);
  EXPECT_LE(rejections, 30);
  EXPECT_LT(ks_two_sample(normals(gen, 2000), normals(gen, 2000, 0.2)).p_value, 1e-6);
  EXPECT_LT(ks_two_sample(normals(gen, 2000), normals(gen, 2000, 0.0, 1.5)).p_value, 1e-4);
}

TEST(KsNormal, AcceptsAndRejects) {
  std::mt19937_64 gen(21);
  EXPECT_GT(ks_normal(normals(gen, 5000, 0.0, 0.5), 0.25).p_value, 0.01);
  EXPECT_LT(ks_normal(normals(gen, 5000, 0.0, 0.5), 0.5).p_value, 1e-6);
}

TEST(Moments, KnownSample) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  const Moments m = moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_NEAR(m.variance, 32.0 / 7.0, 1e-14);
  std::mt19937_64 gen(2);
  const Moments g = moments(normals(gen, 200000));
  EXPECT_NEAR(g.skewness, 0.0, 0.03);
  EXPECT_NEAR(g.kurtosis, 3.0, 0.05);
}

TEST(RegressionSlope, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3.5, 6, 8.5, 11};
  EXPECT_NEAR(regression_slope(x, y), 2.5, 1e-14);
}
