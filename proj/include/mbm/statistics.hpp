#pragma once

#include <span>

namespace mbm {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_tail(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q((sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D), ne = n m / (n + m).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample test against N(0, variance).
KsResult ks_normal(std::span<const double> x, double variance);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double skewness = 0.0;
  double kurtosis = 0.0;  ///< non-excess; 3 for a Gaussian
};

Moments moments(std::span<const double> x);

/// Least-squares slope of y on x.
double regression_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mbm
