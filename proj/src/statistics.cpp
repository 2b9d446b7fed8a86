#include "mbm/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mbm {

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // the series converges too slowly and Q is 1 to double precision
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

KsResult finish(double d, double ne) {
  const double rt = std::sqrt(ne);
  return {d, kolmogorov_tail((rt + 0.12 + 0.11 / rt) * d)};
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  return finish(d, n * m / (n + m));
}

KsResult ks_normal(std::span<const double> x, double variance) {
  if (x.empty()) throw std::invalid_argument("ks_normal: empty sample");
  if (!(variance > 0.0)) throw std::invalid_argument("ks_normal: variance must be positive");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size()), sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = 0.5 * std::erfc(-s[i] / (sd * std::sqrt(2.0)));
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return finish(d, n);
}

Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("moments: need at least two values");
  const double n = static_cast<double>(x.size());
  Moments out;
  for (double v : x) out.mean += v;
  out.mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - out.mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.variance = m2 * n / (n - 1.0);
  out.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
  return out;
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("regression_slope: need matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("regression_slope: constant abscissa");
  return sxy / sxx;
}

}  // namespace mbm
