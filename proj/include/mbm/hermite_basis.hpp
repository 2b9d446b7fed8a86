#pragma once

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "mbm/quadrature.hpp"

namespace mbm {

/// Values e_0(x), ..., e_{count-1}(x) of the normalized Hermite functions.
///
/// Uses the recurrence on the functions themselves,
///   e_{n+1}(x) = sqrt(2/(n+1)) x e_n(x) - sqrt(n/(n+1)) e_{n-1}(x),
/// carrying the Gaussian factor exp(-x^2/2) as a separate logarithmic scale so
/// that neither the Gaussian nor the polynomial part leaves the floating-point
/// range. Magnitudes below 1e-300 are flushed to zero.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> hermite_functions(int count, const Scalar& x) {
  using std::abs;
  using std::atan;
  using std::exp;
  using std::log;
  using std::sqrt;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(count);
  if (count <= 0) return out;

  const Scalar rescale_above(1e150);
  const Scalar rescale_by(1e-150);
  const Scalar log_rescale = log(rescale_above);
  const Scalar flush_below(1e-300);

  Scalar log_scale = -x * x / Scalar(2);
  Scalar prev(0);
  Scalar cur = Scalar(1) / sqrt(sqrt(Scalar(4) * atan(Scalar(1))));

  auto store = [&](int n, const Scalar& p) {
    if (p == Scalar(0)) {
      out[n] = Scalar(0);
      return;
    }
    const Scalar log_mag = log_scale + log(abs(p));
    Scalar v = log_mag < log(flush_below) ? Scalar(0) : exp(log_mag);
    out[n] = p < Scalar(0) ? Scalar(-v) : v;
  };

  store(0, cur);
  for (int n = 0; n + 1 < count; ++n) {
    const Scalar next = sqrt(Scalar(2) / Scalar(n + 1)) * x * cur - sqrt(Scalar(n) / Scalar(n + 1)) * prev;
    prev = cur;
    cur = next;
    if (abs(cur) > rescale_above) {
      cur *= rescale_by;
      prev *= rescale_by;
      log_scale += log_rescale;
    }
    store(n + 1, cur);
  }
  return out;
}

/// The orthonormal Hermite basis e_0..e_{K-1} of L^2(R) on the evaluation
/// domain [-T, T]; values outside the domain are treated as zero.
///
/// Immutable after construction.
class HermiteBasis {
 public:
  /// Default domain: the smallest T past the last turning point sqrt(2K+1)
  /// with |e_{K-1}|, |e_{K-2}| below 1e-16 beyond it.
  explicit HermiteBasis(int size);
  HermiteBasis(int size, double domain);

  int size() const { return size_; }
  double domain() const { return domain_; }

  /// e_n(x); throws std::invalid_argument for n outside [0, K).
  double operator()(int n, double x) const;

  /// All K values at x.
  Eigen::VectorXd values(double x) const;

  /// K x xs.size() matrix of values.
  Eigen::MatrixXd values(std::span<const double> xs) const;

  /// Integral of e_n over [0, t] (negative t integrates backwards).
  double cumulative_integral(int n, double t) const;

  /// Integrals of all e_n over [0, t].
  Eigen::VectorXd cumulative_integrals(double t) const;

  /// Gram matrix <e_i, e_j> under the basis quadrature on [-T, T].
  Eigen::MatrixXd gram() const;

  /// Composite Gauss-Legendre rule the basis integrates with on [a, b].
  QuadratureRule quadrature(double a, double b) const;

 private:
  void check_index(int n) const;

  int size_;
  double domain_;
};

}  // namespace mbm
