#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mbm {

/// Hermite multi-index stored sparsely as (mode, power) pairs with strictly
/// increasing modes and positive powers.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// Accepts pairs in any order; repeated modes are merged and zero powers dropped.
  explicit MultiIndex(std::vector<std::pair<int, int>> entries);

  static MultiIndex unit(int mode, int power = 1);

  const std::vector<std::pair<int, int>>& entries() const { return entries_; }
  int degree() const;
  int max_mode() const { return entries_.empty() ? -1 : entries_.back().first; }
  int power(int mode) const;
  /// alpha! = prod_k alpha_k!
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<std::pair<int, int>> entries_;
};

/// Truncated Hida element: coefficients c_alpha over Wick monomials H_alpha in
/// the coordinates <., e_k>, k < K, of total degree at most the chaos order.
class ChaosVector {
 public:
  using Terms = std::map<MultiIndex, double>;

  ChaosVector(int basis_size, int order);

  static ChaosVector constant(int basis_size, double value, int order = 0);
  /// sum_k coefficients[k] <., e_k>
  static ChaosVector first_chaos(const Eigen::VectorXd& coefficients, int order = 1);

  int basis_size() const { return basis_size_; }
  int order() const { return order_; }
  const Terms& terms() const { return terms_; }
  std::size_t nonzeros() const { return terms_.size(); }

  double coefficient(const MultiIndex& alpha) const;
  /// Zeroth coefficient c_0 = E[v] when v is square integrable.
  double expectation() const { return coefficient(MultiIndex{}); }
  /// First-chaos coefficients as a dense K-vector.
  Eigen::VectorXd first_chaos_coefficients() const;

  /// Throws std::invalid_argument when alpha has a mode >= K or degree > order.
  void set(const MultiIndex& alpha, double value);
  void add(const MultiIndex& alpha, double value);

  /// Same vector viewed with a larger chaos order.
  ChaosVector with_order(int order) const;

  bool all_finite() const;

  ChaosVector& operator+=(const ChaosVector& other);
  ChaosVector& operator-=(const ChaosVector& other);
  ChaosVector& operator*=(double s);

  friend ChaosVector operator+(ChaosVector a, const ChaosVector& b) { return a += b; }
  friend ChaosVector operator-(ChaosVector a, const ChaosVector& b) { return a -= b; }
  friend ChaosVector operator*(ChaosVector a, double s) { return a *= s; }
  friend ChaosVector operator*(double s, ChaosVector a) { return a *= s; }

  friend bool operator==(const ChaosVector&, const ChaosVector&) = default;

 private:
  void check(const MultiIndex& alpha) const;

  int basis_size_;
  int order_;
  Terms terms_;
};

/// First-level data d_k = <eta, e_k> of a test function eta.
struct TestFunction {
  Eigen::VectorXd coefficients;
};

/// (2k+2)^{2p} for k < K.
Eigen::VectorXd hermite_weights(int basis_size, int p);

/// (sum_alpha alpha! c_alpha^2 prod_k (2k+2)^{2 p alpha_k})^{1/2}
double norm_p(const ChaosVector& v, int p);

/// S(v)(eta) = sum_alpha c_alpha prod_k d_k^{alpha_k}
double s_transform(const ChaosVector& v, const TestFunction& eta);

/// H_alpha <> H_beta = H_{alpha+beta}; the result has order N_c(u) + N_c(v).
ChaosVector wick_product(const ChaosVector& u, const ChaosVector& v);

/// <<v, phi>> = sum_alpha alpha! c_alpha(v) c_alpha(phi)
double pairing(const ChaosVector& v, const ChaosVector& phi);

/// Value of v at the coordinates <omega, e_k> = xi_k, where H_alpha(xi) =
/// prod_k He_{alpha_k}(xi_k) with probabilists' Hermite polynomials.
double evaluate(const ChaosVector& v, std::span<const double> xi);

/// D(r) = 2^{-2r} sum_{n>=1} n^{-2r}; throws std::domain_error for r <= 1/2.
double d_weight(double r);

/// 2 for p0 = 0, max(p0 + 1, 3) otherwise.
int q_of_p(int p0);

/// Dense representation of an element of chaos order at most 2:
///   c0 + sum_j c1_j <., e_j> + sum_{j,k} C_jk (<., e_j> <> <., e_k>)
/// with C symmetric. This is the shape of every Wick-Ito integral of an
/// integrand of order at most one.
struct QuadraticChaos {
  double c0 = 0.0;
  Eigen::VectorXd c1;
  Eigen::MatrixXd c2;

  static QuadraticChaos zero(int basis_size);
  static QuadraticChaos from_chaos(const ChaosVector& v);

  int basis_size() const { return static_cast<int>(c1.size()); }
  ChaosVector to_chaos(int order = 2) const;

  QuadraticChaos& operator+=(const QuadraticChaos& o);
  QuadraticChaos& operator-=(const QuadraticChaos& o);
  QuadraticChaos& operator*=(double s);
  friend QuadraticChaos operator+(QuadraticChaos a, const QuadraticChaos& b) { return a += b; }
  friend QuadraticChaos operator-(QuadraticChaos a, const QuadraticChaos& b) { return a -= b; }
  friend QuadraticChaos operator*(QuadraticChaos a, double s) { return a *= s; }
  friend QuadraticChaos operator*(double s, QuadraticChaos a) { return a *= s; }
};

double norm_p(const QuadraticChaos& v, int p);
double pairing(const QuadraticChaos& u, const QuadraticChaos& v);

}  // namespace mbm
