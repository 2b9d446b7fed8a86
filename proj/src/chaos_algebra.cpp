#include "mbm/chaos_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mbm {

MultiIndex::MultiIndex(std::vector<std::pair<int, int>> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [mode, power] : entries) {
    if (mode < 0 || power < 0) throw std::invalid_argument("MultiIndex: negative mode or power");
    if (power == 0) continue;
    if (!entries_.empty() && entries_.back().first == mode)
      entries_.back().second += power;
    else
      entries_.emplace_back(mode, power);
  }
}

MultiIndex MultiIndex::unit(int mode, int power) { return MultiIndex({{mode, power}}); }

int MultiIndex::degree() const {
  int d = 0;
  for (const auto& e : entries_) d += e.second;
  return d;
}

int MultiIndex::power(int mode) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(mode, 0));
  return (it != entries_.end() && it->first == mode) ? it->second : 0;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (const auto& e : entries_)
    for (int i = 2; i <= e.second; ++i) f *= i;
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  MultiIndex out;
  out.entries_.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin(), b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      out.entries_.push_back(*a++);
    } else if (a == entries_.end() || b->first < a->first) {
      out.entries_.push_back(*b++);
    } else {
      out.entries_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ChaosVector::ChaosVector(int basis_size, int order) : basis_size_(basis_size), order_(order) {
  if (basis_size < 1) throw std::invalid_argument("ChaosVector: basis size must be positive");
  if (order < 0) throw std::invalid_argument("ChaosVector: negative chaos order");
}

ChaosVector ChaosVector::constant(int basis_size, double value, int order) {
  ChaosVector v(basis_size, order);
  v.set(MultiIndex{}, value);
  return v;
}

ChaosVector ChaosVector::first_chaos(const Eigen::VectorXd& coefficients, int order) {
  ChaosVector v(static_cast<int>(coefficients.size()), std::max(order, 1));
  for (Eigen::Index k = 0; k < coefficients.size(); ++k)
    if (coefficients[k] != 0.0) v.terms_.emplace(MultiIndex::unit(static_cast<int>(k)), coefficients[k]);
  return v;
}

void ChaosVector::check(const MultiIndex& alpha) const {
  if (alpha.max_mode() >= basis_size_)
    throw std::invalid_argument("multi-index mode " + std::to_string(alpha.max_mode()) + " exceeds basis size " +
                                std::to_string(basis_size_));
  if (alpha.degree() > order_)
    throw std::invalid_argument("multi-index degree " + std::to_string(alpha.degree()) + " exceeds chaos order " +
                                std::to_string(order_));
}

double ChaosVector::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

Eigen::VectorXd ChaosVector::first_chaos_coefficients() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis_size_);
  for (const auto& [alpha, value] : terms_)
    if (alpha.degree() == 1) c[alpha.entries().front().first] = value;
  return c;
}

void ChaosVector::set(const MultiIndex& alpha, double value) {
  check(alpha);
  if (value == 0.0)
    terms_.erase(alpha);
  else
    terms_[alpha] = value;
}

void ChaosVector::add(const MultiIndex& alpha, double value) {
  check(alpha);
  if (value == 0.0) return;
  auto [it, inserted] = terms_.emplace(alpha, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) terms_.erase(it);
  }
}

ChaosVector ChaosVector::with_order(int order) const {
  ChaosVector v(basis_size_, order);
  for (const auto& [alpha, value] : terms_) v.set(alpha, value);
  return v;
}

bool ChaosVector::all_finite() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return std::isfinite(t.second); });
}

ChaosVector& ChaosVector::operator+=(const ChaosVector& other) {
  if (other.basis_size_ != basis_size_) throw std::invalid_argument("ChaosVector: basis size mismatch");
  order_ = std::max(order_, other.order_);
  for (const auto& [alpha, value] : other.terms_) add(alpha, value);
  return *this;
}

ChaosVector& ChaosVector::operator-=(const ChaosVector& other) {
  if (other.basis_size_ != basis_size_) throw std::invalid_argument("ChaosVector: basis size mismatch");
  order_ = std::max(order_, other.order_);
  for (const auto& [alpha, value] : other.terms_) add(alpha, -value);
  return *this;
}

ChaosVector& ChaosVector::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= s;
  return *this;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd hermite_weights(int basis_size, int p) {
  Eigen::VectorXd w(basis_size);
  for (int k = 0; k < basis_size; ++k) w[k] = std::pow(2.0 * k + 2.0, 2.0 * p);
  return w;
}

double norm_p(const ChaosVector& v, int p) {
  double sum = 0.0;
  for (const auto& [alpha, c] : v.terms()) {
    double w = alpha.factorial() * c * c;
    for (const auto& [k, a] : alpha.entries()) w *= std::pow(2.0 * k + 2.0, 2.0 * p * a);
    sum += w;
  }
  return std::sqrt(sum);
}

double s_transform(const ChaosVector& v, const TestFunction& eta) {
  if (eta.coefficients.size() < v.basis_size()) throw std::invalid_argument("s_transform: test function too short");
  double sum = 0.0;
  for (const auto& [alpha, c] : v.terms()) {
    double term = c;
    for (const auto& [k, a] : alpha.entries()) term *= std::pow(eta.coefficients[k], a);
    sum += term;
  }
  return sum;
}

ChaosVector wick_product(const ChaosVector& u, const ChaosVector& v) {
  if (u.basis_size() != v.basis_size()) throw std::invalid_argument("wick_product: basis size mismatch");
  ChaosVector out(u.basis_size(), u.order() + v.order());
  for (const auto& [a, ca] : u.terms())
    for (const auto& [b, cb] : v.terms()) out.add(a + b, ca * cb);
  return out;
}

double pairing(const ChaosVector& v, const ChaosVector& phi) {
  if (v.basis_size() != phi.basis_size()) throw std::invalid_argument("pairing: basis size mismatch");
  const ChaosVector& small = v.nonzeros() <= phi.nonzeros() ? v : phi;
  const ChaosVector& large = v.nonzeros() <= phi.nonzeros() ? phi : v;
  double sum = 0.0;
  for (const auto& [alpha, c] : small.terms()) {
    const double d = large.coefficient(alpha);
    if (d != 0.0) sum += alpha.factorial() * c * d;
  }
  return sum;
}

double evaluate(const ChaosVector& v, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) < v.basis_size()) throw std::invalid_argument("evaluate: coordinate vector too short");
  double sum = 0.0;
  for (const auto& [alpha, c] : v.terms()) {
    double term = c;
    for (const auto& [k, a] : alpha.entries()) {
      const double x = xi[k];
      double prev = 1.0, cur = x;
      for (int n = 1; n < a; ++n) {
        const double next = x * cur - n * prev;
        prev = cur;
        cur = next;
      }
      term *= cur;
    }
    sum += term;
  }
  return sum;
}

double d_weight(double r) {
  if (!(r > 0.5)) throw std::domain_error("d_weight: series diverges for r <= 1/2");
  const double s = 2.0 * r;
  // Direct sum up to N, then Euler-Maclaurin for the tail sum_{n>N} n^{-s}.
  const int N = 64;
  double sum = 0.0;
  for (int n = N; n >= 1; --n) sum += std::pow(n, -s);
  const double tail = std::pow(N, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(N, -s) + s / 12.0 * std::pow(N, -s - 1.0) -
                      s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(N, -s - 3.0);
  return std::pow(2.0, -s) * (sum + tail);
}

int q_of_p(int p0) {
  if (p0 < 0) throw std::invalid_argument("q_of_p: negative index");
  return p0 == 0 ? 2 : std::max(p0 + 1, 3);
}

// ---------------------------------------------------------------------------

QuadraticChaos QuadraticChaos::zero(int basis_size) {
  return {0.0, Eigen::VectorXd::Zero(basis_size), Eigen::MatrixXd::Zero(basis_size, basis_size)};
}

QuadraticChaos QuadraticChaos::from_chaos(const ChaosVector& v) {
  QuadraticChaos q = zero(v.basis_size());
  for (const auto& [alpha, c] : v.terms()) {
    const auto& e = alpha.entries();
    switch (alpha.degree()) {
      case 0: q.c0 = c; break;
      case 1: q.c1[e[0].first] = c; break;
      case 2:
        if (e.size() == 1) {
          q.c2(e[0].first, e[0].first) = c;
        } else {
          q.c2(e[0].first, e[1].first) = 0.5 * c;
          q.c2(e[1].first, e[0].first) = 0.5 * c;
        }
        break;
      default: throw std::invalid_argument("QuadraticChaos: chaos order above 2");
    }
  }
  return q;
}

ChaosVector QuadraticChaos::to_chaos(int order) const {
  const int K = basis_size();
  ChaosVector v(K, std::max(order, 2));
  v.set(MultiIndex{}, c0);
  for (int j = 0; j < K; ++j) v.set(MultiIndex::unit(j), c1[j]);
  for (int j = 0; j < K; ++j) {
    v.set(MultiIndex::unit(j, 2), c2(j, j));
    for (int k = j + 1; k < K; ++k) v.set(MultiIndex({{j, 1}, {k, 1}}), c2(j, k) + c2(k, j));
  }
  return v;
}

QuadraticChaos& QuadraticChaos::operator+=(const QuadraticChaos& o) {
  c0 += o.c0;
  c1 += o.c1;
  c2 += o.c2;
  return *this;
}

QuadraticChaos& QuadraticChaos::operator-=(const QuadraticChaos& o) {
  c0 -= o.c0;
  c1 -= o.c1;
  c2 -= o.c2;
  return *this;
}

QuadraticChaos& QuadraticChaos::operator*=(double s) {
  c0 *= s;
  c1 *= s;
  c2 *= s;
  return *this;
}

double norm_p(const QuadraticChaos& v, int p) {
  const Eigen::VectorXd w = hermite_weights(v.basis_size(), p);
  const double first = (v.c1.array().square() * w.array()).sum();
  const double second = 2.0 * (w.asDiagonal() * v.c2.cwiseAbs2() * w.asDiagonal()).sum();
  return std::sqrt(v.c0 * v.c0 + first + second);
}

double pairing(const QuadraticChaos& u, const QuadraticChaos& v) {
  return u.c0 * v.c0 + u.c1.dot(v.c1) + 2.0 * u.c2.cwiseProduct(v.c2).sum();
}

}  // namespace mbm
