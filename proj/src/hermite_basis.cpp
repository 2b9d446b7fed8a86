#include "mbm/hermite_basis.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mbm {

namespace {

// Panel width and order of the spatial quadrature. e_{K-1} oscillates with
// local wavenumber at most sqrt(2K+1); 24 nodes on a panel of width 0.5 resolve
// that comfortably for K up to ~2000.
constexpr double kPanelWidth = 0.5;
constexpr int kPanelOrder = 24;

double default_domain(int size) {
  double x = std::sqrt(2.0 * size + 1.0);
  for (;; x += 0.05) {
    const Eigen::VectorXd v = hermite_functions<double>(size, x);
    const double tail = std::max(std::abs(v[size - 1]), size > 1 ? std::abs(v[size - 2]) : 0.0);
    if (tail < 1e-16) break;
  }
  return x;
}

}  // namespace

HermiteBasis::HermiteBasis(int size) : HermiteBasis(size, size >= 1 ? default_domain(size) : 1.0) {}

HermiteBasis::HermiteBasis(int size, double domain) : size_(size), domain_(domain) {
  if (size < 1) throw std::invalid_argument("HermiteBasis: size must be >= 1");
  if (!(domain > 0.0)) throw std::invalid_argument("HermiteBasis: domain must be positive");
}

void HermiteBasis::check_index(int n) const {
  if (n < 0 || n >= size_)
    throw std::invalid_argument("Hermite index " + std::to_string(n) + " outside [0, " + std::to_string(size_) + ")");
}

double HermiteBasis::operator()(int n, double x) const {
  check_index(n);
  if (!std::isfinite(x)) throw std::invalid_argument("Hermite argument must be finite");
  if (std::abs(x) > domain_) return 0.0;
  return hermite_functions<double>(n + 1, x)[n];
}

Eigen::VectorXd HermiteBasis::values(double x) const {
  if (std::abs(x) > domain_) return Eigen::VectorXd::Zero(size_);
  return hermite_functions<double>(size_, x);
}

Eigen::MatrixXd HermiteBasis::values(std::span<const double> xs) const {
  Eigen::MatrixXd out(size_, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = values(xs[j]);
  return out;
}

QuadratureRule HermiteBasis::quadrature(double a, double b) const {
  return composite_gauss_legendre(a, b, kPanelWidth, kPanelOrder);
}

double HermiteBasis::cumulative_integral(int n, double t) const {
  check_index(n);
  if (t == 0.0) return 0.0;
  const double end = std::clamp(t, -domain_, domain_);
  const QuadratureRule rule = quadrature(0.0, end);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    sum += rule.weights[i] * hermite_functions<double>(n + 1, rule.nodes[i])[n];
  return sum;
}

Eigen::VectorXd HermiteBasis::cumulative_integrals(double t) const {
  if (t == 0.0) return Eigen::VectorXd::Zero(size_);
  const double end = std::clamp(t, -domain_, domain_);
  const QuadratureRule rule = quadrature(0.0, end);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(size_);
  for (Eigen::Index i = 0; i < rule.size(); ++i) sum += rule.weights[i] * hermite_functions<double>(size_, rule.nodes[i]);
  return sum;
}

Eigen::MatrixXd HermiteBasis::gram() const {
  const QuadratureRule rule = quadrature(-domain_, domain_);
  const Eigen::MatrixXd v = values(std::span<const double>(rule.nodes.data(), static_cast<std::size_t>(rule.size())));
  return v * rule.weights.asDiagonal() * v.transpose();
}

}  // namespace mbm
