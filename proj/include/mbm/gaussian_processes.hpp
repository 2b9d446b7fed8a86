#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbm/chaos_algebra.hpp"
#include "mbm/spectral_operators.hpp"

namespace mbm {

/// A C^1 Hurst function h: [0,1] -> [c, d] with 0 < c <= d < 1.
class HurstFunction {
 public:
  /// Validates the range and the derivative (against central differences to
  /// 1e-6) on a grid of `check_points` points, and records c, d and the
  /// Lipschitz estimate max |h'| on that grid.
  HurstFunction(std::string name, std::function<double(double)> h, std::function<double(double)> dh,
                int check_points = 1001);

  static HurstFunction constant(double H);
  /// a + (b - a) t
  static HurstFunction linear(double a, double b);
  /// m + A sin(pi t)
  static HurstFunction sine(double m, double amplitude);

  double operator()(double t) const { return h_(t); }
  double derivative(double t) const { return dh_(t); }
  const std::string& name() const { return name_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double lipschitz() const { return lipschitz_; }
  bool is_constant() const { return lipschitz_ == 0.0; }

 private:
  std::string name_;
  std::function<double(double)> h_, dh_;
  double lower_ = 0.0, upper_ = 0.0, lipschitz_ = 0.0;
};

/// E[B(t,H) B(s,H')] = c^2_{(H+H')/2}/(c_H c_H') (|t|^{H+H'} + |s|^{H+H'} - |t-s|^{H+H'})/2
double field_covariance(double t, double s, double H, double Hp);

/// field_covariance(t, s, h(t), h(s))
double mbm_covariance(double t, double s, const HurstFunction& h);

/// Chaos expansions of the Gaussian field B(t,H) and the processes built on it.
/// All objects are first-chaos vectors whose coefficients come from an
/// OperatorTable; queries outside the table grids raise std::out_of_range.
class GaussianField {
 public:
  explicit GaussianField(std::shared_ptr<const OperatorTable> table);

  const OperatorTable& table() const { return *table_; }
  int basis_size() const { return table_->size(); }

  /// B(t, H): coefficients int_0^t M_H(e_k)(s) ds.
  ChaosVector field_chaos(double t, double H) const;
  /// dB/dH(t, H): coefficients int_0^t dM_H/dH(e_k)(s) ds.
  ChaosVector dB_dH_chaos(double t, double H) const;
  /// W^H_t: coefficients M_H(e_k)(t).
  ChaosVector white_noise_fbm(double t, double H) const;
  /// W^h_t = W^{h(t)}_t + h'(t) dB/dH(t, h(t)).
  ChaosVector white_noise_mbm(double t, const HurstFunction& h) const;
  /// B^h_t = B(t, h(t)).
  ChaosVector mbm_chaos(double t, const HurstFunction& h) const;

  /// Coefficient matrices (K x n) for quantity q at the points (times[i], hurst[i]).
  Eigen::MatrixXd coefficients(Quantity q, std::span<const double> times, std::span<const double> hurst,
                               int workers = 1) const;

 private:
  std::shared_ptr<const OperatorTable> table_;
};

/// A process t -> B(t, exponent(t)) sampled through the field expansion:
/// fbm (constant exponent), mbm (exponent h), or patched (exponent h_n).
struct ProcessDescriptor {
  std::string name;
  std::function<double(double)> exponent;

  static ProcessDescriptor fbm(double H);
  static ProcessDescriptor mbm(const HurstFunction& h);
};

/// Seeded i.i.d. standard normal coordinates xi[m][k] standing in for <., e_k>.
/// Sample m draws from its own generator seeded from (seed, m), so the matrix
/// does not depend on how many workers fill it.
class GaussianEnsemble {
 public:
  GaussianEnsemble(std::uint64_t seed, int samples, int basis_size, int workers = 1);

  std::uint64_t seed() const { return seed_; }
  int samples() const { return static_cast<int>(xi_.rows()); }
  int basis_size() const { return static_cast<int>(xi_.cols()); }
  /// samples x K
  const Eigen::MatrixXd& coordinates() const { return xi_; }

 private:
  std::uint64_t seed_;
  Eigen::MatrixXd xi_;
};

/// paths(m, i) = sum_k coefficients(k, i) xi[m][k]  (samples x n)
Eigen::MatrixXd sample_paths(const Eigen::MatrixXd& coefficients, const GaussianEnsemble& ensemble);

/// Paths of a described process on t_grid.
Eigen::MatrixXd sample_paths(const ProcessDescriptor& process, std::span<const double> t_grid,
                             const GaussianField& field, const GaussianEnsemble& ensemble, int workers = 1);

struct HolderDiagnostic {
  /// Smallest Lambda with E[(B(t,H) - B(s,H'))^2] <= Lambda (|t-s|^{2c} + |H-H'|^2)
  /// over all grid pairs and, when the Hurst grid has two or more points, the
  /// limits H' -> H at the grid points; c = min of the Hurst grid.
  double lambda = 0.0;
  double c = 0.0;
  /// Log-log slope of E[(B(t,H) - B(s,H))^2] in |t-s| per grid H (constant exponent).
  std::vector<double> hurst;
  std::vector<double> exponents;
};

/// Increment diagnostics from the closed-form field covariance.
HolderDiagnostic holder_diagnostic(std::span<const double> t_grid, std::span<const double> hurst_grid);

struct DerivativeBound {
  /// Smallest Delta with ||dB/dH(t,H) - dB/dH(s,H')||_0^2 <= Delta (|t-s|^2 + |H-H'|^2).
  double delta = 0.0;
};

/// Fits the Lipschitz-type constant of dB/dH over the grid from chaos coefficients.
DerivativeBound derivative_bound(const GaussianField& field, std::span<const double> t_grid,
                                 std::span<const double> hurst_grid, int workers = 1);

}  // namespace mbm
