#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbm/chaos_algebra.hpp"
#include "mbm/gaussian_processes.hpp"
#include "mbm/partition_scheme.hpp"
#include "mbm/quadrature.hpp"

namespace mbm {

/// Values of an integrand of chaos order at most one at n quadrature nodes:
/// Y_{t_i} = c0[i] + sum_k c1(k, i) <., e_k>.
struct LinearPath {
  Eigen::VectorXd c0;
  Eigen::MatrixXd c1;  // K x n
};

/// A curve t -> Y_t of chaos vectors with its declared Bochner index p0.
class IntegrandProcess {
 public:
  using Linear = std::function<LinearPath(std::span<const double> times)>;
  using General = std::function<ChaosVector(double t)>;

  /// Y = value (deterministic), p0 = 0.
  static IntegrandProcess constant(int basis_size, double value = 1.0);
  /// Y_t = B^h_t, p0 = 0.
  static IntegrandProcess mbm(std::shared_ptr<const GaussianField> field, const HurstFunction& h);
  /// Y_t = B^H_t, p0 = 0.
  static IntegrandProcess fbm(std::shared_ptr<const GaussianField> field, double H);
  static IntegrandProcess linear(std::string name, int basis_size, int p0, Linear values);
  /// Arbitrary chaos order; only usable with the sparse routines.
  static IntegrandProcess general(std::string name, int basis_size, int p0, General values);

  const std::string& name() const { return name_; }
  int basis_size() const { return basis_size_; }
  int index() const { return p0_; }
  bool is_linear() const { return static_cast<bool>(linear_); }

  /// Throws std::logic_error for general integrands.
  LinearPath linear_values(std::span<const double> times) const;
  ChaosVector at(double t) const;

 private:
  IntegrandProcess(std::string name, int basis_size, int p0) : name_(std::move(name)), basis_size_(basis_size), p0_(p0) {}

  std::string name_;
  int basis_size_;
  int p0_;
  Linear linear_;
  General general_;
};

/// A chaos-vector curve failed the Bochner condition.
class IntegrabilityError : public std::runtime_error {
 public:
  IntegrabilityError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

/// sum_i w_i Phi(t_i) over the grid; checks that t -> ||Phi_t||_{-p} is finite.
ChaosVector bochner_integral(const IntegrandProcess& phi, const QuadratureGrid& grid, int p = 0);

/// Sparse reference assembly of int Y_t <> V_t dt for integrands of any order,
/// with V given as a first-chaos coefficient function.
ChaosVector wick_integral_sparse(const IntegrandProcess& Y, const std::function<Eigen::VectorXd(double)>& noise,
                                 const QuadratureGrid& grid);

/// An integral of an order-at-most-one integrand, with the index bookkeeping
/// (p0 of the integrand, q(p0) of the result).
struct WickIntegral {
  QuadraticChaos value;
  int p0 = 0;
  int q = 2;
};

struct IntegrationOptions {
  /// The time grid has 2^panels_level equal panels, so every partition level
  /// up to panels_level has its nodes on panel boundaries.
  int panels_level = 10;
  int order = 5;
  int workers = 1;
  /// Consecutive-difference threshold for the lumped limit.
  double limit_tolerance = 1e-8;
  /// Maximal depth of the extrapolation table along the lumped sequence.
  int extrapolation_depth = 4;
};

struct LimitTraceEntry {
  int level = 0;
  std::uint64_t cells = 0;
  /// ||lumped_n - int Y <> W^{h(.)}||_{-q(p0)}
  double distance = 0.0;
  /// gamma int ||Y_t||_{-p*} |h - h_n| dt, p* = max(p0, 2)
  double ceiling = 0.0;
  /// ||lumped_n - lumped_{n-1}||_{-q(p0)}
  double raw_change = 0.0;
  /// Change of the extrapolated limit estimate.
  double extrapolated_change = 0.0;
};

struct LimitingResult {
  WickIntegral value;         ///< lim lumped + correction
  WickIntegral lumped_limit;  ///< extrapolated lim_n lumped_n
  WickIntegral correction;
  std::vector<LimitTraceEntry> trace;
  double gamma = 0.0;
  /// Last extrapolated change, the accuracy claimed for lumped_limit.
  double residual = 0.0;
  int converged_level = -1;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<LimitTraceEntry> t)
      : std::runtime_error(what), trace(std::move(t)) {}
  std::vector<LimitTraceEntry> trace;
};

struct ComparisonReport {
  double gap = 0.0;             ///< ||limiting - multifractional||_{-q}
  double reference_norm = 0.0;  ///< ||multifractional||_{-q}
  double ratio = 0.0;
  double allowed = 0.0;  ///< 1e-6 + residual / reference_norm
  bool passed = false;
  int q = 2;
  LimitingResult limiting;
  WickIntegral multifractional;
};

/// Wick-Ito integrals of order-at-most-one integrands on a shared time grid.
/// All integrals are sum_i w_i Y_{t_i} <> V_{t_i} for a first-chaos noise V,
/// assembled densely: the first chaos is V (w o c0), the second the symmetric
/// part of c1 diag(w) V^T.
class WickItoIntegrator {
 public:
  WickItoIntegrator(std::shared_ptr<const GaussianField> field, IntegrationOptions options = {});

  const GaussianField& field() const { return *field_; }
  const IntegrationOptions& options() const { return options_; }
  const QuadratureGrid& grid() const { return grid_; }

  /// int_a^b Y_s <> W^H_s ds
  WickIntegral integrate_wrt_fbm(const IntegrandProcess& Y, double H, double a = 0.0, double b = 1.0) const;
  /// int_0^1 Y_t <> W^{h_n(t)}_t dt on the step noise.
  WickIntegral integrate_wrt_lumped(const IntegrandProcess& Y, const HurstFunction& h, const PartitionScheme& scheme,
                                    int n) const;
  /// The same integral assembled cell by cell from fBm integrals.
  WickIntegral integrate_wrt_lumped_cells(const IntegrandProcess& Y, const HurstFunction& h,
                                          const PartitionScheme& scheme, int n) const;
  /// int_a^b Y_t <> W^{h(t)}_t dt
  WickIntegral integrate_frozen(const IntegrandProcess& Y, const HurstFunction& h, double a = 0.0,
                                double b = 1.0) const;
  /// int_a^b h'(t) Y_t <> dB/dH(t, h(t)) dt
  WickIntegral correction_term(const IntegrandProcess& Y, const HurstFunction& h, double a = 0.0,
                               double b = 1.0) const;
  /// int_a^b Y_t <> W^h_t dt
  WickIntegral integrate_multifractional(const IntegrandProcess& Y, const HurstFunction& h, double a = 0.0,
                                         double b = 1.0) const;

  /// lim_n lumped_n + correction, levels 0..max_level of the scheme. Throws
  /// NonConvergenceError when the extrapolated sequence does not settle.
  LimitingResult limiting_integral(const IntegrandProcess& Y, const HurstFunction& h, const PartitionScheme& scheme,
                                   int max_level) const;

  ComparisonReport comparison_check(const IntegrandProcess& Y, const HurstFunction& h, const PartitionScheme& scheme,
                                    int max_level) const;

  /// max over a (t, H) grid covering [0,1] x [h.lower(), h.upper()] of
  /// ||dW^H_t/dH||_{-p}, the Lipschitz constant of H -> W^H_t in ||.||_{-p}.
  double fit_gamma(const HurstFunction& h, int p) const;

 private:
  struct Nodes {
    std::vector<double> t;
    Eigen::VectorXd w;
  };
  Nodes nodes_on(double a, double b) const;
  WickIntegral assemble(const IntegrandProcess& Y, const Nodes& nodes, const Eigen::MatrixXd& noise) const;
  WickIntegral assemble(const LinearPath& y, int p0, const Nodes& nodes, const Eigen::MatrixXd& noise) const;
  WickIntegral lumped(const LinearPath& y, int p0, const Nodes& nodes, const HurstFunction& h,
                      const PartitionScheme& scheme, int n) const;
  Eigen::MatrixXd noise(const std::vector<double>& t, const std::vector<double>& hurst,
                        const std::vector<double>& m_scale, const std::vector<double>& dm_scale) const;

  std::shared_ptr<const GaussianField> field_;
  IntegrationOptions options_;
  QuadratureGrid grid_;
};

struct LipschitzDiagnostic {
  int p0 = 2;
  double gamma = 0.0;          ///< max ratio at the given spacing
  double gamma_refined = 0.0;  ///< max ratio with the Hurst spacing halved
  double relative_change = 0.0;
  bool stable = false;  ///< relative_change <= 10%
};

/// max over the grid of ||W^a_t - W^a'_t||_{-p0} / |a - a'| over adjacent Hurst
/// pairs, and the same with midpoints inserted. Requires p0 >= 2.
LipschitzDiagnostic lipschitz_W_diagnostic(const GaussianField& field, std::span<const double> hurst_grid,
                                           std::span<const double> t_grid, int p0, int workers = 1);

}  // namespace mbm
