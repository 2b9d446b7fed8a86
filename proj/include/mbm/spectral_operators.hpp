#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mbm/hermite_basis.hpp"

namespace mbm {

/// c_H = (2 cos(pi H) Gamma(2-2H) / (H (1-2H)))^{1/2}, continuous through H = 1/2
/// where it equals sqrt(2 pi). Throws std::domain_error outside (0, 1).
double c_of_H(double H);

/// beta_H = d/dH log c_H, the constant in the symbol of dM_H/dH.
double beta_of_H(double H);

/// Digamma function for positive arguments.
double digamma(double x);

/// Which operator quantities a batch evaluation should produce.
enum Quantity : unsigned {
  kM = 1u,        ///< M_H(e_k)(t)
  kDM = 2u,       ///< dM_H/dH(e_k)(t)
  kCumM = 4u,     ///< int_0^t M_H(e_k)(s) ds
  kCumDM = 8u,    ///< int_0^t dM_H/dH(e_k)(s) ds
  kAllQuantities = 15u,
};

struct SpectralPoint {
  double hurst;
  double time;
};

/// K x n matrices, one column per requested point; unrequested ones are empty.
struct OperatorColumns {
  Eigen::MatrixXd m, dm, cum_m, cum_dm;
};

struct SpectralOptions {
  /// Times are restricted to [-max_time, max_time]; the frequency quadrature
  /// is sized to resolve cos(t y) on that range.
  double max_time = 1.0;
  /// Geometric grading of the panels on [0, 1/4] that absorb the |y|^{1/2-H}
  /// and log|y| singularities at the origin.
  double graded_ratio = 0.25;
  int graded_levels = 40;
  int graded_order = 16;
  /// Nodes per unit panel on [1/4, T]; 0 selects ceil((sqrt(2K+1)+max_time)/2)+12.
  int panel_order = 0;
};

/// Fourier-multiplier operators M_H and dM_H/dH applied to Hermite functions.
///
/// The Hermite functions are eigenfunctions of the unitary Fourier transform,
/// so for even k
///   M_H(e_k)(t) = (-1)^{k/2} (2/c_H) int_0^inf y^{1/2-H} e_k(y) cos(t y) dy,
/// and the odd case replaces cos by sin with sign (-1)^{(k-1)/2}. Integrating in
/// t under the y-integral turns cos(t y) into sin(t y)/y and sin(t y) into
/// (1 - cos(t y))/y, so the cumulative integrals are computed by the same
/// frequency quadrature rather than by time stepping.
///
/// Immutable after construction.
class SpectralOperators {
 public:
  explicit SpectralOperators(HermiteBasis basis, SpectralOptions options = {});

  const HermiteBasis& basis() const { return basis_; }
  const SpectralOptions& options() const { return options_; }
  int size() const { return basis_.size(); }
  Eigen::Index frequency_nodes() const { return nodes_.size(); }

  double apply_M(int k, double H, double t) const;
  double apply_dM(int k, double H, double t) const;
  double cumulative_M(int k, double H, double t) const;
  double cumulative_dM(int k, double H, double t) const;

  /// Batch evaluation over points, requested quantities given as a Quantity mask.
  OperatorColumns evaluate(std::span<const SpectralPoint> points, unsigned quantities, int workers = 1) const;

  /// Checks H in (0,1) and |t| <= max_time; throws std::domain_error / std::out_of_range.
  void check_point(double H, double t) const;

 private:
  double single(int k, double H, double t, Quantity q) const;

  HermiteBasis basis_;
  SpectralOptions options_;
  Eigen::VectorXd nodes_, weights_, log_nodes_;
  Eigen::MatrixXd even_rows_, odd_rows_;  // e_k(y_j) for even / odd k
};

/// Cached operator values on a (H, t) grid, plus exact evaluation between nodes.
///
/// Grid values are stored for every k; lookups that hit a grid node are served
/// from the cache, other points inside the grid hull are evaluated directly by
/// the underlying SpectralOperators. Points outside the hull raise
/// std::out_of_range. Immutable after construction.
class OperatorTable {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  OperatorTable(std::shared_ptr<const SpectralOperators> ops, std::vector<double> hurst_grid,
                std::vector<double> time_grid, int workers = 1);

  /// Hash of everything that determines the table contents.
  static std::uint64_t content_hash(const SpectralOperators& ops, std::span<const double> hurst_grid,
                                    std::span<const double> time_grid);
  std::uint64_t content_hash() const { return hash_; }

  void save(const std::filesystem::path& file) const;
  /// Loads a cache file; throws std::runtime_error when it is missing, corrupt,
  /// or was built for a different configuration.
  static OperatorTable load(const std::filesystem::path& file, std::shared_ptr<const SpectralOperators> ops,
                            std::vector<double> hurst_grid, std::vector<double> time_grid);
  /// Reuses `dir/operator_table_<hash>.bin` when valid, otherwise builds and
  /// saves it. `built` reports whether a computation happened.
  static OperatorTable load_or_build(const std::filesystem::path& dir, std::shared_ptr<const SpectralOperators> ops,
                                     std::vector<double> hurst_grid, std::vector<double> time_grid, bool force,
                                     int workers, bool* built = nullptr);
  static std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t hash);

  const SpectralOperators& operators() const { return *ops_; }
  std::shared_ptr<const SpectralOperators> shared_operators() const { return ops_; }
  int size() const { return ops_->size(); }
  const std::vector<double>& hurst_grid() const { return hurst_; }
  const std::vector<double>& time_grid() const { return time_; }

  /// Cached grid entry for quantity q at grid indices (ih, it).
  double cached(Quantity q, int k, std::size_t ih, std::size_t it) const;

  double apply_M(int k, double H, double t) const;
  double apply_dM(int k, double H, double t) const;
  double cumulative_M(int k, double H, double t) const;
  double cumulative_dM(int k, double H, double t) const;

  /// Batch access with the same cache-or-evaluate rule.
  OperatorColumns columns(std::span<const SpectralPoint> points, unsigned quantities, int workers = 1) const;

  /// Throws std::out_of_range when (H, t) lies outside the grid hull.
  void check_range(double H, double t) const;

 private:
  OperatorTable() = default;
  const Eigen::MatrixXd& storage(Quantity q) const;
  double point(int k, double H, double t, Quantity q) const;
  std::optional<std::size_t> grid_column(double H, double t) const;

  std::shared_ptr<const SpectralOperators> ops_;
  std::vector<double> hurst_, time_;
  std::uint64_t hash_ = 0;
  Eigen::MatrixXd m_, dm_, cum_m_, cum_dm_;  // K x (nH * nt), column ih * nt + it
};

}  // namespace mbm
