#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mbm/chaos_algebra.hpp"
#include "mbm/gaussian_processes.hpp"
#include "mbm/statistics.hpp"

namespace mbm {

/// Nested subdivisions x^{(n)}_k = k / q_n of [0, 1], n = 0..N.
class PartitionScheme {
 public:
  /// q_n = 2^n.
  static PartitionScheme dyadic(int max_level);
  /// Custom counts; requires q_0 = 1, 2^n <= q_n <= 2^{2^n} and q_n | q_{n+1}.
  static PartitionScheme custom(std::vector<std::uint64_t> counts);

  int max_level() const { return static_cast<int>(counts_.size()) - 1; }
  std::uint64_t count(int n) const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// Cell index p with x_p <= t < x_{p+1}; t = 1 maps to the last cell.
  std::uint64_t cell(double t, int n) const;
  /// x^{(n)}_t, the left end of the level-n cell containing t in [0, 1).
  double left_node(double t, int n) const;
  /// h_n(t) = h(x^{(n)}_t) on [0, 1), h_n(1) = h(1).
  double step_hurst(const HurstFunction& h, double t, int n) const;

  /// sup_t |h(t) - h_n(t)| over `points` equally spaced samples.
  double sup_distance(const HurstFunction& h, int n, int points = 4097) const;

 private:
  explicit PartitionScheme(std::vector<std::uint64_t> counts);
  void check_level(int n) const;

  std::vector<std::uint64_t> counts_;
};

/// The patched process t -> B(t, h_n(t)).
ProcessDescriptor patched_descriptor(const PartitionScheme& scheme, const HurstFunction& h, int n);

/// B^{h_n}_t as a chaos vector.
ChaosVector patched_process_chaos(const GaussianField& field, const PartitionScheme& scheme, const HurstFunction& h,
                                  double t, int n);

struct KsMarginal {
  double time = 0.0;
  KsResult patched_vs_mbm;
  /// Root mean square of B^{h_n}_t - B^h_t on the shared ensemble.
  double coupled_rms = 0.0;
};

struct LawLevel {
  int level = 0;
  std::uint64_t cells = 0;
  double covariance_distance = 0.0;  ///< max |R_{h_n}(t_i, t_j) - R_h(t_i, t_j)|
  double hurst_distance = 0.0;       ///< sup |h - h_n|
  std::vector<KsMarginal> marginals;
};

struct LawConvergenceReport {
  std::vector<LawLevel> levels;
  /// max over levels of covariance_distance / hurst_distance.
  double rate_constant = 0.0;
  /// covariance distances nonincreasing along the requested levels.
  bool monotone = true;
};

struct LawConvergenceOptions {
  std::vector<int> levels;
  std::vector<double> t_grid;
  /// Grid indices of the marginals tested with Kolmogorov-Smirnov.
  std::vector<std::size_t> ks_indices;
  int samples = 10000;
  std::uint64_t seed = 42;
  int workers = 1;
};

/// Exact covariance distances between B^{h_n} and B^h on t_grid, plus
/// two-sample KS tests of their marginals. The patched sample and the
/// reference sample are drawn from independent ensembles so that the KS
/// null distribution applies; the coupled RMS uses the patched ensemble
/// for both processes.
LawConvergenceReport law_convergence_report(const GaussianField& field, const PartitionScheme& scheme,
                                            const HurstFunction& h, const LawConvergenceOptions& options);

}  // namespace mbm
