#include "mbm/partition_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "mbm/parallel.hpp"
#include "mbm/statistics.hpp"

namespace mbm {

PartitionScheme::PartitionScheme(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {}

PartitionScheme PartitionScheme::dyadic(int max_level) {
  if (max_level < 0 || max_level > 62) throw std::invalid_argument("PartitionScheme: level must be in [0, 62]");
  std::vector<std::uint64_t> q(static_cast<std::size_t>(max_level) + 1);
  for (int n = 0; n <= max_level; ++n) q[n] = std::uint64_t{1} << n;
  return PartitionScheme(std::move(q));
}

PartitionScheme PartitionScheme::custom(std::vector<std::uint64_t> counts) {
  if (counts.empty() || counts[0] != 1) throw std::invalid_argument("PartitionScheme: q_0 must be 1");
  for (std::size_t n = 1; n < counts.size(); ++n) {
    if (n > 62) throw std::invalid_argument("PartitionScheme: too many levels");
    const std::uint64_t lo = std::uint64_t{1} << n;
    // 2^{2^n} exceeds 64 bits from n = 6 on, where only the lower bound binds
    const bool has_hi = n < 6;
    const std::uint64_t hi = has_hi ? (std::uint64_t{1} << (std::uint64_t{1} << n)) : 0;
    if (counts[n] < lo || (has_hi && counts[n] > hi))
      throw std::invalid_argument("PartitionScheme: q_" + std::to_string(n) + " = " + std::to_string(counts[n]) +
                                  " violates 2^n <= q_n <= 2^(2^n)");
    if (counts[n] % counts[n - 1] != 0)
      throw std::invalid_argument("PartitionScheme: level " + std::to_string(n) + " does not refine level " +
                                  std::to_string(n - 1));
  }
  return PartitionScheme(std::move(counts));
}

void PartitionScheme::check_level(int n) const {
  if (n < 0 || n > max_level())
    throw std::out_of_range("partition level " + std::to_string(n) + " outside [0, " + std::to_string(max_level()) + "]");
}

std::uint64_t PartitionScheme::count(int n) const {
  check_level(n);
  return counts_[static_cast<std::size_t>(n)];
}

std::uint64_t PartitionScheme::cell(double t, int n) const {
  check_level(n);
  if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("time " + std::to_string(t) + " outside [0, 1]");
  const std::uint64_t q = counts_[static_cast<std::size_t>(n)];
  if (t == 1.0) return q - 1;
  const double qd = static_cast<double>(q);
  auto p = static_cast<std::uint64_t>(std::floor(t * qd));
  // t * q can round across an integer; restore x_p <= t < x_{p+1}
  if (p >= q) p = q - 1;
  if (static_cast<double>(p) / qd > t) --p;
  else if (p + 1 < q && static_cast<double>(p + 1) / qd <= t) ++p;
  return p;
}

double PartitionScheme::left_node(double t, int n) const {
  return static_cast<double>(cell(t, n)) / static_cast<double>(count(n));
}

double PartitionScheme::step_hurst(const HurstFunction& h, double t, int n) const {
  if (t == 1.0) {
    check_level(n);
    return h(1.0);
  }
  return h(left_node(t, n));
}

double PartitionScheme::sup_distance(const HurstFunction& h, int n, int points) const {
  check_level(n);
  double sup = 0.0;
  const double q = static_cast<double>(count(n));
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    sup = std::max(sup, std::abs(h(t) - step_hurst(h, t, n)));
    // the supremum on a cell is approached just left of its right end
    if (t < 1.0) {
      const double right = (static_cast<double>(cell(t, n)) + 1.0) / q;
      const double before = std::nextafter(std::min(right, 1.0), 0.0);
      sup = std::max(sup, std::abs(h(before) - step_hurst(h, before, n)));
    }
  }
  return sup;
}

ProcessDescriptor patched_descriptor(const PartitionScheme& scheme, const HurstFunction& h, int n) {
  scheme.count(n);
  return {"patched(" + h.name() + "," + std::to_string(n) + ")",
          [scheme, h, n](double t) { return scheme.step_hurst(h, t, n); }};
}

ChaosVector patched_process_chaos(const GaussianField& field, const PartitionScheme& scheme, const HurstFunction& h,
                                  double t, int n) {
  return field.field_chaos(t, scheme.step_hurst(h, t, n));
}

LawConvergenceReport law_convergence_report(const GaussianField& field, const PartitionScheme& scheme,
                                            const HurstFunction& h, const LawConvergenceOptions& options) {
  if (options.levels.empty() || options.t_grid.empty())
    throw std::invalid_argument("law_convergence_report: empty level list or time grid");
  for (std::size_t i : options.ks_indices)
    if (i >= options.t_grid.size()) throw std::invalid_argument("law_convergence_report: KS index outside the grid");

  const auto& tg = options.t_grid;
  const std::size_t nt = tg.size();
  const bool sampling = !options.ks_indices.empty() && options.samples > 1;

  // Reference mBm on its own ensemble; patched processes share the other one.
  std::vector<double> ks_times;
  for (std::size_t i : options.ks_indices) ks_times.push_back(tg[i]);
  Eigen::MatrixXd reference, coupled_reference;
  std::optional<GaussianEnsemble> patched_noise;
  if (sampling) {
    const GaussianEnsemble reference_noise(options.seed + 1, options.samples, field.basis_size(), options.workers);
    patched_noise.emplace(options.seed, options.samples, field.basis_size(), options.workers);
    const auto mbm = ProcessDescriptor::mbm(h);
    reference = sample_paths(mbm, ks_times, field, reference_noise, options.workers);
    coupled_reference = sample_paths(mbm, ks_times, field, *patched_noise, options.workers);
  }

  LawConvergenceReport report;
  report.levels.resize(options.levels.size());
  parallel_for(options.levels.size(), options.workers, [&](std::size_t li) {
    const int n = options.levels[li];
    LawLevel& level = report.levels[li];
    level.level = n;
    level.cells = scheme.count(n);
    level.hurst_distance = scheme.sup_distance(h, n);
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const double patched =
            field_covariance(tg[i], tg[j], scheme.step_hurst(h, tg[i], n), scheme.step_hurst(h, tg[j], n));
        level.covariance_distance =
            std::max(level.covariance_distance, std::abs(patched - mbm_covariance(tg[i], tg[j], h)));
      }
    if (sampling) {
      const Eigen::MatrixXd paths = sample_paths(patched_descriptor(scheme, h, n), ks_times, field, *patched_noise);
      for (std::size_t c = 0; c < ks_times.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const Eigen::VectorXd a = paths.col(col), b = reference.col(col);
        KsMarginal m;
        m.time = ks_times[c];
        m.patched_vs_mbm = ks_two_sample({a.data(), static_cast<std::size_t>(a.size())},
                                         {b.data(), static_cast<std::size_t>(b.size())});
        m.coupled_rms = std::sqrt((paths.col(col) - coupled_reference.col(col)).squaredNorm() / paths.rows());
        level.marginals.push_back(m);
      }
    }
  });

  for (std::size_t li = 0; li < report.levels.size(); ++li) {
    const LawLevel& l = report.levels[li];
    if (l.hurst_distance > 0.0) report.rate_constant = std::max(report.rate_constant, l.covariance_distance / l.hurst_distance);
    if (li > 0 && l.covariance_distance > report.levels[li - 1].covariance_distance) report.monotone = false;
  }
  return report;
}

}  // namespace mbm
