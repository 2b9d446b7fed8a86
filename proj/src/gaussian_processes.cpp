#include "mbm/gaussian_processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mbm/parallel.hpp"
#include "mbm/statistics.hpp"

namespace mbm {

namespace {

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

HurstFunction::HurstFunction(std::string name, std::function<double(double)> h, std::function<double(double)> dh,
                             int check_points)
    : name_(std::move(name)), h_(std::move(h)), dh_(std::move(dh)) {
  if (check_points < 2) throw std::invalid_argument("HurstFunction: need at least two check points");
  lower_ = 1.0;
  upper_ = 0.0;
  const double step = 1e-5;
  for (int i = 0; i < check_points; ++i) {
    const double t = static_cast<double>(i) / (check_points - 1);
    const double v = h_(t), d = dh_(t);
    if (!std::isfinite(v) || !std::isfinite(d)) throw std::domain_error(name_ + ": non-finite value at t = " + format_number(t));
    lower_ = std::min(lower_, v);
    upper_ = std::max(upper_, v);
    lipschitz_ = std::max(lipschitz_, std::abs(d));
    // second-order differences, one-sided at the interval ends
    double fd;
    if (t - step < 0.0)
      fd = (-3.0 * h_(t) + 4.0 * h_(t + step) - h_(t + 2 * step)) / (2 * step);
    else if (t + step > 1.0)
      fd = (3.0 * h_(t) - 4.0 * h_(t - step) + h_(t - 2 * step)) / (2 * step);
    else
      fd = (h_(t + step) - h_(t - step)) / (2 * step);
    if (std::abs(fd - d) > 1e-6)
      throw std::invalid_argument(name_ + ": derivative disagrees with finite differences at t = " + format_number(t));
  }
  if (!(lower_ > 0.0 && upper_ < 1.0))
    throw std::domain_error(name_ + ": range [" + format_number(lower_) + ", " + format_number(upper_) +
                            "] not inside (0, 1)");
}

HurstFunction HurstFunction::constant(double H) {
  return HurstFunction("constant(" + format_number(H) + ")", [H](double) { return H; }, [](double) { return 0.0; });
}

HurstFunction HurstFunction::linear(double a, double b) {
  return HurstFunction(
      "linear(" + format_number(a) + "," + format_number(b) + ")", [a, b](double t) { return a + (b - a) * t; },
      [a, b](double) { return b - a; });
}

HurstFunction HurstFunction::sine(double m, double amplitude) {
  constexpr double pi = std::numbers::pi;
  return HurstFunction(
      "sine(" + format_number(m) + "," + format_number(amplitude) + ")",
      [m, amplitude](double t) { return m + amplitude * std::sin(pi * t); },
      [amplitude](double t) { return amplitude * pi * std::cos(pi * t); });
}

// ---------------------------------------------------------------------------

double field_covariance(double t, double s, double H, double Hp) {
  const double mean = 0.5 * (H + Hp);
  const double ratio = std::pow(c_of_H(mean), 2) / (c_of_H(H) * c_of_H(Hp));
  const double e = H + Hp;
  return ratio * 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
}

double mbm_covariance(double t, double s, const HurstFunction& h) { return field_covariance(t, s, h(t), h(s)); }

// ---------------------------------------------------------------------------

GaussianField::GaussianField(std::shared_ptr<const OperatorTable> table) : table_(std::move(table)) {
  if (!table_) throw std::invalid_argument("GaussianField: null table");
}

ChaosVector GaussianField::field_chaos(double t, double H) const {
  return ChaosVector::first_chaos(coefficients(kCumM, {&t, 1}, {&H, 1}));
}

ChaosVector GaussianField::dB_dH_chaos(double t, double H) const {
  return ChaosVector::first_chaos(coefficients(kCumDM, {&t, 1}, {&H, 1}));
}

ChaosVector GaussianField::white_noise_fbm(double t, double H) const {
  return ChaosVector::first_chaos(coefficients(kM, {&t, 1}, {&H, 1}));
}

ChaosVector GaussianField::white_noise_mbm(double t, const HurstFunction& h) const {
  const double H = h(t);
  const SpectralPoint p{H, t};
  const OperatorColumns c = table_->columns({&p, 1}, kM | kCumDM);
  return ChaosVector::first_chaos(c.m.col(0) + h.derivative(t) * c.cum_dm.col(0));
}

ChaosVector GaussianField::mbm_chaos(double t, const HurstFunction& h) const { return field_chaos(t, h(t)); }

Eigen::MatrixXd GaussianField::coefficients(Quantity q, std::span<const double> times, std::span<const double> hurst,
                                            int workers) const {
  if (times.size() != hurst.size()) throw std::invalid_argument("coefficients: times and exponents differ in length");
  std::vector<SpectralPoint> pts(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) pts[i] = {hurst[i], times[i]};
  OperatorColumns c = table_->columns(pts, q, workers);
  switch (q) {
    case kM: return std::move(c.m);
    case kDM: return std::move(c.dm);
    case kCumM: return std::move(c.cum_m);
    case kCumDM: return std::move(c.cum_dm);
    default: throw std::invalid_argument("coefficients: single quantity expected");
  }
}

// ---------------------------------------------------------------------------

ProcessDescriptor ProcessDescriptor::fbm(double H) {
  return {"fbm(" + format_number(H) + ")", [H](double) { return H; }};
}

ProcessDescriptor ProcessDescriptor::mbm(const HurstFunction& h) {
  return {"mbm(" + h.name() + ")", [h](double t) { return h(t); }};
}

GaussianEnsemble::GaussianEnsemble(std::uint64_t seed, int samples, int basis_size, int workers) : seed_(seed) {
  if (samples < 1 || basis_size < 1) throw std::invalid_argument("GaussianEnsemble: empty ensemble");
  // Row-major fill per sample, then one copy into Eigen's column-major layout.
  std::vector<double> buffer(static_cast<std::size_t>(samples) * basis_size);
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t m) {
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(m)));
    std::normal_distribution<double> normal;
    double* row = buffer.data() + m * basis_size;
    for (int k = 0; k < basis_size; ++k) row[k] = normal(gen);
  });
  xi_ = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(buffer.data(), samples,
                                                                                                   basis_size);
}

Eigen::MatrixXd sample_paths(const Eigen::MatrixXd& coefficients, const GaussianEnsemble& ensemble) {
  if (coefficients.rows() != ensemble.basis_size())
    throw std::invalid_argument("sample_paths: coefficient rows do not match the ensemble basis size");
  return ensemble.coordinates() * coefficients;
}

Eigen::MatrixXd sample_paths(const ProcessDescriptor& process, std::span<const double> t_grid,
                             const GaussianField& field, const GaussianEnsemble& ensemble, int workers) {
  std::vector<double> hurst(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) hurst[i] = process.exponent(t_grid[i]);
  return sample_paths(field.coefficients(kCumM, t_grid, hurst, workers), ensemble);
}

// ---------------------------------------------------------------------------


HolderDiagnostic holder_diagnostic(std::span<const double> t_grid, std::span<const double> hurst_grid) {
  if (t_grid.empty() || hurst_grid.empty()) throw std::invalid_argument("holder_diagnostic: empty grid");
  HolderDiagnostic out;
  out.c = *std::min_element(hurst_grid.begin(), hurst_grid.end());
  for (double t : t_grid)
    for (double H : hurst_grid)
      for (double s : t_grid)
        for (double Hp : hurst_grid) {
          const double den = std::pow(std::abs(t - s), 2.0 * out.c) + (H - Hp) * (H - Hp);
          if (den == 0.0) continue;
          const double var =
              std::pow(std::abs(t), 2 * H) + std::pow(std::abs(s), 2 * Hp) - 2.0 * field_covariance(t, s, H, Hp);
          out.lambda = std::max(out.lambda, var / den);
        }
  // Pairs with t = s and H' -> H: the ratio tends to Var(dB/dH(t, H)), which
  // the grid pairs only approach at rate |H - H'|. Mixed second difference of
  // the closed form.
  const double d = 1e-4;
  for (double t : hurst_grid.size() > 1 ? t_grid : std::span<const double>{})
    for (double H : hurst_grid) {
      const double lo = std::max(H - d, 1e-6), hi = std::min(H + d, 1.0 - 1e-6);
      const double mixed = (field_covariance(t, t, hi, hi) - 2.0 * field_covariance(t, t, hi, lo) +
                            field_covariance(t, t, lo, lo)) /
                           ((hi - lo) * (hi - lo));
      out.lambda = std::max(out.lambda, mixed);
    }
  for (double H : hurst_grid) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      for (std::size_t j = i + 1; j < t_grid.size(); ++j) {
        const double t = t_grid[i], s = t_grid[j];
        if (t == s) continue;
        const double var = std::pow(std::abs(t), 2 * H) + std::pow(std::abs(s), 2 * H) - 2.0 * field_covariance(t, s, H, H);
        if (!(var > 0.0)) continue;
        lx.push_back(std::log(std::abs(t - s)));
        ly.push_back(std::log(var));
      }
    out.hurst.push_back(H);
    out.exponents.push_back(lx.size() >= 2 ? regression_slope(lx, ly) : 0.0);
  }
  return out;
}

DerivativeBound derivative_bound(const GaussianField& field, std::span<const double> t_grid,
                                 std::span<const double> hurst_grid, int workers) {
  std::vector<double> ts, hs;
  for (double t : t_grid)
    for (double H : hurst_grid) {
      ts.push_back(t);
      hs.push_back(H);
    }
  const Eigen::MatrixXd c = field.coefficients(kCumDM, ts, hs, workers);
  DerivativeBound out;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      const double den = (ts[i] - ts[j]) * (ts[i] - ts[j]) + (hs[i] - hs[j]) * (hs[i] - hs[j]);
      if (den == 0.0) continue;
      const double num = (c.col(static_cast<Eigen::Index>(i)) - c.col(static_cast<Eigen::Index>(j))).squaredNorm();
      out.delta = std::max(out.delta, num / den);
    }
  return out;
}

}  // namespace mbm
