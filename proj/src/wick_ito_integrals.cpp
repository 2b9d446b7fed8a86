#include "mbm/wick_ito_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbm {

IntegrandProcess IntegrandProcess::constant(int basis_size, double value) {
  std::ostringstream name;
  name.precision(17);
  name << "constant(" << value << ")";
  IntegrandProcess y(name.str(), basis_size, 0);
  y.linear_ = [basis_size, value](std::span<const double> times) {
    const auto n = static_cast<Eigen::Index>(times.size());
    return LinearPath{Eigen::VectorXd::Constant(n, value), Eigen::MatrixXd::Zero(basis_size, n)};
  };
  return y;
}

IntegrandProcess IntegrandProcess::mbm(std::shared_ptr<const GaussianField> field, const HurstFunction& h) {
  const int K = field->basis_size();
  IntegrandProcess y("mbm(" + h.name() + ")", K, 0);
  y.linear_ = [field, h](std::span<const double> times) {
    std::vector<double> hurst(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) hurst[i] = h(times[i]);
    return LinearPath{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(times.size())),
                      field->coefficients(kCumM, times, hurst)};
  };
  return y;
}

IntegrandProcess IntegrandProcess::fbm(std::shared_ptr<const GaussianField> field, double H) {
  return mbm(std::move(field), HurstFunction::constant(H));
}

IntegrandProcess IntegrandProcess::linear(std::string name, int basis_size, int p0, Linear values) {
  IntegrandProcess y(std::move(name), basis_size, p0);
  y.linear_ = std::move(values);
  return y;
}

IntegrandProcess IntegrandProcess::general(std::string name, int basis_size, int p0, General values) {
  IntegrandProcess y(std::move(name), basis_size, p0);
  y.general_ = std::move(values);
  return y;
}

LinearPath IntegrandProcess::linear_values(std::span<const double> times) const {
  if (!linear_) throw std::logic_error("integrand " + name_ + " has chaos order above one");
  LinearPath p = linear_(times);
  const auto n = static_cast<Eigen::Index>(times.size());
  if (p.c0.size() != n || p.c1.cols() != n || p.c1.rows() != basis_size_)
    throw std::logic_error("integrand " + name_ + " returned values of the wrong shape");
  return p;
}

ChaosVector IntegrandProcess::at(double t) const {
  if (general_) return general_(t);
  const LinearPath p = linear_values({&t, 1});
  ChaosVector v = ChaosVector::first_chaos(p.c1.col(0));
  v.set(MultiIndex{}, p.c0[0]);
  return v;
}

// ---------------------------------------------------------------------------

ChaosVector bochner_integral(const IntegrandProcess& phi, const QuadratureGrid& grid, int p) {
  ChaosVector sum(phi.basis_size(), 0);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid.nodes()[i];
    ChaosVector v = phi.at(t);
    const double norm = norm_p(v, -p);
    if (!std::isfinite(norm) || !v.all_finite()) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand " << phi.name() << " has non-finite ||.||_{-" << p << "} at t = " << t;
      throw IntegrabilityError(os.str(), t);
    }
    sum += v * grid.weights()[i];
  }
  return sum;
}

ChaosVector wick_integral_sparse(const IntegrandProcess& Y, const std::function<Eigen::VectorXd(double)>& noise,
                                 const QuadratureGrid& grid) {
  ChaosVector sum(Y.basis_size(), 0);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid.nodes()[i];
    sum += wick_product(Y.at(t), ChaosVector::first_chaos(noise(t))) * grid.weights()[i];
  }
  return sum;
}

// ---------------------------------------------------------------------------

WickItoIntegrator::WickItoIntegrator(std::shared_ptr<const GaussianField> field, IntegrationOptions options)
    : field_(std::move(field)), options_(options) {
  if (!field_) throw std::invalid_argument("WickItoIntegrator: null field");
  if (options_.panels_level < 0 || options_.panels_level > 20)
    throw std::invalid_argument("WickItoIntegrator: panels_level must be in [0, 20]");
  if (options_.extrapolation_depth < 0) throw std::invalid_argument("WickItoIntegrator: negative extrapolation depth");
  if (!(options_.limit_tolerance > 0.0)) throw std::invalid_argument("WickItoIntegrator: tolerance must be positive");
  grid_ = QuadratureGrid::uniform(0.0, 1.0, 1 << options_.panels_level, options_.order);
}

WickItoIntegrator::Nodes WickItoIntegrator::nodes_on(double a, double b) const {
  if (!(a >= 0.0 && b <= 1.0 && a < b))
    throw std::out_of_range("integration interval must satisfy 0 <= a < b <= 1");
  Nodes out;
  if (grid_.is_breakpoint(a) && grid_.is_breakpoint(b)) {
    const int panels = grid_.panels();
    const int pa = static_cast<int>(std::lround(a * panels)), pb = static_cast<int>(std::lround(b * panels));
    const Eigen::Index first = grid_.panel_nodes(pa).first, last = grid_.panel_nodes(pb - 1).second;
    out.t.assign(grid_.nodes().data() + first, grid_.nodes().data() + last);
    out.w = grid_.weights().segment(first, last - first);
    return out;
  }
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) * grid_.panels() - 1e-9)));
  const QuadratureGrid sub = QuadratureGrid::uniform(a, b, panels, options_.order);
  out.t.assign(sub.nodes().data(), sub.nodes().data() + sub.size());
  out.w = sub.weights();
  return out;
}

Eigen::MatrixXd WickItoIntegrator::noise(const std::vector<double>& t, const std::vector<double>& hurst,
                                         const std::vector<double>& m_scale,
                                         const std::vector<double>& dm_scale) const {
  const bool want_m = std::any_of(m_scale.begin(), m_scale.end(), [](double s) { return s != 0.0; });
  const bool want_dm = std::any_of(dm_scale.begin(), dm_scale.end(), [](double s) { return s != 0.0; });
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(field_->basis_size(), n);
  if (!want_m && !want_dm) return out;
  std::vector<SpectralPoint> pts(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) pts[i] = {hurst[i], t[i]};
  const unsigned mask = (want_m ? kM : 0u) | (want_dm ? kCumDM : 0u);
  const OperatorColumns c = field_->table().columns(pts, mask, options_.workers);
  if (want_m) out += c.m * Eigen::Map<const Eigen::VectorXd>(m_scale.data(), n).asDiagonal();
  if (want_dm) out += c.cum_dm * Eigen::Map<const Eigen::VectorXd>(dm_scale.data(), n).asDiagonal();
  return out;
}

WickIntegral WickItoIntegrator::assemble(const IntegrandProcess& Y, const Nodes& nodes,
                                         const Eigen::MatrixXd& noise) const {
  if (Y.basis_size() != field_->basis_size()) throw std::invalid_argument("integrand basis size does not match the field");
  return assemble(Y.linear_values(nodes.t), Y.index(), nodes, noise);
}

WickIntegral WickItoIntegrator::assemble(const LinearPath& y, int p0, const Nodes& nodes,
                                         const Eigen::MatrixXd& noise) const {
  WickIntegral out;
  out.p0 = p0;
  out.q = q_of_p(out.p0);
  out.value = QuadraticChaos::zero(field_->basis_size());
  // Y_t <> V_t has no constant term: V is pure first chaos.
  out.value.c1.noalias() = noise * nodes.w.cwiseProduct(y.c0);
  if (y.c1.cwiseAbs().maxCoeff() > 0.0) {
    const Eigen::MatrixXd cross = (y.c1 * nodes.w.asDiagonal()) * noise.transpose();
    out.value.c2 = 0.5 * (cross + cross.transpose());
  }
  return out;
}

WickIntegral WickItoIntegrator::integrate_wrt_fbm(const IntegrandProcess& Y, double H, double a, double b) const {
  const Nodes nodes = nodes_on(a, b);
  const std::size_t n = nodes.t.size();
  return assemble(Y, nodes, noise(nodes.t, std::vector<double>(n, H), std::vector<double>(n, 1.0),
                                  std::vector<double>(n, 0.0)));
}

WickIntegral WickItoIntegrator::integrate_wrt_lumped(const IntegrandProcess& Y, const HurstFunction& h,
                                                     const PartitionScheme& scheme, int n) const {
  const std::uint64_t q = scheme.count(n);
  if (static_cast<std::uint64_t>(grid_.panels()) % q != 0)
    throw std::invalid_argument("partition level " + std::to_string(n) + " (" + std::to_string(q) +
                                " cells) does not align with the " + std::to_string(grid_.panels()) +
                                "-panel time grid");
  const Nodes nodes = nodes_on(0.0, 1.0);
  return lumped(Y.linear_values(nodes.t), Y.index(), nodes, h, scheme, n);
}

WickIntegral WickItoIntegrator::lumped(const LinearPath& y, int p0, const Nodes& nodes, const HurstFunction& h,
                                       const PartitionScheme& scheme, int n) const {
  const std::size_t m = nodes.t.size();
  std::vector<double> hurst(m);
  for (std::size_t i = 0; i < m; ++i) hurst[i] = scheme.step_hurst(h, nodes.t[i], n);
  return assemble(y, p0, nodes, noise(nodes.t, hurst, std::vector<double>(m, 1.0), std::vector<double>(m, 0.0)));
}

WickIntegral WickItoIntegrator::integrate_wrt_lumped_cells(const IntegrandProcess& Y, const HurstFunction& h,
                                                           const PartitionScheme& scheme, int n) const {
  const std::uint64_t q = scheme.count(n);
  WickIntegral total;
  total.p0 = Y.index();
  total.q = q_of_p(total.p0);
  total.value = QuadraticChaos::zero(field_->basis_size());
  for (std::uint64_t k = 0; k < q; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(q);
    const double b = static_cast<double>(k + 1) / static_cast<double>(q);
    total.value += integrate_wrt_fbm(Y, h(a), a, b).value;
  }
  return total;
}

WickIntegral WickItoIntegrator::integrate_frozen(const IntegrandProcess& Y, const HurstFunction& h, double a,
                                                 double b) const {
  const Nodes nodes = nodes_on(a, b);
  const std::size_t m = nodes.t.size();
  std::vector<double> hurst(m);
  for (std::size_t i = 0; i < m; ++i) hurst[i] = h(nodes.t[i]);
  return assemble(Y, nodes, noise(nodes.t, hurst, std::vector<double>(m, 1.0), std::vector<double>(m, 0.0)));
}

WickIntegral WickItoIntegrator::correction_term(const IntegrandProcess& Y, const HurstFunction& h, double a,
                                                double b) const {
  const Nodes nodes = nodes_on(a, b);
  const std::size_t m = nodes.t.size();
  std::vector<double> hurst(m), slope(m);
  for (std::size_t i = 0; i < m; ++i) {
    hurst[i] = h(nodes.t[i]);
    slope[i] = h.derivative(nodes.t[i]);
  }
  return assemble(Y, nodes, noise(nodes.t, hurst, std::vector<double>(m, 0.0), slope));
}

WickIntegral WickItoIntegrator::integrate_multifractional(const IntegrandProcess& Y, const HurstFunction& h, double a,
                                                          double b) const {
  const Nodes nodes = nodes_on(a, b);
  const std::size_t m = nodes.t.size();
  std::vector<double> hurst(m), slope(m);
  for (std::size_t i = 0; i < m; ++i) {
    hurst[i] = h(nodes.t[i]);
    slope[i] = h.derivative(nodes.t[i]);
  }
  return assemble(Y, nodes, noise(nodes.t, hurst, std::vector<double>(m, 1.0), slope));
}

double WickItoIntegrator::fit_gamma(const HurstFunction& h, int p) const {
  const int nt = 65;
  const int nh = h.upper() > h.lower() ? 17 : 1;
  std::vector<SpectralPoint> pts;
  for (int i = 0; i < nh; ++i) {
    const double H = nh == 1 ? h.lower() : h.lower() + (h.upper() - h.lower()) * i / (nh - 1);
    for (int j = 0; j < nt; ++j) pts.push_back({H, static_cast<double>(j) / (nt - 1)});
  }
  const OperatorColumns c = field_->table().columns(pts, kDM, options_.workers);
  const Eigen::VectorXd w = hermite_weights(field_->basis_size(), -p);
  return std::sqrt((w.asDiagonal() * c.dm.cwiseAbs2()).colwise().sum().maxCoeff());
}

LimitingResult WickItoIntegrator::limiting_integral(const IntegrandProcess& Y, const HurstFunction& h,
                                                    const PartitionScheme& scheme, int max_level) const {
  if (max_level < 0 || max_level > scheme.max_level())
    throw std::out_of_range("limiting_integral: level " + std::to_string(max_level) + " outside the scheme");
  const int p0 = Y.index();
  const int q = q_of_p(p0);
  const int pstar = std::max(p0, 2);

  LimitingResult out;
  out.correction = correction_term(Y, h);
  const WickIntegral frozen = integrate_frozen(Y, h);
  out.gamma = fit_gamma(h, pstar);

  const Nodes nodes = nodes_on(0.0, 1.0);
  const LinearPath y = Y.linear_values(nodes.t);
  const Eigen::VectorXd wy = hermite_weights(Y.basis_size(), -pstar);
  const Eigen::VectorXd y_norm =
      (y.c0.array().square() + (wy.asDiagonal() * y.c1.cwiseAbs2()).colwise().sum().transpose().array()).sqrt();

  // Neville table in the cell width 1/q_n, one row per level.
  std::vector<QuadraticChaos> row, previous_row;
  std::vector<double> widths;
  QuadraticChaos previous_lumped, previous_estimate;
  for (int n = 0; n <= max_level; ++n) {
    if (static_cast<std::uint64_t>(grid_.panels()) % scheme.count(n) != 0)
      throw std::invalid_argument("partition level " + std::to_string(n) + " does not align with the time grid");
    const WickIntegral lumped_n = lumped(y, p0, nodes, h, scheme, n);
    LimitTraceEntry e;
    e.level = n;
    e.cells = scheme.count(n);
    e.distance = norm_p(lumped_n.value - frozen.value, -q);
    double gap = 0.0;
    for (std::size_t i = 0; i < nodes.t.size(); ++i)
      gap += nodes.w[static_cast<Eigen::Index>(i)] * y_norm[static_cast<Eigen::Index>(i)] *
             std::abs(h(nodes.t[i]) - scheme.step_hurst(h, nodes.t[i], n));
    e.ceiling = out.gamma * gap;

    widths.push_back(1.0 / static_cast<double>(e.cells));
    const int depth = std::min(n, options_.extrapolation_depth);
    row.assign(1, lumped_n.value);
    for (int j = 1; j <= depth; ++j) {
      const double ratio = widths[static_cast<std::size_t>(n - j)] / widths[static_cast<std::size_t>(n)];
      row.push_back(row[j - 1] + (row[j - 1] - previous_row[j - 1]) * (1.0 / (ratio - 1.0)));
    }
    const QuadraticChaos& estimate = row.back();
    if (n > 0) {
      e.raw_change = norm_p(lumped_n.value - previous_lumped, -q);
      e.extrapolated_change = norm_p(estimate - previous_estimate, -q);
      if (e.extrapolated_change < options_.limit_tolerance && out.converged_level < 0) out.converged_level = n;
    }
    out.trace.push_back(e);
    previous_lumped = lumped_n.value;
    previous_estimate = estimate;
    previous_row = std::move(row);
    row.clear();
  }

  const LimitTraceEntry& last = out.trace.back();
  out.residual = max_level > 0 ? last.extrapolated_change : 0.0;
  if (max_level > 0 && !(out.residual < options_.limit_tolerance)) {
    std::ostringstream os;
    os << "lumped integrals did not converge within " << max_level << " levels: last extrapolated change "
       << out.residual << " >= " << options_.limit_tolerance;
    throw NonConvergenceError(os.str(), out.trace);
  }
  if (max_level == 0) out.converged_level = 0;
  out.lumped_limit = {previous_estimate, p0, q};
  out.value = {previous_estimate + out.correction.value, p0, q};
  return out;
}

ComparisonReport WickItoIntegrator::comparison_check(const IntegrandProcess& Y, const HurstFunction& h,
                                                     const PartitionScheme& scheme, int max_level) const {
  ComparisonReport r;
  r.limiting = limiting_integral(Y, h, scheme, max_level);
  r.multifractional = integrate_multifractional(Y, h);
  r.q = r.multifractional.q;
  r.gap = norm_p(r.limiting.value.value - r.multifractional.value, -r.q);
  r.reference_norm = norm_p(r.multifractional.value, -r.q);
  r.ratio = r.reference_norm > 0.0 ? r.gap / r.reference_norm : r.gap;
  r.allowed = 1e-6 + (r.reference_norm > 0.0 ? r.limiting.residual / r.reference_norm : r.limiting.residual);
  r.passed = r.ratio <= r.allowed;
  return r;
}

// ---------------------------------------------------------------------------

LipschitzDiagnostic lipschitz_W_diagnostic(const GaussianField& field, std::span<const double> hurst_grid,
                                           std::span<const double> t_grid, int p0, int workers) {
  if (p0 < 2) throw std::invalid_argument("lipschitz_W_diagnostic: requires p0 >= 2");
  if (hurst_grid.size() < 2 || t_grid.empty())
    throw std::invalid_argument("lipschitz_W_diagnostic: need two Hurst values and one time");
  std::vector<double> refined;
  for (std::size_t i = 0; i < hurst_grid.size(); ++i) {
    if (i > 0) refined.push_back(0.5 * (hurst_grid[i - 1] + hurst_grid[i]));
    refined.push_back(hurst_grid[i]);
  }
  std::vector<SpectralPoint> pts;
  for (double t : t_grid)
    for (double H : refined) pts.push_back({H, t});
  const OperatorColumns c = field.table().columns(pts, kM, workers);
  const Eigen::VectorXd w = hermite_weights(field.basis_size(), -p0);
  auto ratio = [&](std::size_t it, std::size_t i, std::size_t j) {
    const auto a = static_cast<Eigen::Index>(it * refined.size() + i);
    const auto b = static_cast<Eigen::Index>(it * refined.size() + j);
    const double d = std::sqrt((c.m.col(a) - c.m.col(b)).cwiseAbs2().dot(w));
    return d / std::abs(refined[j] - refined[i]);
  };
  LipschitzDiagnostic out;
  out.p0 = p0;
  for (std::size_t it = 0; it < t_grid.size(); ++it) {
    for (std::size_t i = 0; i + 2 < refined.size(); i += 2) out.gamma = std::max(out.gamma, ratio(it, i, i + 2));
    for (std::size_t i = 0; i + 1 < refined.size(); ++i) out.gamma_refined = std::max(out.gamma_refined, ratio(it, i, i + 1));
  }
  out.relative_change = out.gamma > 0.0 ? std::abs(out.gamma_refined - out.gamma) / out.gamma : 0.0;
  out.stable = out.relative_change <= 0.1;
  return out;
}

}  // namespace mbm
