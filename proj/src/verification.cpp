#include "mbm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>

#include "mbm/json_io.hpp"
#include "mbm/statistics.hpp"

namespace mbm {

using nlohmann::json;

namespace {

std::string format(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof buffer, fmt, args);
  va_end(args);
  return buffer;
}

CriterionResult criterion(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = (i == n - 1) ? b : a + (b - a) * i / (n - 1);
  return v;
}

CriterionResult identity_operator(const Lab& lab) {
  CriterionResult r = criterion(1, "identity operator at H = 1/2");
  const auto times = lab.config.time_values();
  std::vector<SpectralPoint> pts;
  for (double t : times) pts.push_back({0.5, t});
  const OperatorColumns c = lab.table->columns(pts, kM, lab.config.worker_count());
  const int kmax = std::min(32, lab.table->size());
  const HermiteBasis& basis = lab.operators->basis();
  double err = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    for (int k = 0; k < kmax; ++k)
      err = std::max(err, std::abs(c.m(k, static_cast<Eigen::Index>(i)) - basis(k, times[i])));
  r.passed = err <= 1e-6;
  r.metrics = {{"max_abs_error", err}, {"tolerance", 1e-6}, {"modes", kmax}, {"times", times.size()}};
  r.summary = format("max |M_1/2(e_k)(t) - e_k(t)| = %.3e over k < %d (tol 1e-6)", err, kmax);
  return r;
}

CriterionResult variance_identity(const Lab& lab) {
  CriterionResult r = criterion(2, "variance identity sum_k (int_0^t M_H e_k)^2 = t^{2H}");
  std::vector<SpectralPoint> pts;
  for (double H : {0.3, 0.5, 0.7})
    for (double t : {0.25, 0.5, 1.0}) pts.push_back({H, t});
  const OperatorColumns c = lab.operators->evaluate(pts, kCumM, lab.config.worker_count());
  double worst = 0.0;
  json points = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double target = std::pow(pts[i].time, 2.0 * pts[i].hurst);
    const double sum = c.cum_m.col(static_cast<Eigen::Index>(i)).squaredNorm();
    const double rel = std::abs(sum - target) / target;
    worst = std::max(worst, rel);
    points.push_back({{"H", pts[i].hurst}, {"t", pts[i].time}, {"partial_sum", sum}, {"relative_error", rel}});
  }
  r.passed = worst <= 0.02;
  r.metrics = {{"max_relative_error", worst}, {"tolerance", 0.02}, {"basis_size", lab.table->size()}, {"points", points}};
  r.summary = format("max relative error %.4f at K = %d (tol 0.02)", worst, lab.table->size());
  return r;
}

CriterionResult covariance_oracle(const Lab& lab) {
  CriterionResult r = criterion(3, "chaos pairing vs closed-form field covariance");
  const std::vector<double> ts{0.2, 0.4, 0.6, 0.8, 1.0}, hs{0.3, 0.5, 0.7};
  std::vector<double> pt, ph;
  for (double t : ts)
    for (double H : hs) {
      pt.push_back(t);
      ph.push_back(H);
    }
  const Eigen::MatrixXd c = lab.field->coefficients(kCumM, pt, ph, lab.config.worker_count());
  double worst = 0.0;
  json at;
  int checked = 0;
  for (std::size_t i = 0; i < pt.size(); ++i)
    for (std::size_t j = 0; j < pt.size(); ++j) {
      const double exact = field_covariance(pt[i], pt[j], ph[i], ph[j]);
      const double chaos = c.col(static_cast<Eigen::Index>(i)).dot(c.col(static_cast<Eigen::Index>(j)));
      const double rel = std::abs(chaos - exact) / std::abs(exact);
      ++checked;
      if (rel > worst) {
        worst = rel;
        at = {{"t", pt[i]}, {"s", pt[j]}, {"H", ph[i]}, {"H_prime", ph[j]}, {"exact", exact}, {"chaos", chaos}};
      }
    }
  r.passed = worst <= 0.02;
  r.metrics = {{"max_relative_error", worst}, {"tolerance", 0.02}, {"pairs", checked}, {"worst", at}};
  r.summary = format("max relative error %.4f over %d (t,s,H,H') combinations (tol 0.02)", worst, checked);
  return r;
}

CriterionResult increment_bound(const Lab&) {
  CriterionResult r = criterion(4, "increment bound Lambda (|t-s|^{2c} + |H-H'|^2)");
  const auto coarse_t = linspace(0.1, 0.9, 9), coarse_h = linspace(0.25, 0.75, 6);
  const auto fine_t = linspace(0.1, 0.9, 17), fine_h = linspace(0.25, 0.75, 11);
  const HolderDiagnostic coarse = holder_diagnostic(coarse_t, coarse_h);
  const HolderDiagnostic fine = holder_diagnostic(fine_t, fine_h);
  const double change = std::abs(fine.lambda - coarse.lambda) / coarse.lambda;
  double exponent_error = 0.0;
  for (std::size_t i = 0; i < coarse.hurst.size(); ++i)
    exponent_error = std::max(exponent_error, std::abs(coarse.exponents[i] - 2.0 * coarse.hurst[i]));
  const bool finite = std::isfinite(coarse.lambda) && std::isfinite(fine.lambda);
  r.passed = finite && change <= 0.10 && exponent_error <= 0.05;
  r.metrics = {{"lambda", coarse.lambda},       {"lambda_refined", fine.lambda}, {"relative_change", change},
               {"exponent_error", exponent_error}, {"coarse", to_json(coarse)}};
  r.summary = format("Lambda %.5f -> %.5f (change %.2f%%, tol 10%%), max |exponent - 2H| = %.2e (tol 0.05)",
                     coarse.lambda, fine.lambda, 100.0 * change, exponent_error);
  return r;
}

CriterionResult derivative_consistency(const Lab& lab) {
  CriterionResult r = criterion(5, "finite differences of B(t,.) vs dB/dH");
  const double delta = 1e-5;
  const std::vector<double> ts{0.2, 0.4, 0.6, 0.8, 1.0}, hs{0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> pt, ph, php, phm;
  for (double t : ts)
    for (double H : hs) {
      pt.push_back(t);
      ph.push_back(H);
      php.push_back(H + delta);
      phm.push_back(H - delta);
    }
  const int w = lab.config.worker_count();
  const Eigen::MatrixXd up = lab.field->coefficients(kCumM, pt, php, w);
  const Eigen::MatrixXd down = lab.field->coefficients(kCumM, pt, phm, w);
  const Eigen::MatrixXd exact = lab.field->coefficients(kCumDM, pt, ph, w);
  const Eigen::VectorXd weights = hermite_weights(lab.table->size(), -2);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < exact.cols(); ++i) {
    const Eigen::VectorXd diff = (up.col(i) - down.col(i)) / (2.0 * delta) - exact.col(i);
    worst = std::max(worst, std::sqrt(diff.cwiseAbs2().dot(weights)));
  }
  const DerivativeBound bound = derivative_bound(*lab.field, ts, hs, w);
  r.passed = worst <= 1e-4 && std::isfinite(bound.delta);
  r.metrics = {{"max_error_norm_minus2", worst}, {"tolerance", 1e-4}, {"delta_step", delta}, {"fitted_Delta", bound.delta}};
  r.summary = format("max ||FD - dB/dH||_{-2} = %.3e (tol 1e-4), fitted Delta = %.4f", worst, bound.delta);
  return r;
}

ChaosVector random_chaos(std::mt19937_64& gen, int K) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> mode(0, K - 1), count(1, 4);
  ChaosVector v(K, 2);
  v.set(MultiIndex{}, normal(gen));
  for (int i = count(gen); i > 0; --i) v.add(MultiIndex::unit(mode(gen)), normal(gen));
  for (int i = count(gen); i > 0; --i) v.add(MultiIndex({{mode(gen), 1}, {mode(gen), 1}}), normal(gen));
  return v;
}

CriterionResult s_transform_homomorphism(const Lab& lab) {
  CriterionResult r = criterion(6, "S-transform turns Wick products into products");
  std::mt19937_64 gen(lab.config.seed);
  std::normal_distribution<double> normal;
  const int K = 8;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ChaosVector u = random_chaos(gen, K), v = random_chaos(gen, K);
    TestFunction eta{Eigen::VectorXd(K)};
    for (int k = 0; k < K; ++k) eta.coefficients[k] = 0.7 * normal(gen);
    const double lhs = s_transform(wick_product(u, v), eta);
    const double rhs = s_transform(u, eta) * s_transform(v, eta);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  r.passed = worst <= 1e-10;
  r.metrics = {{"max_abs_error", worst}, {"tolerance", 1e-10}, {"triples", 100}};
  r.summary = format("max |S(u<>v) - S(u)S(v)| = %.3e over 100 triples (tol 1e-10)", worst);
  return r;
}

CriterionResult lipschitz_noise(const Lab& lab) {
  CriterionResult r = criterion(7, "Lipschitz constant of H -> W^H_t in ||.||_{-2}");
  const auto hs = linspace(0.2, 0.8, 13), ts = linspace(0.1, 1.0, 10);
  const LipschitzDiagnostic d = lipschitz_W_diagnostic(*lab.field, hs, ts, 2, lab.config.worker_count());
  r.passed = std::isfinite(d.gamma) && std::isfinite(d.gamma_refined) && d.stable;
  r.metrics = to_json(d);
  r.summary = format("gamma %.5f -> %.5f when |a - a'| halves (change %.2f%%, tol 10%%)", d.gamma, d.gamma_refined,
                     100.0 * d.relative_change);
  return r;
}

struct IntegralCriteria {
  CriterionResult convergence, equality, telescoping, zero_mean;
};

IntegralCriteria integral_criteria(const Lab& lab) {
  IntegralCriteria out;
  const WickItoIntegrator integrator = lab.integrator();
  const PartitionScheme scheme = lab.config.scheme();
  const int N = lab.config.levels;
  const int K = lab.table->size();
  const HurstFunction linear = HurstFunction::linear(0.4, 0.6);
  const HurstFunction preset = lab.config.hurst_function();
  const IntegrandProcess one = IntegrandProcess::constant(K);

  json expectations = json::array();
  bool all_zero = true;
  auto record = [&](const std::string& name, double c0) {
    expectations.push_back({{"integral", name}, {"expectation", c0}});
    if (c0 != 0.0) all_zero = false;
  };

  // 8: convergence of the lumped integrals for Y = 1, h linear.
  {
    CriterionResult& r = out.convergence;
    r = criterion(8, "lumped integrals converge under the proof ceiling");
    try {
      const LimitingResult lim = integrator.limiting_integral(one, linear, scheme, N);
      bool monotone = true, bounded = true;
      for (std::size_t n = 0; n < lim.trace.size(); ++n) {
        if (lim.trace[n].distance > lim.trace[n].ceiling + 1e-8) bounded = false;
        if (n >= 3 && lim.trace[n].distance > lim.trace[n - 1].distance) monotone = false;
      }
      const double last = lim.trace.back().distance;
      r.passed = monotone && bounded && last <= 1e-3;
      r.metrics = {{"h", linear.name()}, {"integrand", one.name()}, {"final_distance", last}, {"monotone_from_2", monotone},
                   {"below_ceiling", bounded}, {"limit", to_json(lim)}};
      r.summary = format("I_%d = %.3e (tol 1e-3), nonincreasing from n = 2: %s, I_n <= ceiling_n + 1e-8: %s", N, last,
                         monotone ? "yes" : "no", bounded ? "yes" : "no");
      record("limiting(one, linear)", lim.value.value.c0);
      record("correction(one, linear)", lim.correction.value.c0);
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("numerical failure: ") + e.what();
    }
  }

  // 9: equality of the limiting and the multifractional integral.
  {
    CriterionResult& r = out.equality;
    r = criterion(9, "limiting integral equals the multifractional integral");
    json cases = json::array();
    bool pass = true;
    double worst_ratio = 0.0;
    try {
      for (const HurstFunction* h : {&linear, &preset})
        for (int which = 0; which < 2; ++which) {
          const IntegrandProcess Y = which == 0 ? one : IntegrandProcess::mbm(lab.field, *h);
          const ComparisonReport c = integrator.comparison_check(Y, *h, scheme, N);
          pass = pass && c.passed;
          worst_ratio = std::max(worst_ratio, c.ratio);
          cases.push_back({{"h", h->name()}, {"integrand", Y.name()}, {"report", to_json(c)}});
          record("limiting(" + Y.name() + ", " + h->name() + ")", c.limiting.value.value.c0);
          record("multifractional(" + Y.name() + ", " + h->name() + ")", c.multifractional.value.c0);
        }
      r.passed = pass;
      r.summary = format("max relative gap %.3e over %zu cases (tol 1e-6 + lumped residual)", worst_ratio, cases.size());
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("numerical failure: ") + e.what();
    }
    r.metrics = {{"max_ratio", worst_ratio}, {"cases", cases}};
  }

  // 10: int_a^b dB^h = B^h_b - B^h_a.
  {
    CriterionResult& r = out.telescoping;
    r = criterion(10, "telescoping of the multifractional integral of Y = 1");
    json pairs = json::array();
    double worst = 0.0;
    try {
      for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.25, 0.75}, {0.1, 0.6}}) {
        const WickIntegral w = integrator.integrate_multifractional(one, preset, a, b);
        const Eigen::VectorXd increment = lab.field->mbm_chaos(b, preset).first_chaos_coefficients() -
                                          lab.field->mbm_chaos(a, preset).first_chaos_coefficients();
        const double gap = std::max((w.value.c1 - increment).cwiseAbs().maxCoeff(), w.value.c2.cwiseAbs().maxCoeff());
        worst = std::max(worst, gap);
        pairs.push_back({{"a", a}, {"b", b}, {"max_coefficient_gap", gap}});
        record(format("multifractional(one, %s, [%g, %g])", preset.name().c_str(), a, b), w.value.c0);
      }
      r.passed = worst <= 1e-6;
      r.summary = format("max coefficient gap %.3e over 3 intervals (tol 1e-6)", worst);
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("numerical failure: ") + e.what();
    }
    r.metrics = {{"h", preset.name()}, {"max_gap", worst}, {"pairs", pairs}};
  }

  // 11: zero expectation of every integral, plus the remaining integral kinds.
  {
    CriterionResult& r = out.zero_mean;
    r = criterion(11, "zero expectation of every integral");
    try {
      const IntegrandProcess fbm = IntegrandProcess::fbm(lab.field, 0.5);
      record("fbm(fbm(0.5), 0.5)", integrator.integrate_wrt_fbm(fbm, 0.5).value.c0);
      record("lumped(mbm, preset, 3)",
             integrator.integrate_wrt_lumped(IntegrandProcess::mbm(lab.field, preset), preset, scheme, std::min(3, N))
                 .value.c0);
      record("correction(mbm, preset)",
             integrator.correction_term(IntegrandProcess::mbm(lab.field, preset), preset).value.c0);
      // An integrand of chaos order two through the sparse assembly.
      const int k = std::min(4, K);
      const IntegrandProcess quadratic = IntegrandProcess::general("quadratic", K, 0, [k, K](double t) {
        ChaosVector y = ChaosVector::constant(K, 1.0 + t, 2);
        for (int j = 0; j < k; ++j) y.set(MultiIndex::unit(j, 2), t / (j + 1));
        return y;
      });
      const QuadratureGrid coarse = QuadratureGrid::uniform(0.0, 1.0, 8, 4);
      const auto& table = *lab.table;
      const ChaosVector sparse = wick_integral_sparse(
          quadratic, [&](double t) { return Eigen::VectorXd(table.columns(std::vector<SpectralPoint>{{preset(t), t}}, kM).m.col(0)); },
          coarse);
      record("sparse(quadratic, preset)", sparse.expectation());
      r.passed = all_zero;
      r.summary = format("%zu integrals, %s", expectations.size(),
                         all_zero ? "every zeroth coefficient is exactly 0" : "nonzero zeroth coefficient found");
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("numerical failure: ") + e.what();
    }
    r.metrics = {{"integrals", expectations}};
  }
  return out;
}

CriterionResult law_convergence(const Lab& lab) {
  CriterionResult r = criterion(12, "patched fBm covariances and marginals approach mBm");
  const HurstFunction h = lab.config.hurst_function();
  const PartitionScheme scheme = lab.config.scheme();
  const int N = lab.config.levels;
  LawConvergenceOptions o;
  for (int n = std::min(2, N); n <= N; ++n) o.levels.push_back(n);
  o.t_grid = linspace(0.1, 1.0, 10);
  o.ks_indices = {2, 5, 8};
  o.samples = lab.config.samples;
  o.seed = lab.config.seed;
  o.workers = lab.config.worker_count();
  const LawConvergenceReport report = law_convergence_report(*lab.field, scheme, h, o);
  const double first = report.levels.front().covariance_distance, last = report.levels.back().covariance_distance;
  const double reduction = last > 0.0 ? first / last : INFINITY;
  double min_p = 1.0;
  for (const auto& m : report.levels.back().marginals) min_p = std::min(min_p, m.patched_vs_mbm.p_value);
  r.passed = reduction >= 4.0 && min_p > 0.01;
  r.metrics = {{"h", h.name()},        {"reduction", std::isfinite(reduction) ? json(reduction) : json("inf")},
               {"min_ks_p_value", min_p}, {"report", to_json(report)}};
  r.summary = format("covariance distance %.3e (n=%d) -> %.3e (n=%d), reduction %.1fx (need >= 4); min KS p = %.3f "
                     "(need > 0.01)",
                     first, report.levels.front().level, last, report.levels.back().level, reduction, min_p);
  return r;
}

template <typename F>
CriterionResult guarded(int id, const std::string& title, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    CriterionResult r = criterion(id, title);
    r.passed = false;
    r.summary = std::string("numerical failure: ") + e.what();
    return r;
  }
}

std::vector<CriterionResult> criteria_1_to_12(const Lab& lab) {
  std::vector<CriterionResult> out;
  out.push_back(guarded(1, "identity operator", [&] { return identity_operator(lab); }));
  out.push_back(guarded(2, "variance identity", [&] { return variance_identity(lab); }));
  out.push_back(guarded(3, "covariance oracle", [&] { return covariance_oracle(lab); }));
  out.push_back(guarded(4, "increment bound", [&] { return increment_bound(lab); }));
  out.push_back(guarded(5, "derivative consistency", [&] { return derivative_consistency(lab); }));
  out.push_back(guarded(6, "S-transform homomorphism", [&] { return s_transform_homomorphism(lab); }));
  out.push_back(guarded(7, "Lipschitz constant", [&] { return lipschitz_noise(lab); }));
  IntegralCriteria ic = integral_criteria(lab);
  out.push_back(std::move(ic.convergence));
  out.push_back(std::move(ic.equality));
  out.push_back(std::move(ic.telescoping));
  out.push_back(std::move(ic.zero_mean));
  out.push_back(guarded(12, "law convergence", [&] { return law_convergence(lab); }));
  return out;
}

json criteria_json(const std::vector<CriterionResult>& cs) {
  json a = json::array();
  for (const auto& c : cs)
    a.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"summary", c.summary}, {"metrics", c.metrics}});
  return a;
}

}  // namespace

bool VerificationReport::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

json VerificationReport::to_json() const {
  return {{"config_hash", config_hash}, {"all_passed", all_passed()}, {"criteria", criteria_json(criteria)}};
}

VerificationReport run_verification(const Lab& lab, const VerifyOptions& options) {
  VerificationReport report;
  report.config_hash = lab.config.hash();
  report.criteria = criteria_1_to_12(lab);
  if (options.determinism) {
    CriterionResult r = criterion(13, "reports identical across runs and worker counts");
    const int workers = lab.config.worker_count();
    const int other = options.alternate_workers > 0 ? options.alternate_workers : (workers > 1 ? 1 : 3);
    try {
      const std::string first = criteria_json(report.criteria).dump();
      const std::string second = criteria_json(criteria_1_to_12(lab.with_workers(other))).dump();
      r.passed = first == second;
      r.metrics = {{"workers", workers}, {"alternate_workers", other}, {"report_bytes", first.size()}};
      r.summary = format("criteria 1-12 rerun with %d instead of %d workers: reports %s", other, workers,
                         r.passed ? "identical" : "differ");
    } catch (const std::exception& e) {
      r.passed = false;
      r.summary = std::string("numerical failure: ") + e.what();
    }
    report.criteria.push_back(std::move(r));
  }
  return report;
}

std::string format_line(const CriterionResult& c) {
  return format("[%s] %2d  %s: %s", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), c.summary.c_str());
}

}  // namespace mbm
