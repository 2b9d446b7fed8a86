// mbmlab: command-line front end of the mBm / Wick-Ito lab.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mbm/config.hpp"
#include "mbm/json_io.hpp"
#include "mbm/lab.hpp"
#include "mbm/statistics.hpp"
#include "mbm/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string config_file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int levels = 0;
  int basis = 0;
  int workers = -1;
  std::string out;
  bool force_rebuild = false;
  bool skip_determinism = false;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& hash) : out_(path), path_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# config_hash=" << hash << '\n';
  }
  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
    out_ << '\n';
  }
  const fs::path& path() const { return path_; }

 private:
  std::ofstream out_;
  fs::path path_;
};

void write_json(const fs::path& path, json j, const std::string& hash) {
  j["config_hash"] = hash;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

mbm::RunConfig build_config(const Options& o, const CLI::App& app) {
  mbm::RunConfig c = o.config_file.empty() ? mbm::RunConfig{} : mbm::RunConfig::load(o.config_file);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw mbm::ConfigError(kv, "override must look like key=value");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (app.count("--seed")) c.seed = o.seed;
  if (app.count("--levels")) c.levels = o.levels;
  if (app.count("--basis")) c.basis_size = o.basis;
  if (app.count("--workers")) c.workers = o.workers;
  if (app.count("--out")) c.out = o.out;
  c.validate();
  return c;
}

std::vector<double> positive_times(const mbm::RunConfig& c) {
  std::vector<double> t;
  for (double x : c.time_values())
    if (x > 0.0) t.push_back(x);
  return t;
}

mbm::ProcessDescriptor process_of(const mbm::RunConfig& c) {
  const std::string& p = c.process;
  if (p == "mbm") return mbm::ProcessDescriptor::mbm(c.hurst_function());
  if (p.rfind("fbm(", 0) == 0) return mbm::ProcessDescriptor::fbm(std::stod(p.substr(4)));
  const int n = std::stoi(p.substr(8));
  return mbm::patched_descriptor(c.scheme(), c.hurst_function(), n);
}

double process_variance(const mbm::ProcessDescriptor& d, double t) {
  const double H = d.exponent(t);
  return mbm::field_covariance(t, t, H, H);
}

int cmd_tables(const mbm::Lab& lab) {
  const auto& c = lab.config;
  const fs::path file = mbm::OperatorTable::cache_path(c.cache_path(), lab.table->content_hash());
  json j = {{"cache_file", file.string()},
            {"built", lab.table_built},
            {"basis_size", lab.table->size()},
            {"hurst_points", c.hurst_values().size()},
            {"time_points", c.time_values().size()}};
  write_json(fs::path(c.out) / "tables.json", j, c.hash());
  std::cout << (lab.table_built ? "built " : "reused ") << file.string() << '\n';
  return kExitOk;
}

int cmd_simulate(const mbm::Lab& lab) {
  const auto& c = lab.config;
  const auto t = c.time_values();
  const mbm::ProcessDescriptor d = process_of(c);
  const int w = c.worker_count();
  const mbm::GaussianEnsemble ensemble(c.seed, c.samples, lab.table->size(), w);
  const Eigen::MatrixXd paths = mbm::sample_paths(d, t, *lab.field, ensemble, w);

  CsvWriter csv(fs::path(c.out) / "paths.csv", c.hash());
  std::vector<std::string> names;
  for (double x : t) names.push_back(num(x));
  csv.header(names);
  const int rows = std::min<int>(c.export_paths, static_cast<int>(paths.rows()));
  for (int m = 0; m < rows; ++m) {
    std::vector<double> row(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) row[i] = paths(m, static_cast<Eigen::Index>(i));
    csv.row(row);
  }

  // Empirical variance against the closed form, with a 3-sigma band for
  // Gaussian samples: Var(s^2) = 2 sigma^4 / (M - 1).
  json band = json::array();
  int outside = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= 0.0) continue;
    const Eigen::VectorXd col = paths.col(static_cast<Eigen::Index>(i));
    const mbm::Moments mo = mbm::moments(std::vector<double>(col.data(), col.data() + col.size()));
    const double exact = process_variance(d, t[i]);
    const double half = 3.0 * exact * std::sqrt(2.0 / (c.samples - 1));
    const bool inside = std::abs(mo.variance - exact) <= half;
    outside += inside ? 0 : 1;
    band.push_back({{"t", t[i]}, {"mean", mo.mean}, {"variance", mo.variance}, {"exact_variance", exact},
                    {"band_halfwidth", half}, {"inside", inside}});
  }
  write_json(fs::path(c.out) / "simulate.json",
             {{"process", d.name}, {"samples", c.samples}, {"exported_paths", rows}, {"seed", c.seed},
              {"variance_band", band}, {"points_outside_band", outside}},
             c.hash());
  std::cout << "wrote " << rows << " paths of " << d.name << " to " << csv.path().string() << '\n';
  return kExitOk;
}

int cmd_covariance(const mbm::Lab& lab) {
  const auto& c = lab.config;
  const auto t = positive_times(c);
  const mbm::HurstFunction h = c.hurst_function();
  const int w = c.worker_count();
  std::vector<double> hs(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) hs[i] = h(t[i]);
  const Eigen::MatrixXd coeff = lab.field->coefficients(mbm::kCumM, t, hs, w);

  CsvWriter csv(fs::path(c.out) / "covariance.csv", c.hash());
  csv.header({"t", "s", "chaos", "closed_form"});
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double chaos = coeff.col(static_cast<Eigen::Index>(i)).dot(coeff.col(static_cast<Eigen::Index>(j)));
      const double exact = mbm::mbm_covariance(t[i], t[j], h);
      worst = std::max(worst, std::abs(chaos - exact));
      csv.row({t[i], t[j], chaos, exact});
    }

  const auto hgrid = c.hurst_values();
  const mbm::HolderDiagnostic holder = mbm::holder_diagnostic(t, hgrid);
  const mbm::DerivativeBound bound = mbm::derivative_bound(*lab.field, t, hgrid, w);
  write_json(fs::path(c.out) / "covariance.json",
             {{"h", h.name()}, {"max_abs_covariance_gap", worst}, {"holder", mbm::to_json(holder)},
              {"Delta", bound.delta}},
             c.hash());
  std::cout << "Lambda = " << num(holder.lambda) << ", Delta = " << num(bound.delta)
            << ", max covariance gap = " << num(worst) << '\n';
  return kExitOk;
}

int cmd_approximate(const mbm::Lab& lab) {
  const auto& c = lab.config;
  const mbm::HurstFunction h = c.hurst_function();
  const mbm::PartitionScheme scheme = c.scheme();
  mbm::LawConvergenceOptions o;
  for (int n = 0; n <= c.levels; ++n) o.levels.push_back(n);
  o.t_grid = positive_times(c);
  const std::size_t nt = o.t_grid.size();
  for (std::size_t i : {nt / 4, nt / 2, (3 * nt) / 4, nt - 1})
    if (o.ks_indices.empty() || o.ks_indices.back() != i) o.ks_indices.push_back(i);
  o.samples = c.samples;
  o.seed = c.seed;
  o.workers = c.worker_count();
  const mbm::LawConvergenceReport report = mbm::law_convergence_report(*lab.field, scheme, h, o);

  CsvWriter csv(fs::path(c.out) / "approximate.csv", c.hash());
  csv.header({"level", "cells", "covariance_distance", "hurst_distance"});
  for (const auto& l : report.levels)
    csv.row({static_cast<double>(l.level), static_cast<double>(l.cells), l.covariance_distance, l.hurst_distance});
  write_json(fs::path(c.out) / "approximate.json", {{"h", h.name()}, {"report", mbm::to_json(report)}}, c.hash());
  std::cout << "covariance distance " << num(report.levels.front().covariance_distance) << " (n = 0) -> "
            << num(report.levels.back().covariance_distance) << " (n = " << c.levels << ")\n";
  return kExitOk;
}

void write_trace(const fs::path& path, const std::vector<mbm::LimitTraceEntry>& trace, const std::string& hash) {
  CsvWriter csv(path, hash);
  csv.header({"level", "cells", "distance", "ceiling", "raw_change", "extrapolated_change"});
  for (const auto& e : trace)
    csv.row({static_cast<double>(e.level), static_cast<double>(e.cells), e.distance, e.ceiling, e.raw_change,
             e.extrapolated_change});
}

int cmd_integrate(const mbm::Lab& lab) {
  const auto& c = lab.config;
  const mbm::HurstFunction h = c.hurst_function();
  const mbm::WickItoIntegrator integrator = lab.integrator();
  const mbm::IntegrandProcess Y = c.integrand == "one" ? mbm::IntegrandProcess::constant(lab.table->size())
                                                       : mbm::IntegrandProcess::mbm(lab.field, h);
  const mbm::WickIntegral value = integrator.integrate_multifractional(Y, h, c.interval_a, c.interval_b);
  json j = {{"integrand", Y.name()},
            {"h", h.name()},
            {"interval", {c.interval_a, c.interval_b}},
            {"integral", mbm::to_json(value.value.to_chaos(c.chaos_order))},
            {"q", value.q}};

  int code = kExitOk;
  if (c.interval_a == 0.0 && c.interval_b == 1.0) {
    try {
      const mbm::ComparisonReport report = integrator.comparison_check(Y, h, c.scheme(), c.levels);
      j["comparison"] = mbm::to_json(report);
      write_trace(fs::path(c.out) / "integrate_trace.csv", report.limiting.trace, c.hash());
      std::cout << "limiting vs multifractional: relative gap " << num(report.ratio) << " (allowed "
                << num(report.allowed) << ")\n";
      if (!report.passed) {
        std::cerr << "criterion 9 (limiting integral equals the multifractional integral) failed\n";
        code = kExitAssertion;
      }
    } catch (const mbm::NonConvergenceError& e) {
      write_trace(fs::path(c.out) / "integrate_trace.csv", e.trace, c.hash());
      j["non_convergence"] = e.what();
      write_json(fs::path(c.out) / "integrate.json", j, c.hash());
      throw;
    }
  }
  write_json(fs::path(c.out) / "integrate.json", j, c.hash());
  std::cout << "wrote " << (fs::path(c.out) / "integrate.json").string() << '\n';
  return code;
}

int cmd_verify(const mbm::Lab& lab, const Options& o) {
  mbm::VerifyOptions vo;
  vo.determinism = !o.skip_determinism;
  const mbm::VerificationReport report = mbm::run_verification(lab, vo);
  for (const auto& cr : report.criteria) std::cout << mbm::format_line(cr) << '\n';
  write_json(fs::path(lab.config.out) / "verify.json", report.to_json(), report.config_hash);
  if (!report.all_passed()) {
    for (const auto& cr : report.criteria)
      if (!cr.passed) std::cerr << "criterion " << cr.id << " (" << cr.title << ") failed\n";
    return kExitAssertion;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifractional Brownian motion and Wick-Ito integration lab"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "override one configuration key (key=value)");
  app.add_option("--seed", o.seed, "Monte Carlo seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--levels", o.levels, "maximal partition level N");
  app.add_option("--basis", o.basis, "number of Hermite functions K");
  app.add_option("--workers", o.workers, "worker threads (0: hardware concurrency)");
  app.add_flag("--force-rebuild", o.force_rebuild, "rebuild the operator table even if a cache file exists");

  auto* tables = app.add_subcommand("tables", "build or reuse the cached operator table");
  auto* simulate = app.add_subcommand("simulate", "sample paths of the configured process");
  auto* covariance = app.add_subcommand("covariance", "chaos vs closed-form covariance, Lambda and Delta");
  auto* approximate = app.add_subcommand("approximate", "law convergence of patched fBm to mBm");
  auto* integrate = app.add_subcommand("integrate", "Wick-Ito integral of the configured integrand");
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_flag("--skip-determinism", o.skip_determinism, "do not rerun with a second worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const mbm::RunConfig config = build_config(o, app);
    fs::create_directories(config.out);
    const mbm::Lab lab = mbm::Lab::open(config, o.force_rebuild);
    if (*tables) return cmd_tables(lab);
    if (*simulate) return cmd_simulate(lab);
    if (*covariance) return cmd_covariance(lab);
    if (*approximate) return cmd_approximate(lab);
    if (*integrate) return cmd_integrate(lab);
    if (*verify) return cmd_verify(lab, o);
  } catch (const mbm::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
