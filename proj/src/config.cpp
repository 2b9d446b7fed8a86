#include "mbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

namespace mbm {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& text, const std::string& field) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ConfigError(field, "expected a number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& text, const std::string& field) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  return v;
}

int to_int(const std::string& text, const std::string& field) {
  const long long v = to_integer(text, field);
  if (v < -(1LL << 31) || v > (1LL << 31) - 1) throw ConfigError(field, "integer out of range");
  return static_cast<int>(v);
}

std::string number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"basis_size", [](RunConfig& c, const std::string& v) { c.basis_size = to_int(v, "basis_size"); }},
      {"chaos_order", [](RunConfig& c, const std::string& v) { c.chaos_order = to_int(v, "chaos_order"); }},
      {"hurst_grid", [](RunConfig& c, const std::string& v) { c.hurst_grid = trim(v); }},
      {"time_grid", [](RunConfig& c, const std::string& v) { c.time_grid = trim(v); }},
      {"partition", [](RunConfig& c, const std::string& v) { c.partition = trim(v); }},
      {"levels", [](RunConfig& c, const std::string& v) { c.levels = to_int(v, "levels"); }},
      {"samples", [](RunConfig& c, const std::string& v) { c.samples = to_int(v, "samples"); }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = to_integer(v, "seed");
         if (s < 0) throw ConfigError("seed", "must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"hurst", [](RunConfig& c, const std::string& v) { c.hurst = trim(v); }},
      {"integrand", [](RunConfig& c, const std::string& v) { c.integrand = trim(v); }},
      {"interval_a", [](RunConfig& c, const std::string& v) { c.interval_a = to_double(v, "interval_a"); }},
      {"interval_b", [](RunConfig& c, const std::string& v) { c.interval_b = to_double(v, "interval_b"); }},
      {"process", [](RunConfig& c, const std::string& v) { c.process = trim(v); }},
      {"export_paths", [](RunConfig& c, const std::string& v) { c.export_paths = to_int(v, "export_paths"); }},
      {"quadrature_panels_level",
       [](RunConfig& c, const std::string& v) { c.quadrature_panels_level = to_int(v, "quadrature_panels_level"); }},
      {"quadrature_order", [](RunConfig& c, const std::string& v) { c.quadrature_order = to_int(v, "quadrature_order"); }},
      {"limit_tolerance", [](RunConfig& c, const std::string& v) { c.limit_tolerance = to_double(v, "limit_tolerance"); }},
      {"extrapolation_depth",
       [](RunConfig& c, const std::string& v) { c.extrapolation_depth = to_int(v, "extrapolation_depth"); }},
      {"workers", [](RunConfig& c, const std::string& v) { c.workers = to_int(v, "workers"); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = trim(v); }},
      {"cache_dir", [](RunConfig& c, const std::string& v) { c.cache_dir = trim(v); }},
  };
  return table;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text, const std::string& field) {
  std::vector<double> g;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(field, "range grid must look like a:b:n");
    const double a = to_double(parts[0], field), b = to_double(parts[1], field);
    const int n = to_int(parts[2], field);
    if (n < 1) throw ConfigError(field, "range grid needs at least one point");
    if (n == 1) return {a};
    for (int i = 0; i < n; ++i) g.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
  } else {
    for (const auto& p : split(text, ',')) g.push_back(to_double(p, field));
  }
  if (g.empty()) throw ConfigError(field, "empty grid");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError(field, "grid must be strictly increasing");
  return g;
}

HurstFunction parse_hurst(const std::string& text, const std::string& field) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw ConfigError(field, "expected constant(H), linear(a,b) or sine(m,A), got '" + text + "'");
  const std::string name = trim(s.substr(0, open));
  std::vector<double> args;
  for (const auto& a : split(s.substr(open + 1, s.size() - open - 2), ',')) args.push_back(to_double(a, field));
  try {
    if (name == "constant" && args.size() == 1) return HurstFunction::constant(args[0]);
    if (name == "linear" && args.size() == 2) return HurstFunction::linear(args[0], args[1]);
    if (name == "sine" && args.size() == 2) return HurstFunction::sine(args[0], args[1]);
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "unknown Hurst preset '" + text + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int number_of_line = 0;
  while (std::getline(is, line)) {
    ++number_of_line;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line" + std::to_string(number_of_line), "expected key = value, got '" + line + "'");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("file", "cannot read " + file.string());
  std::ostringstream os;
  os << is.rdbuf();
  return parse(os.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : setters())
    if (name == key) {
      setter(*this, value);
      return;
    }
  throw ConfigError(key, "unknown key");
}

void RunConfig::validate() const {
  if (basis_size < 1 || basis_size > 4096) throw ConfigError("basis_size", "must be in [1, 4096]");
  if (chaos_order < 2) throw ConfigError("chaos_order", "must be at least 2, the order of the integrals");
  const auto hs = hurst_values();
  if (hs.front() < 0.05 || hs.back() > 0.95) throw ConfigError("hurst_grid", "values must lie in [0.05, 0.95]");
  const auto ts = time_values();
  if (ts.front() < 0.0 || ts.back() > 1.0) throw ConfigError("time_grid", "values must lie in [0, 1]");
  const HurstFunction h = hurst_function();
  if (h.lower() < 0.05 || h.upper() > 0.95)
    throw ConfigError("hurst", "range [" + number(h.lower()) + ", " + number(h.upper()) +
                                   "] must stay inside [0.05, 0.95]");
  if (h.lower() < hs.front() || h.upper() > hs.back())
    throw ConfigError("hurst", "range leaves the Hurst grid [" + number(hs.front()) + ", " + number(hs.back()) + "]");
  if (levels < 0) throw ConfigError("levels", "must be nonnegative");
  const PartitionScheme sc = scheme();
  if (sc.max_level() < levels) throw ConfigError("partition", "defines fewer levels than 'levels'");
  if (quadrature_panels_level < 0 || quadrature_panels_level > 20)
    throw ConfigError("quadrature_panels_level", "must be in [0, 20]");
  if (quadrature_order < 1 || quadrature_order > 64) throw ConfigError("quadrature_order", "must be in [1, 64]");
  for (int n = 0; n <= levels; ++n)
    if ((std::uint64_t{1} << quadrature_panels_level) % sc.count(n) != 0)
      throw ConfigError("partition", "level " + std::to_string(n) + " does not divide the 2^quadrature_panels_level panels");
  if (samples < 2) throw ConfigError("samples", "must be at least 2");
  if (export_paths < 0) throw ConfigError("export_paths", "must be nonnegative");
  if (!(limit_tolerance > 0.0)) throw ConfigError("limit_tolerance", "must be positive");
  if (extrapolation_depth < 0) throw ConfigError("extrapolation_depth", "must be nonnegative");
  if (workers < 0) throw ConfigError("workers", "must be nonnegative");
  if (integrand != "one" && integrand != "mbm") throw ConfigError("integrand", "must be 'one' or 'mbm'");
  if (!(interval_a >= 0.0 && interval_b <= 1.0 && interval_a < interval_b))
    throw ConfigError("interval_a", "need 0 <= interval_a < interval_b <= 1");
  if (process != "mbm") {
    const bool fbm = process.rfind("fbm(", 0) == 0, patched = process.rfind("patched(", 0) == 0;
    if ((!fbm && !patched) || process.back() != ')')
      throw ConfigError("process", "must be mbm, fbm(H) or patched(n)");
    const std::string arg = process.substr(fbm ? 4 : 8, process.size() - (fbm ? 5 : 9));
    std::size_t used = 0;
    try {
      if (fbm) {
        const double H = std::stod(arg, &used);
        if (!(H >= 0.05 && H <= 0.95)) throw ConfigError("process", "fbm(H) needs H in [0.05, 0.95]");
      } else {
        const int n = std::stoi(arg, &used);
        if (n < 0 || n > levels) throw ConfigError("process", "patched(n) needs 0 <= n <= levels");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("process", "cannot read the argument of '" + process + "'");
    }
    if (used != arg.size()) throw ConfigError("process", "cannot read the argument of '" + process + "'");
  }
  if (out.empty()) throw ConfigError("out", "must not be empty");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "basis_size = " << basis_size << "\n"
     << "chaos_order = " << chaos_order << "\n"
     << "hurst_grid = " << hurst_grid << "\n"
     << "time_grid = " << time_grid << "\n"
     << "partition = " << partition << "\n"
     << "levels = " << levels << "\n"
     << "samples = " << samples << "\n"
     << "seed = " << seed << "\n"
     << "hurst = " << hurst << "\n"
     << "integrand = " << integrand << "\n"
     << "interval_a = " << number(interval_a) << "\n"
     << "interval_b = " << number(interval_b) << "\n"
     << "process = " << process << "\n"
     << "export_paths = " << export_paths << "\n"
     << "quadrature_panels_level = " << quadrature_panels_level << "\n"
     << "quadrature_order = " << quadrature_order << "\n"
     << "limit_tolerance = " << number(limit_tolerance) << "\n"
     << "extrapolation_depth = " << extrapolation_depth << "\n";
  // workers, out and cache_dir do not change results and stay out of the hash
  return os.str();
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::vector<double> RunConfig::hurst_values() const { return parse_grid(hurst_grid, "hurst_grid"); }
std::vector<double> RunConfig::time_values() const { return parse_grid(time_grid, "time_grid"); }
HurstFunction RunConfig::hurst_function() const { return parse_hurst(hurst, "hurst"); }

PartitionScheme RunConfig::scheme() const {
  if (partition == "dyadic") return PartitionScheme::dyadic(levels);
  std::vector<std::uint64_t> q;
  for (const auto& p : split(partition, ',')) {
    const long long v = to_integer(p, "partition");
    if (v < 1) throw ConfigError("partition", "cell counts must be positive");
    q.push_back(static_cast<std::uint64_t>(v));
  }
  try {
    return PartitionScheme::custom(std::move(q));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("partition", e.what());
  }
}

int RunConfig::worker_count() const {
  if (workers > 0) return workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::filesystem::path RunConfig::cache_path() const {
  return cache_dir.empty() ? std::filesystem::path(out) / "cache" : std::filesystem::path(cache_dir);
}

IntegrationOptions RunConfig::integration_options() const {
  IntegrationOptions o;
  o.panels_level = quadrature_panels_level;
  o.order = quadrature_order;
  o.workers = worker_count();
  o.limit_tolerance = limit_tolerance;
  o.extrapolation_depth = extrapolation_depth;
  return o;
}

}  // namespace mbm
