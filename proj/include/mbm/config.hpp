#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbm/gaussian_processes.hpp"
#include "mbm/partition_scheme.hpp"
#include "mbm/wick_ito_integrals.hpp"

namespace mbm {

/// Malformed configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("config." + field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Settings of one experiment. Stored as plain key = value text; every key
/// has a default, so an empty file is a valid configuration.
struct RunConfig {
  int basis_size = 512;
  int chaos_order = 4;
  std::string hurst_grid = "0.05:0.95:19";
  std::string time_grid = "0:1:65";
  std::string partition = "dyadic";
  int levels = 10;
  int samples = 10000;
  std::uint64_t seed = 42;
  std::string hurst = "sine(0.5,0.15)";
  std::string integrand = "one";
  double interval_a = 0.0;
  double interval_b = 1.0;
  std::string process = "mbm";
  int export_paths = 100;
  int quadrature_panels_level = 10;
  int quadrature_order = 5;
  double limit_tolerance = 1e-8;
  int extrapolation_depth = 4;
  int workers = 0;  ///< 0: one per hardware thread
  std::string out = "out";
  std::string cache_dir;  ///< empty: <out>/cache

  /// Parses key = value lines ('#' starts a comment) over the defaults.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);

  /// Applies one key = value override (same syntax as the file).
  void set(const std::string& key, const std::string& value);

  /// Checks ranges and grammar of every field; throws ConfigError.
  void validate() const;

  /// Canonical key = value text, one line per key in fixed order.
  std::string canonical() const;
  /// FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;

  std::vector<double> hurst_values() const;
  std::vector<double> time_values() const;
  HurstFunction hurst_function() const;
  PartitionScheme scheme() const;
  int worker_count() const;
  std::filesystem::path cache_path() const;
  IntegrationOptions integration_options() const;
};

/// "a:b:n" (n equally spaced points from a to b) or a comma separated list.
std::vector<double> parse_grid(const std::string& text, const std::string& field);

/// constant(H), linear(a,b) or sine(m,A).
HurstFunction parse_hurst(const std::string& text, const std::string& field);

}  // namespace mbm
