#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "mbm/lab.hpp"

namespace mbm {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// One-line account of the decisive numbers.
  std::string summary;
  nlohmann::json metrics = nlohmann::json::object();
};

struct VerificationReport {
  std::string config_hash;
  std::vector<CriterionResult> criteria;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  /// Rerun criteria 1-12 with another worker count and compare the reports.
  bool determinism = true;
  /// Worker count of the rerun; 0 picks 1 when the lab uses several workers
  /// and 3 otherwise.
  int alternate_workers = 0;
};

/// Runs the acceptance criteria 1-13 on the lab's configuration. Numerical
/// exceptions inside a criterion mark that criterion as failed.
VerificationReport run_verification(const Lab& lab, const VerifyOptions& options = {});

/// "[PASS] 7  title: summary"
std::string format_line(const CriterionResult& c);

}  // namespace mbm
