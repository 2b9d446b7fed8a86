#pragma once

#include "json.hpp"

#include "mbm/chaos_algebra.hpp"
#include "mbm/gaussian_processes.hpp"
#include "mbm/partition_scheme.hpp"
#include "mbm/wick_ito_integrals.hpp"

namespace mbm {

/// {"basis_size": K, "order": N_c, "terms": [{"index": [[k, power], ...], "value": c}, ...]}
nlohmann::json to_json(const ChaosVector& v);
ChaosVector chaos_from_json(const nlohmann::json& j);

nlohmann::json to_json(const WickIntegral& w);
nlohmann::json to_json(const LimitTraceEntry& e);
nlohmann::json to_json(const LimitingResult& r);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const LawConvergenceReport& r);
nlohmann::json to_json(const HolderDiagnostic& d);
nlohmann::json to_json(const LipschitzDiagnostic& d);

}  // namespace mbm
