#include "mbm/json_io.hpp"

#include <stdexcept>

namespace mbm {

using nlohmann::json;

json to_json(const ChaosVector& v) {
  json terms = json::array();
  for (const auto& [alpha, c] : v.terms()) {
    json index = json::array();
    for (const auto& [k, p] : alpha.entries()) index.push_back({k, p});
    terms.push_back({{"index", index}, {"value", c}});
  }
  return {{"basis_size", v.basis_size()}, {"order", v.order()}, {"terms", terms}};
}

ChaosVector chaos_from_json(const json& j) {
  try {
    ChaosVector v(j.at("basis_size").get<int>(), j.at("order").get<int>());
    for (const auto& t : j.at("terms")) {
      std::vector<std::pair<int, int>> entries;
      for (const auto& e : t.at("index")) entries.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      v.set(MultiIndex(std::move(entries)), t.at("value").get<double>());
    }
    return v;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed chaos vector: ") + e.what());
  }
}

json to_json(const WickIntegral& w) {
  return {{"p0", w.p0}, {"q", w.q}, {"chaos", to_json(w.value.to_chaos())}};
}

json to_json(const LimitTraceEntry& e) {
  return {{"level", e.level},           {"cells", e.cells},
          {"distance", e.distance},     {"ceiling", e.ceiling},
          {"raw_change", e.raw_change}, {"extrapolated_change", e.extrapolated_change}};
}

json to_json(const LimitingResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back(to_json(e));
  return {{"gamma", r.gamma}, {"residual", r.residual}, {"converged_level", r.converged_level}, {"trace", trace}};
}

json to_json(const ComparisonReport& r) {
  return {{"gap", r.gap},         {"reference_norm", r.reference_norm}, {"ratio", r.ratio},
          {"allowed", r.allowed}, {"passed", r.passed},                 {"q", r.q},
          {"limiting", to_json(r.limiting)}};
}

json to_json(const LawConvergenceReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) {
    json marginals = json::array();
    for (const auto& m : l.marginals)
      marginals.push_back({{"time", m.time},
                           {"ks_statistic", m.patched_vs_mbm.statistic},
                           {"ks_p_value", m.patched_vs_mbm.p_value},
                           {"coupled_rms", m.coupled_rms}});
    levels.push_back({{"level", l.level},
                      {"cells", l.cells},
                      {"covariance_distance", l.covariance_distance},
                      {"hurst_distance", l.hurst_distance},
                      {"marginals", marginals}});
  }
  return {{"levels", levels}, {"rate_constant", r.rate_constant}, {"monotone", r.monotone}};
}

json to_json(const HolderDiagnostic& d) {
  return {{"lambda", d.lambda}, {"c", d.c}, {"hurst", d.hurst}, {"exponents", d.exponents}};
}

json to_json(const LipschitzDiagnostic& d) {
  return {{"p0", d.p0},
          {"gamma", d.gamma},
          {"gamma_refined", d.gamma_refined},
          {"relative_change", d.relative_change},
          {"stable", d.stable}};
}

}  // namespace mbm
