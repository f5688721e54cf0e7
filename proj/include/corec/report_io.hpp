#pragma once

#include <string>

#include <json.hpp>

#include "corec/scenarios.hpp"

namespace corec {

// Report serialization. The timestamp field is informational and excluded
// from the determinism contract; everything else is a pure function of
// the scenario and seed.
nlohmann::json report_to_json(const RectifyReport& rep, std::uint64_t seed,
                              const RectifySettings& settings,
                              bool include_timestamp = true);

// CSV rows "iteration,defect".
std::string trace_csv(const RectifyReport& rep);

nlohmann::json sweep_to_json(const SweepResult& res);

// CSV columns: epsilon, final_defect, distance, fitted_order, status.
std::string sweep_csv(const SweepResult& res);

// Tabulated finite-group cochain files:
// {"schema":1, "arity":n, "values":[matrix...]} flattened row-major with
// complex entries as [re, im] pairs.
nlohmann::json cochain_to_json(const Cochain& c);
Cochain cochain_from_json(const nlohmann::json& j, const CompactGroupPtr& g,
                          const TargetGroupPtr& t, const GActionPtr& a);

// Write-to-temp then atomic rename; no partial files on failure.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace corec
