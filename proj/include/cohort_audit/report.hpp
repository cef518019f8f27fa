#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "cohort_audit/agreement.hpp"
#include "cohort_audit/cohort_map.hpp"
#include "cohort_audit/cohorts.hpp"
#include "cohort_audit/corpus.hpp"
#include "cohort_audit/wer.hpp"

namespace cohort_audit {

inline constexpr const char* kToolName = "cohort-audit";
inline constexpr const char* kToolVersion = "0.1.0";

// WER reference for an utterance: the adjudicated transcript when present,
// otherwise the blind-pass majority; nullopt when neither resolves.
std::optional<std::string> resolve_reference_text(const UtteranceRecord& rec);

// FNV-1a over the canonical dump of a config object, as a hex string.
std::string config_hash_hex(const nlohmann::ordered_json& config);

// Full audit report: corpus summary, cohort sizes, confidence disparity, WER
// gap, and agreement/PDR sections. Deterministic for identical inputs.
nlohmann::ordered_json build_audit_report(const Corpus& corpus, const CohortMapFile& map,
                                          const CohortAssignments& assignments);

// Table-shaped CSV views of a report for plotting: <prefix>confidence_disparity.csv,
// <prefix>wer_gap.csv, <prefix>agreement.csv.
void write_csv_tables(const nlohmann::ordered_json& report, const std::string& prefix);

}  // namespace cohort_audit
