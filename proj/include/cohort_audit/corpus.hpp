#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cohort_audit {

// Calendar date, ISO-8601 "YYYY-MM-DD".
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  static Date parse(const std::string& iso);  // throws ValidationError
  std::string to_string() const;
  auto operator<=>(const Date&) const = default;
};

// One de-identified utterance. Embeddings are extracted upstream; confidence
// is the recognizer's estimate that its own hypothesis is correct.
struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::optional<std::string> zip;  // 5 characters when present
  std::vector<double> embedding;
  double confidence = 0.0;  // in [0, 1]
  std::string hypothesis;
  std::vector<std::string> blind_passes;  // exactly 0 or 3 entries
  std::optional<std::string> adjudicated_reference;
  Date timestamp;
  bool is_wakeword_only = false;
  double duration_s = 0.0;

  bool operator==(const UtteranceRecord&) const = default;
};

struct CorpusFilterConfig {
  double confidence_trim_fraction = 0.039;  // in [0, 1)
  bool drop_wakeword_only = true;
  std::optional<std::pair<Date, Date>> date_range;  // inclusive

  bool operator==(const CorpusFilterConfig&) const = default;
};

// Ordered, validated collection of utterances with a corpus-wide embedding
// dimension. Immutable after load; filtering returns a new value. The list of
// filter configs already applied travels with the corpus so re-applying an
// identical config is a no-op and reports can state exactly what was removed.
struct Corpus {
  std::vector<UtteranceRecord> records;
  std::size_t embedding_dim = 0;
  std::vector<CorpusFilterConfig> applied_filters;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  double total_hours() const;
  std::size_t speaker_count() const;
  double mean_confidence() const;  // throws ValidationError on empty corpus
};

// Validates a single record against the corpus contract. Returns an error
// message, or empty string if the record is valid.
std::string validate_record(const UtteranceRecord& rec, std::size_t expected_dim);

nlohmann::ordered_json record_to_json(const UtteranceRecord& rec);
UtteranceRecord record_from_json(const nlohmann::json& obj);

// JSONL ingestion. Errors name the offending line and field.
Corpus load_corpus(const std::string& path, std::size_t expected_dim);
Corpus corpus_from_jsonl(const std::string& text, std::size_t expected_dim,
                         const std::string& source_name = "<memory>");
std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

// Evaluation-set filters: drops the lowest confidence_trim_fraction of
// utterances (count = floor(fraction * N), ties broken by utterance_id),
// wakeword-only utterances, and out-of-range dates. Survivor order is
// preserved. Applying the same config twice equals applying it once.
Corpus apply_filters(const Corpus& corpus, const CorpusFilterConfig& config);

struct CensusRow {
  std::string zip;
  long long population = 0;
  std::map<std::string, double> attribute_shares;  // each share in [0, 1]
};

struct CensusTable {
  std::vector<std::string> attributes;  // column order from the file header
  std::vector<CensusRow> rows;

  const CensusRow* find(const std::string& zip) const;
  bool has_attribute(const std::string& name) const;

  std::unordered_map<std::string, std::size_t> index_by_zip;
};

// CSV with header "zip,population,<attr1>,<attr2>,...".
CensusTable load_census(const std::string& path);
CensusTable census_from_csv(const std::string& text, const std::string& source_name = "<memory>");
std::string census_to_csv(const CensusTable& table);
void save_census(const CensusTable& table, const std::string& path);

}  // namespace cohort_audit
