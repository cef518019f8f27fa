#include "cohort_audit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "cohort_audit/error.hpp"

namespace cohort_audit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return d[m - 1];
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << text;
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace

Date Date::parse(const std::string& iso) {
  auto fail = [&] { throw ValidationError("invalid ISO-8601 date: '" + iso + "'"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') fail();
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(iso[i]))) fail();
  Date d;
  d.year = std::stoi(iso.substr(0, 4));
  d.month = std::stoi(iso.substr(5, 2));
  d.day = std::stoi(iso.substr(8, 2));
  if (d.month < 1 || d.month > 12) fail();
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

double Corpus::total_hours() const {
  double s = 0.0;
  for (const auto& r : records) s += r.duration_s;
  return s / 3600.0;
}

std::size_t Corpus::speaker_count() const {
  std::unordered_set<std::string> speakers;
  for (const auto& r : records) speakers.insert(r.speaker_id);
  return speakers.size();
}

double Corpus::mean_confidence() const {
  if (records.empty()) throw ValidationError("mean_confidence: empty corpus");
  double s = 0.0;
  for (const auto& r : records) s += r.confidence;
  return s / static_cast<double>(records.size());
}

std::string validate_record(const UtteranceRecord& rec, std::size_t expected_dim) {
  if (rec.utterance_id.empty()) return "utterance_id must be nonempty";
  if (rec.speaker_id.empty()) return "speaker_id must be nonempty";
  if (!(rec.confidence >= 0.0 && rec.confidence <= 1.0))
    return "confidence must be in [0,1], got " + std::to_string(rec.confidence);
  if (rec.blind_passes.size() != 0 && rec.blind_passes.size() != 3)
    return "blind_passes must have 0 or 3 entries, got " + std::to_string(rec.blind_passes.size());
  if (rec.embedding.size() != expected_dim)
    return "embedding dimension " + std::to_string(rec.embedding.size()) +
           " does not match corpus dimension " + std::to_string(expected_dim);
  if (rec.zip && rec.zip->size() != 5) return "zip must be 5 characters, got '" + *rec.zip + "'";
  if (!(rec.duration_s >= 0.0)) return "duration_s must be nonnegative";
  return "";
}

ordered_json record_to_json(const UtteranceRecord& rec) {
  ordered_json j;
  j["utterance_id"] = rec.utterance_id;
  j["speaker_id"] = rec.speaker_id;
  if (rec.zip) j["zip"] = *rec.zip;
  j["embedding"] = rec.embedding;
  j["confidence"] = rec.confidence;
  j["hypothesis"] = rec.hypothesis;
  j["blind_passes"] = rec.blind_passes;
  if (rec.adjudicated_reference) j["adjudicated_reference"] = *rec.adjudicated_reference;
  j["timestamp"] = rec.timestamp.to_string();
  j["is_wakeword_only"] = rec.is_wakeword_only;
  j["duration_s"] = rec.duration_s;
  return j;
}

UtteranceRecord record_from_json(const json& obj) {
  if (!obj.is_object()) throw ValidationError("record is not a JSON object");
  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
      throw ValidationError(std::string("missing required key '") + key + "'");
    return *it;
  };
  auto optional_string = [&](const char* key) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string("key '") + key + "' must be a string");
    return it->get<std::string>();
  };

  UtteranceRecord rec;
  try {
    rec.utterance_id = require("utterance_id").get<std::string>();
    rec.speaker_id = require("speaker_id").get<std::string>();
    rec.zip = optional_string("zip");
    rec.embedding = require("embedding").get<std::vector<double>>();
    rec.confidence = require("confidence").get<double>();
    rec.hypothesis = require("hypothesis").get<std::string>();
    if (auto it = obj.find("blind_passes"); it != obj.end() && !it->is_null())
      rec.blind_passes = it->get<std::vector<std::string>>();
    rec.adjudicated_reference = optional_string("adjudicated_reference");
    rec.timestamp = Date::parse(require("timestamp").get<std::string>());
    rec.is_wakeword_only = require("is_wakeword_only").get<bool>();
    rec.duration_s = require("duration_s").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad field type: ") + e.what());
  }
  return rec;
}

Corpus corpus_from_jsonl(const std::string& text, std::size_t expected_dim,
                         const std::string& source_name) {
  if (expected_dim == 0) throw ValidationError("expected_dim must be positive");
  Corpus corpus;
  corpus.embedding_dim = expected_dim;
  std::unordered_set<std::string> seen_ids;

  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto at = [&](const std::string& msg) {
      return source_name + ":" + std::to_string(line_no) + ": " + msg;
    };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(at(std::string("malformed JSON: ") + e.what()));
    }
    UtteranceRecord rec;
    try {
      rec = record_from_json(obj);
    } catch (const ValidationError& e) {
      throw ValidationError(at(e.what()));
    }
    if (std::string err = validate_record(rec, expected_dim); !err.empty())
      throw ValidationError(at(err));
    if (!seen_ids.insert(rec.utterance_id).second)
      throw ValidationError(at("duplicate utterance_id '" + rec.utterance_id + "'"));
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, std::size_t expected_dim) {
  return corpus_from_jsonl(read_file(path), expected_dim, path);
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& rec : corpus.records) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  write_file(path, corpus_to_jsonl(corpus));
}

Corpus apply_filters(const Corpus& corpus, const CorpusFilterConfig& config) {
  if (corpus.empty()) throw ValidationError("apply_filters: empty corpus");
  if (!(config.confidence_trim_fraction >= 0.0 && config.confidence_trim_fraction < 1.0))
    throw ValidationError("confidence_trim_fraction must be in [0,1)");
  if (config.date_range && config.date_range->second < config.date_range->first)
    throw ValidationError("date_range end precedes start");

  // Re-applying a config this corpus has already been filtered with is a
  // no-op; the trim count would otherwise compound on each call.
  for (const auto& applied : corpus.applied_filters)
    if (applied == config) return corpus;

  const std::size_t n = corpus.size();
  const auto trim_count =
      static_cast<std::size_t>(config.confidence_trim_fraction * static_cast<double>(n));

  // Lowest-confidence utterances, ties broken by utterance_id ascending.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = corpus.records[a];
    const auto& rb = corpus.records[b];
    if (ra.confidence != rb.confidence) return ra.confidence < rb.confidence;
    return ra.utterance_id < rb.utterance_id;
  });
  std::vector<bool> trimmed(n, false);
  for (std::size_t i = 0; i < trim_count; ++i) trimmed[order[i]] = true;

  Corpus out;
  out.embedding_dim = corpus.embedding_dim;
  out.applied_filters = corpus.applied_filters;
  out.applied_filters.push_back(config);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = corpus.records[i];
    if (trimmed[i]) continue;
    if (config.drop_wakeword_only && rec.is_wakeword_only) continue;
    if (config.date_range &&
        (rec.timestamp < config.date_range->first || config.date_range->second < rec.timestamp))
      continue;
    out.records.push_back(rec);
  }
  return out;
}

const CensusRow* CensusTable::find(const std::string& zip) const {
  auto it = index_by_zip.find(zip);
  if (it == index_by_zip.end()) return nullptr;
  return &rows[it->second];
}

bool CensusTable::has_attribute(const std::string& name) const {
  return std::find(attributes.begin(), attributes.end(), name) != attributes.end();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

CensusTable census_from_csv(const std::string& text, const std::string& source_name) {
  CensusTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto at = [&](const std::string& msg) {
    return source_name + ":" + std::to_string(line_no) + ": " + msg;
  };

  if (!std::getline(in, line)) throw ValidationError(source_name + ": empty census file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "zip" || header[1] != "population")
    throw ValidationError(at("census header must be 'zip,population,<attr1>,...'"));
  table.attributes.assign(header.begin() + 2, header.end());

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError(at("expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size())));
    CensusRow row;
    row.zip = fields[0];
    if (row.zip.size() != 5) throw ValidationError(at("zip must be 5 characters: '" + row.zip + "'"));
    try {
      row.population = std::stoll(fields[1]);
    } catch (const std::exception&) {
      throw ValidationError(at("bad population '" + fields[1] + "'"));
    }
    if (row.population < 0) throw ValidationError(at("population must be nonnegative"));
    for (std::size_t k = 0; k < table.attributes.size(); ++k) {
      double share = 0.0;
      try {
        share = std::stod(fields[2 + k]);
      } catch (const std::exception&) {
        throw ValidationError(at("bad share '" + fields[2 + k] + "' for " + table.attributes[k]));
      }
      if (!(share >= 0.0 && share <= 1.0))
        throw ValidationError(at("share for " + table.attributes[k] + " must be in [0,1], got " +
                                 fields[2 + k]));
      row.attribute_shares[table.attributes[k]] = share;
    }
    if (!table.index_by_zip.emplace(row.zip, table.rows.size()).second)
      throw ValidationError(at("duplicate zip '" + row.zip + "'"));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CensusTable load_census(const std::string& path) {
  return census_from_csv(read_file(path), path);
}

std::string census_to_csv(const CensusTable& table) {
  std::ostringstream out;
  out << "zip,population";
  for (const auto& a : table.attributes) out << ',' << a;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.zip << ',' << row.population;
    char buf[32];
    for (const auto& a : table.attributes) {
      std::snprintf(buf, sizeof(buf), "%.6f", row.attribute_shares.at(a));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

void save_census(const CensusTable& table, const std::string& path) {
  write_file(path, census_to_csv(table));
}

}  // namespace cohort_audit
