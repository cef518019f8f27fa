#include "cohort_audit/report.hpp"

#include "doctest.h"

#include "cohort_audit/error.hpp"
#include "cohort_audit/synth.hpp"
#include "oracles.hpp"

using namespace cohort_audit;
using test_oracle::make_record;

namespace {

// Corpus of two geo cohorts with known confidences and WER behaviour.
struct Fixture {
  Corpus corpus;
  CohortMapFile map;
  CohortAssignments assignments;

  explicit Fixture(bool with_passes) {
    corpus.embedding_dim = 1;
    auto add = [&](std::string id, std::string zip, double conf, std::string ref,
                   std::string hyp) {
      auto rec = make_record(id, "spk-" + id, {0.5}, conf, hyp, ref, zip);
      if (with_passes) rec.blind_passes = {ref, ref, ref};
      corpus.records.push_back(std::move(rec));
    };
    add("u1", "10001", 0.90, "turn on the lights", "turn on the lights");
    add("u2", "10001", 0.85, "play jazz", "play jazz");
    add("u3", "20001", 0.60, "call mom now", "call tom now");
    add("u4", "20001", 0.55, "what time is it", "what time is");

    GeoCohortMap geo;
    geo.attribute = "attr";
    geo.threshold = 0.75;
    geo.bottom_zips = {"20001"};
    geo.top_zips = {"10001"};
    map.source = CohortSource::Geo;
    map.geo = geo;
    assignments = assign_from_map(corpus, map);
  }
};

}  // namespace

TEST_CASE("resolve_reference_text prefers adjudicated, then majority") {
  auto rec = make_record("u1", "s1", {1.0}, 0.9, "hyp", std::string("the reference"));
  CHECK(resolve_reference_text(rec) == "the reference");

  rec.adjudicated_reference = std::nullopt;
  rec.blind_passes = {"pass one", "Pass One!", "other"};
  CHECK(resolve_reference_text(rec) == "pass one");

  rec.blind_passes = {"a", "b", "c"};
  CHECK(resolve_reference_text(rec) == std::nullopt);

  rec.blind_passes.clear();
  CHECK(resolve_reference_text(rec) == std::nullopt);
}

TEST_CASE("audit report computes cohort sizes, confidence, WER, and agreement") {
  Fixture f(true);
  auto report = build_audit_report(f.corpus, f.map, f.assignments);

  CHECK(report["corpus"]["utterances"] == 4);
  CHECK(report["cohorts"]["sizes"]["top"]["utterances"] == 2);
  CHECK(report["cohorts"]["sizes"]["bottom"]["utterances"] == 2);
  CHECK(report["cohorts"]["sizes"]["unassigned_utterances"] == 0);

  double overall = (0.90 + 0.85 + 0.60 + 0.55) / 4.0;
  CHECK(report["confidence"]["overall_mean"].get<double>() == doctest::Approx(overall));
  CHECK(report["confidence"]["bottom_relative"].get<double>() ==
        doctest::Approx((0.575 - overall) / overall));

  REQUIRE(report["wer"]["available"].get<bool>());
  CHECK(report["wer"]["top"]["wer"].get<double>() == 0.0);
  // Bottom: 1 substitution over 3 words + 1 deletion over 4 words = 2/7.
  CHECK(report["wer"]["bottom"]["wer"].get<double>() == doctest::Approx(2.0 / 7.0));
  CHECK(report["wer"]["wer_gap"].is_null());  // top WER is zero

  REQUIRE(report["agreement"]["available"].get<bool>());
  CHECK(report["agreement"]["top"]["rate_30"].get<double>() == 1.0);
  CHECK(report["agreement"]["pdr"]["minority"]["top"].get<double>() == 0.0);
}

TEST_CASE("audit report marks agreement unavailable without blind passes") {
  Fixture f(false);
  auto report = build_audit_report(f.corpus, f.map, f.assignments);
  CHECK_FALSE(report["agreement"]["available"].get<bool>());
  CHECK(report["wer"]["available"].get<bool>());  // WER still present
}

TEST_CASE("audit report is deterministic") {
  Fixture f(true);
  auto a = build_audit_report(f.corpus, f.map, f.assignments);
  auto b = build_audit_report(f.corpus, f.map, f.assignments);
  CHECK(a.dump() == b.dump());
  CHECK(a["config_hash"] == b["config_hash"]);
}

TEST_CASE("csv tables are written for a full report") {
  Fixture f(true);
  auto report = build_audit_report(f.corpus, f.map, f.assignments);
  test_oracle::TempDir dir("csv");
  write_csv_tables(report, dir.file("t_"));
  for (const char* name : {"t_confidence_disparity.csv", "t_wer_gap.csv", "t_agreement.csv"}) {
    std::ifstream in(dir.file(name));
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(!header.empty());
  }
}

TEST_CASE("cohort map files round-trip") {
  Fixture f(true);
  test_oracle::TempDir dir("map");
  save_cohort_map(f.map, dir.file("geo.json"));
  CohortMapFile back = load_cohort_map(dir.file("geo.json"));
  CHECK(back.source == CohortSource::Geo);
  CHECK(back.geo->bottom_zips == f.map.geo->bottom_zips);
  CHECK(back.geo->top_zips == f.map.geo->top_zips);
  CHECK(back.geo->attribute == "attr");

  CohortAssignments again = assign_from_map(f.corpus, back);
  CHECK(again.labels == f.assignments.labels);
}

TEST_CASE("config hash is stable and covers the definition") {
  nlohmann::ordered_json a = {{"k", 50}, {"seed", 7}};
  nlohmann::ordered_json b = {{"k", 50}, {"seed", 8}};
  CHECK(config_hash_hex(a) == config_hash_hex(a));
  CHECK(config_hash_hex(a) != config_hash_hex(b));
  CHECK(config_hash_hex(a).size() == 16);
}
