#include "cohort_audit/corpus.hpp"

#include <algorithm>

#include "doctest.h"

#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"
#include "oracles.hpp"

using namespace cohort_audit;
using test_oracle::make_record;

namespace {

std::string jsonl_line(const UtteranceRecord& rec) { return record_to_json(rec).dump() + "\n"; }

Corpus corpus_of(std::vector<UtteranceRecord> records, std::size_t dim) {
  Corpus c;
  c.embedding_dim = dim;
  c.records = std::move(records);
  return c;
}

}  // namespace

TEST_CASE("load_corpus keeps records in file order") {
  std::string text = jsonl_line(make_record("u1", "s1", {1.0, 2.0}, 0.9)) +
                     jsonl_line(make_record("u0", "s2", {0.0, 1.0}, 0.5)) +
                     jsonl_line(make_record("u2", "s1", {3.0, 4.0}, 0.7));
  Corpus c = corpus_from_jsonl(text, 2);
  REQUIRE(c.size() == 3);
  CHECK(c.records[0].utterance_id == "u1");
  CHECK(c.records[1].utterance_id == "u0");
  CHECK(c.records[2].utterance_id == "u2");
  CHECK(c.embedding_dim == 2);
}

TEST_CASE("load_corpus rejects out-of-range confidence with line and field") {
  auto bad = make_record("u1", "s1", {1.0}, 0.9);
  std::string line = record_to_json(bad).dump();
  auto pos = line.find("0.9");
  line.replace(pos, 3, "1.2");
  try {
    corpus_from_jsonl(jsonl_line(make_record("u0", "s1", {1.0}, 0.5)) + line + "\n", 1, "test.jsonl");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("test.jsonl:2") != std::string::npos);
    CHECK(msg.find("confidence") != std::string::npos);
  }
}

TEST_CASE("load_corpus rejects 2 blind passes") {
  auto rec = make_record("u1", "s1", {1.0}, 0.9);
  rec.blind_passes = {"a", "b"};
  try {
    corpus_from_jsonl(jsonl_line(rec), 1);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("blind_passes must have 0 or 3 entries") !=
          std::string::npos);
  }
}

TEST_CASE("load_corpus rejects malformed JSON, duplicates, and dim mismatch") {
  CHECK_THROWS_AS(corpus_from_jsonl("{not json\n", 1), ValidationError);
  std::string dup = jsonl_line(make_record("u1", "s1", {1.0}, 0.9)) +
                    jsonl_line(make_record("u1", "s2", {2.0}, 0.8));
  CHECK_THROWS_AS(corpus_from_jsonl(dup, 1), ValidationError);
  CHECK_THROWS_AS(corpus_from_jsonl(jsonl_line(make_record("u1", "s1", {1.0, 2.0}, 0.9)), 3),
                  ValidationError);
  CHECK_THROWS_AS(corpus_from_jsonl("", 0), ValidationError);  // dim must be positive
}

TEST_CASE("load_corpus requires mandatory keys") {
  auto j = record_to_json(make_record("u1", "s1", {1.0}, 0.9));
  j.erase("hypothesis");
  CHECK_THROWS_WITH_AS(corpus_from_jsonl(j.dump() + "\n", 1),
                       doctest::Contains("hypothesis"), ValidationError);
}

TEST_CASE("date parsing") {
  Date d = Date::parse("2021-02-28");
  CHECK(d == Date{2021, 2, 28});
  CHECK(d.to_string() == "2021-02-28");
  CHECK_NOTHROW(Date::parse("2020-02-29"));  // leap year
  CHECK_THROWS_AS(Date::parse("2021-02-29"), ValidationError);
  CHECK_THROWS_AS(Date::parse("2021-13-01"), ValidationError);
  CHECK_THROWS_AS(Date::parse("2021/01/01"), ValidationError);
  CHECK_THROWS_AS(Date::parse("21-01-01"), ValidationError);
  CHECK(Date{2021, 1, 31} < Date{2021, 2, 1});
}

TEST_CASE("apply_filters removes floor(fraction * N) lowest-confidence utterances") {
  // 1000 utterances, trim 0.039 -> 961 remain.
  std::vector<UtteranceRecord> records;
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "u%04d", i);
    records.push_back(make_record(id, "s1", {rng.uniform()}, rng.uniform()));
  }
  Corpus c = corpus_of(std::move(records), 1);
  CorpusFilterConfig config;
  config.confidence_trim_fraction = 0.039;
  Corpus filtered = apply_filters(c, config);
  CHECK(filtered.size() == 961);
}

TEST_CASE("apply_filters with all-default-off config is identity") {
  Corpus c = corpus_of({make_record("u1", "s1", {1.0}, 0.9),
                        make_record("u2", "s1", {2.0}, 0.8)},
                       1);
  CorpusFilterConfig config;
  config.confidence_trim_fraction = 0.0;
  config.drop_wakeword_only = false;
  Corpus filtered = apply_filters(c, config);
  CHECK(filtered.records == c.records);
}

TEST_CASE("apply_filters trim 0.25 on 10 distinct confidences removes the 2 lowest") {
  // Independent oracle: sort confidences, count how many fall below the cut.
  std::vector<UtteranceRecord> records;
  std::vector<double> confidences;
  for (int i = 0; i < 10; ++i) {
    double conf = 0.1 * (i + 1);
    confidences.push_back(conf);
    char id[8];
    std::snprintf(id, sizeof(id), "u%d", 9 - i);  // ids deliberately unordered
    records.push_back(make_record(id, "s1", {1.0}, conf));
  }
  std::sort(confidences.begin(), confidences.end());
  std::size_t expect_removed = static_cast<std::size_t>(0.25 * 10);  // floor(2.5) = 2
  double cut = confidences[expect_removed];

  CorpusFilterConfig config;
  config.confidence_trim_fraction = 0.25;
  Corpus filtered = apply_filters(corpus_of(std::move(records), 1), config);
  CHECK(filtered.size() == 10 - expect_removed);
  for (const auto& rec : filtered.records) CHECK(rec.confidence >= cut);
}

TEST_CASE("apply_filters breaks confidence ties by utterance_id") {
  Corpus c = corpus_of({make_record("b", "s1", {1.0}, 0.5), make_record("a", "s1", {1.0}, 0.5),
                        make_record("c", "s1", {1.0}, 0.9)},
                       1);
  CorpusFilterConfig config;
  config.confidence_trim_fraction = 1.0 / 3.0;
  Corpus filtered = apply_filters(c, config);
  REQUIRE(filtered.size() == 2);
  CHECK(filtered.records[0].utterance_id == "b");
  CHECK(filtered.records[1].utterance_id == "c");
}

TEST_CASE("apply_filters drops wakeword-only and out-of-range dates") {
  auto wake = make_record("u1", "s1", {1.0}, 0.9);
  wake.is_wakeword_only = true;
  auto early = make_record("u2", "s1", {1.0}, 0.8);
  early.timestamp = Date{2020, 12, 31};
  auto kept = make_record("u3", "s1", {1.0}, 0.7);
  Corpus c = corpus_of({wake, early, kept}, 1);
  CorpusFilterConfig config;
  config.confidence_trim_fraction = 0.0;
  config.date_range = {{Date{2021, 1, 1}, Date{2021, 5, 31}}};
  Corpus filtered = apply_filters(c, config);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered.records[0].utterance_id == "u3");
}

TEST_CASE("apply_filters errors on empty corpus, warns (returns) when all removed") {
  Corpus empty;
  empty.embedding_dim = 1;
  CHECK_THROWS_AS(apply_filters(empty, CorpusFilterConfig{}), ValidationError);

  auto wake = make_record("u1", "s1", {1.0}, 0.9);
  wake.is_wakeword_only = true;
  Corpus all_wake = corpus_of({wake}, 1);
  CorpusFilterConfig config;
  config.confidence_trim_fraction = 0.0;
  Corpus filtered = apply_filters(all_wake, config);
  CHECK(filtered.empty());  // warning-level, not fatal
}

TEST_CASE("apply_filters is idempotent" * doctest::description("property, 100 seeds")) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<UtteranceRecord> records;
    std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "u%03zu", i);
      auto rec = make_record(id, "s1", {rng.uniform()}, rng.uniform());
      rec.is_wakeword_only = rng.bernoulli(0.2);
      rec.timestamp = Date{2021, 1 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(28))};
      records.push_back(std::move(rec));
    }
    CorpusFilterConfig config;
    config.confidence_trim_fraction = rng.uniform(0.0, 0.5);
    config.drop_wakeword_only = rng.bernoulli(0.5);
    if (rng.bernoulli(0.5)) config.date_range = {{Date{2021, 2, 1}, Date{2021, 4, 30}}};

    Corpus once = apply_filters(corpus_of(std::move(records), 1), config);
    if (once.empty()) continue;  // re-application precondition needs nonempty
    Corpus twice = apply_filters(once, config);
    CHECK(twice.records == once.records);
    CHECK(twice.applied_filters == once.applied_filters);
  }
}

TEST_CASE("apply_filters removes exactly floor(fraction*N) by confidence" *
          doctest::description("property, 100 seeds")) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    std::size_t n = 1 + rng.below(200);
    std::vector<UtteranceRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "u%04zu", i);
      // Distinct confidences by construction.
      records.push_back(make_record(id, "s1", {1.0},
                                    (static_cast<double>(i) + rng.uniform(0.0, 0.5)) /
                                        (static_cast<double>(n) + 1.0)));
    }
    double fraction = rng.uniform(0.0, 0.99);
    CorpusFilterConfig config;
    config.confidence_trim_fraction = fraction;
    config.drop_wakeword_only = false;
    Corpus filtered = apply_filters(corpus_of(std::move(records), 1), config);
    CHECK(filtered.size() == n - static_cast<std::size_t>(fraction * static_cast<double>(n)));
  }
}

TEST_CASE("corpus serialization round-trips") {
  auto r1 = make_record("u1", "s1", {1.5, -2.25}, 0.875, "turn on the lights",
                        std::string("turn on the lights"), std::string("10001"));
  r1.blind_passes = {"turn on the lights", "turn on the light", "turn on the lights"};
  auto r2 = make_record("u2", "s2", {0.0, 1e-7}, 0.039);
  Corpus c = corpus_of({r1, r2}, 2);
  std::string text = corpus_to_jsonl(c);
  Corpus back = corpus_from_jsonl(text, 2);
  CHECK(back.records == c.records);
  // Value-level identity: serialized again, the bytes are identical.
  CHECK(corpus_to_jsonl(back) == text);
}

TEST_CASE("census parsing") {
  std::string csv =
      "zip,population,attr_a,attr_b\n"
      "10001,5000,0.80,0.10\n"
      "10002,1200,0.20,0.90\n";
  CensusTable t = census_from_csv(csv);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.attributes == std::vector<std::string>{"attr_a", "attr_b"});
  CHECK(t.rows[0].attribute_shares.at("attr_a") == doctest::Approx(0.80));
  CHECK(t.find("10002") != nullptr);
  CHECK(t.find("99999") == nullptr);

  CHECK_THROWS_AS(census_from_csv("zip,population,a\n10001,5,0.5\n10001,6,0.6\n"),
                  ValidationError);  // duplicate zip
  CHECK_THROWS_AS(census_from_csv("zip,population,a\n10001,5,1.3\n"), ValidationError);
  CHECK_THROWS_AS(census_from_csv("zip,pop,a\n"), ValidationError);  // bad header
  CHECK_THROWS_AS(census_from_csv("zip,population,a\n123,5,0.5\n"), ValidationError);
}

TEST_CASE("census round-trips through CSV") {
  std::string csv =
      "zip,population,attr_a\n"
      "10001,5000,0.800000\n";
  CensusTable t = census_from_csv(csv);
  CHECK(census_to_csv(t) == csv);
}
