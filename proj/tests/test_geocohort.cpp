#include "cohort_audit/geocohort.hpp"

#include "doctest.h"

#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"
#include "oracles.hpp"

using namespace cohort_audit;
using test_oracle::make_record;

namespace {

CensusTable small_census() {
  return census_from_csv(
      "zip,population,attr_a,attr_b\n"
      "10001,5000,0.76,0.10\n"
      "10002,3000,0.749,0.20\n"
      "10003,8000,0.90,0.95\n"
      "10004,1000,0.10,0.30\n");
}

Corpus corpus_with_zips() {
  Corpus c;
  c.embedding_dim = 1;
  c.records = {
      make_record("u1", "s1", {1.0}, 0.60, "x", std::nullopt, std::string("10001")),
      make_record("u2", "s2", {1.0}, 0.90, "x", std::nullopt, std::string("10002")),
      make_record("u3", "s3", {1.0}, 0.55, "x", std::nullopt, std::string("10003")),
      make_record("u4", "s4", {1.0}, 0.95, "x", std::nullopt, std::string("99999")),
      make_record("u5", "s5", {1.0}, 0.85),  // no zip
  };
  return c;
}

}  // namespace

TEST_CASE("build_geo_cohorts applies the inclusive majority threshold") {
  GeoCohortMap map = build_geo_cohorts(small_census(), "attr_a", 0.75);
  CHECK(map.bottom_zips == std::set<std::string>{"10001", "10003"});  // 0.76 and 0.90
  CHECK(map.top_zips == std::set<std::string>{"10002", "10004"});     // 0.749 is top
}

TEST_CASE("build_geo_cohorts validates inputs") {
  CHECK_THROWS_AS(build_geo_cohorts(small_census(), "attr_a", 0.4), ValidationError);
  CHECK_THROWS_AS(build_geo_cohorts(small_census(), "attr_a", 0.5), ValidationError);
  CHECK_NOTHROW(build_geo_cohorts(small_census(), "attr_a", 1.0));
  CHECK_THROWS_AS(build_geo_cohorts(small_census(), "nope", 0.75), ValidationError);
  CHECK_THROWS_AS(build_geo_cohorts(CensusTable{}, "attr_a", 0.75), ValidationError);
}

TEST_CASE("assign_utterances_geo labels by ZIP membership") {
  GeoCohortMap map = build_geo_cohorts(small_census(), "attr_a", 0.75);
  Corpus c = corpus_with_zips();
  CohortAssignments a = assign_utterances_geo(c, map);
  REQUIRE(a.labels.size() == 5);
  CHECK(a.labels[0] == Cohort::Bottom);   // 10001
  CHECK(a.labels[1] == Cohort::Top);      // 10002
  CHECK(a.labels[2] == Cohort::Bottom);   // 10003
  CHECK(a.labels[3] == std::nullopt);     // zip not in census
  CHECK(a.labels[4] == std::nullopt);     // missing zip
  CHECK(a.source == CohortSource::Geo);
  CHECK(a.count(Cohort::Bottom) == 2);
  CHECK(a.count(Cohort::Top) == 1);
  CHECK(a.unassigned() == 2);
}

TEST_CASE("raising the threshold never adds a bottom zip" *
          doctest::description("property, 100 seeds")) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::string csv = "zip,population,attr\n";
    std::size_t n = 2 + rng.below(20);
    for (std::size_t z = 0; z < n; ++z) {
      char row[64];
      std::snprintf(row, sizeof(row), "%05zu,%d,%.3f\n", 10000 + z,
                    static_cast<int>(rng.below(100000)), rng.uniform());
      csv += row;
    }
    CensusTable census = census_from_csv(csv);
    double t1 = rng.uniform(0.51, 0.99);
    double t2 = rng.uniform(t1, 1.0);
    GeoCohortMap low = build_geo_cohorts(census, "attr", t1);
    GeoCohortMap high = build_geo_cohorts(census, "attr", t2);
    for (const auto& zip : high.bottom_zips) CHECK(low.bottom_zips.count(zip) == 1);
    // Top and bottom partition the census zips.
    CHECK(low.bottom_zips.size() + low.top_zips.size() == census.rows.size());
  }
}

TEST_CASE("assigned utterances split exactly into disjoint top and bottom") {
  GeoCohortMap map = build_geo_cohorts(small_census(), "attr_b", 0.75);
  Corpus c = corpus_with_zips();
  CohortAssignments a = assign_utterances_geo(c, map);
  std::size_t assigned = a.count(Cohort::Top) + a.count(Cohort::Bottom);
  CHECK(assigned + a.unassigned() == c.size());
}

TEST_CASE("rank_attributes_by_confidence_gap finds the planted attribute") {
  // attr_a's bottom zips (10001, 10003) hold the low-confidence utterances;
  // attr_b's bottom zip (10003) holds only one of them.
  Corpus c = corpus_with_zips();
  AttributeGapRanking ranking = rank_attributes_by_confidence_gap(c, small_census(), 0.75);
  REQUIRE(ranking.entries.size() == 2);
  CHECK(ranking.entries[0].attribute == "attr_a");
  REQUIRE(ranking.entries[0].confidence_disparity.has_value());
  REQUIRE(ranking.entries[1].confidence_disparity.has_value());
  CHECK(*ranking.entries[0].confidence_disparity < *ranking.entries[1].confidence_disparity);

  // Direct per-attribute recomputation.
  double overall = c.mean_confidence();
  double attr_a_bottom_mean = (0.60 + 0.55) / 2.0;
  CHECK(*ranking.entries[0].confidence_disparity ==
        doctest::Approx((attr_a_bottom_mean - overall) / overall));
  CHECK(ranking.entries[0].bottom_utterances == 2);
  CHECK(ranking.entries[0].bottom_zip_count == 2);
}

TEST_CASE("rank_attributes handles single and empty-bottom attributes") {
  CensusTable census = census_from_csv(
      "zip,population,only\n"
      "10001,5000,0.80\n");
  Corpus c;
  c.embedding_dim = 1;
  c.records = {make_record("u1", "s1", {1.0}, 0.5, "x", std::nullopt, std::string("10001"))};
  AttributeGapRanking one = rank_attributes_by_confidence_gap(c, census, 0.75);
  CHECK(one.entries.size() == 1);

  // No zip reaches threshold 1.0: disparity undefined, ranked last.
  CensusTable census2 = census_from_csv(
      "zip,population,planted,sparse\n"
      "10001,5000,0.80,0.60\n"
      "10002,5000,0.10,0.50\n");
  Corpus c2;
  c2.embedding_dim = 1;
  c2.records = {
      make_record("u1", "s1", {1.0}, 0.40, "x", std::nullopt, std::string("10001")),
      make_record("u2", "s2", {1.0}, 0.90, "x", std::nullopt, std::string("10002")),
  };
  AttributeGapRanking r = rank_attributes_by_confidence_gap(c2, census2, 0.75);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].attribute == "planted");
  CHECK(r.entries[1].attribute == "sparse");
  CHECK(!r.entries[1].confidence_disparity.has_value());
  CHECK(r.entries[1].bottom_zip_count == 0);

  CHECK_THROWS_AS(rank_attributes_by_confidence_gap(c2, CensusTable{}, 0.75), ValidationError);
}

TEST_CASE("threshold 1.0 with no full-share zip yields an empty bottom") {
  CensusTable census = census_from_csv(
      "zip,population,attr\n"
      "10001,5000,0.99\n"
      "10002,5000,0.80\n");
  GeoCohortMap map = build_geo_cohorts(census, "attr", 1.0);
  CHECK(map.bottom_zips.empty());
  CHECK(map.top_zips.size() == 2);
}
