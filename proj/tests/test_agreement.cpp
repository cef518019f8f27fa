#include "cohort_audit/agreement.hpp"

#include <algorithm>

#include "doctest.h"

#include "cohort_audit/corpus.hpp"
#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"
#include "oracles.hpp"

using namespace cohort_audit;

TEST_CASE("categorize_agreement basic categories") {
  CHECK(categorize_agreement({"play jazz", "Play jazz.", "play jazz"}) ==
        AgreementCategory::AllAgree);
  CHECK(categorize_agreement({"play jazz", "play jas", "play jazz"}) ==
        AgreementCategory::TwoAgree);
  CHECK(categorize_agreement({"a", "b", "c"}) == AgreementCategory::AllDisagree);
  CHECK_THROWS_AS(categorize_agreement({"a", "b"}), ValidationError);
  CHECK_THROWS_AS(categorize_agreement({"a", "b", "c", "d"}), ValidationError);
}

TEST_CASE("categorize_agreement is permutation invariant" *
          doctest::description("property, 100 seeds")) {
  static const std::vector<std::string> pool = {"play jazz", "Play  Jazz!", "play jas",
                                                "stop", "stop now"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<std::string> passes = {pool[rng.below(pool.size())], pool[rng.below(pool.size())],
                                       pool[rng.below(pool.size())]};
    AgreementCategory base = categorize_agreement(passes);
    std::sort(passes.begin(), passes.end());
    do {
      CHECK(categorize_agreement(passes) == base);
    } while (std::next_permutation(passes.begin(), passes.end()));
  }
}

TEST_CASE("adjudicate returns the majority transcript verbatim") {
  CHECK(adjudicate({"play jazz", "play jazz", "play jazz"}, std::nullopt) == "play jazz");
  // 2-1: the first of the agreeing passes, verbatim, even with raw differences.
  CHECK(adjudicate({"Play Jazz.", "play something", "play jazz"}, std::nullopt) == "Play Jazz.");
  CHECK(adjudicate({"x", "play jazz", "Play Jazz"}, std::nullopt) == "play jazz");
  CHECK(adjudicate({"a", "b", "c"}, std::string("play jazz please")) == "play jazz please");
  CHECK_THROWS_AS(adjudicate({"a", "b", "c"}, std::nullopt), ValidationError);
}

TEST_CASE("adjudicate output normalizes equal to an input pass or the choice" *
          doctest::description("property, 100 seeds")) {
  static const std::vector<std::string> pool = {"play jazz", "Play  Jazz!", "play jas", "stop"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<std::string> passes = {pool[rng.below(pool.size())], pool[rng.below(pool.size())],
                                       pool[rng.below(pool.size())]};
    std::string choice = "adjudicated choice";
    std::string result = adjudicate(passes, choice);
    auto norm = normalize_text(result);
    bool matches = normalize_text(choice) == norm;
    for (const auto& p : passes) matches = matches || normalize_text(p) == norm;
    CHECK(matches);
  }
}

TEST_CASE("pdr reproduces the published values under the minority scheme") {
  // Geodemographic cohorts.
  AgreementStats top{0.169, 0.322, 0.510, 1000};
  AgreementStats bottom{0.262, 0.334, 0.405, 1000};
  CHECK(pdr(top, PdrWeightScheme::Minority) == doctest::Approx(0.276).epsilon(0.002));
  CHECK(pdr(bottom, PdrWeightScheme::Minority) == doctest::Approx(0.373).epsilon(0.002));
  // Automatically discovered cohorts.
  AgreementStats top_auto{0.118, 0.246, 0.636, 1000};
  AgreementStats bottom_auto{0.167, 0.300, 0.535, 1000};
  CHECK(pdr(top_auto, PdrWeightScheme::Minority) == doctest::Approx(0.200).epsilon(0.002));
  CHECK(pdr(bottom_auto, PdrWeightScheme::Minority) == doctest::Approx(0.267).epsilon(0.002));
}

TEST_CASE("pdr under the pairwise scheme evaluates the printed formula") {
  AgreementStats top{0.169, 0.322, 0.510, 1000};
  CHECK(pdr(top, PdrWeightScheme::Pairwise) ==
        doctest::Approx(0.169 + 2.0 / 3.0 * 0.322).epsilon(1e-12));  // 38.4%
}

TEST_CASE("pdr of full agreement is zero under both schemes") {
  AgreementStats s{0.0, 0.0, 1.0, 10};
  CHECK(pdr(s, PdrWeightScheme::Minority) == 0.0);
  CHECK(pdr(s, PdrWeightScheme::Pairwise) == 0.0);
}

TEST_CASE("pdr minority <= pairwise, equal iff no 2-1" *
          doctest::description("property, 100 seeds")) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    double r111 = rng.uniform();
    double r21 = rng.uniform() * (1.0 - r111);
    AgreementStats s{r111, r21, 1.0 - r111 - r21, 100};
    double minority = pdr(s, PdrWeightScheme::Minority);
    double pairwise = pdr(s, PdrWeightScheme::Pairwise);
    CHECK(minority <= pairwise + 1e-15);
    if (r21 == 0.0)
      CHECK(minority == pairwise);
    else
      CHECK(minority < pairwise);
  }
}

TEST_CASE("relative_pdr_increase reproduces published increases") {
  CHECK(relative_pdr_increase(0.276, 0.373) == doctest::Approx(0.351).epsilon(0.005));
  CHECK(relative_pdr_increase(0.200, 0.267) == doctest::Approx(0.335).epsilon(0.005));
  CHECK(relative_pdr_increase(0.3, 0.3) == 0.0);
  CHECK_THROWS_AS(relative_pdr_increase(0.0, 0.1), ValidationError);
}

TEST_CASE("1-1-1 relative increase on the published rates is 55%") {
  CHECK(0.262 / 0.169 - 1.0 == doctest::Approx(0.550).epsilon(0.002));
}

TEST_CASE("agreement_stats counts categories") {
  using test_oracle::make_record;
  std::vector<UtteranceRecord> records;
  // 2 x 1-1-1, 3 x 2-1, 5 x 3-0.
  for (int i = 0; i < 10; ++i) {
    auto rec = make_record("u" + std::to_string(i), "s1", {1.0}, 0.9);
    if (i < 2)
      rec.blind_passes = {"a" + std::to_string(i), "b", "c"};
    else if (i < 5)
      rec.blind_passes = {"same thing", "same thing", "different"};
    else
      rec.blind_passes = {"same", "same", "same"};
    records.push_back(std::move(rec));
  }
  std::vector<const UtteranceRecord*> partition;
  for (const auto& r : records) partition.push_back(&r);
  AgreementStats s = agreement_stats(partition);
  CHECK(s.n_utterances == 10);
  CHECK(s.rate_111 == doctest::Approx(0.2));
  CHECK(s.rate_21 == doctest::Approx(0.3));
  CHECK(s.rate_30 == doctest::Approx(0.5));
  CHECK(s.rate_111 + s.rate_21 + s.rate_30 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("agreement_stats rejects utterances without 3 passes") {
  using test_oracle::make_record;
  auto all_agree = make_record("u1", "s1", {1.0}, 0.9);
  all_agree.blind_passes = {"x", "x", "x"};
  auto no_passes = make_record("u2", "s1", {1.0}, 0.9);
  std::vector<const UtteranceRecord*> partition = {&all_agree, &no_passes};
  CHECK_THROWS_AS(agreement_stats(partition), ValidationError);

  std::vector<const UtteranceRecord*> good = {&all_agree};
  AgreementStats s = agreement_stats(good);
  CHECK(s.rate_30 == 1.0);
  CHECK(s.rate_111 == 0.0);
}
