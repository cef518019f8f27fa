#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cohort_audit/cohorts.hpp"
#include "cohort_audit/corpus.hpp"

namespace cohort_audit {

// ZIP-level cohort split for one census attribute: ZIPs where the attribute's
// population share meets the majority threshold form the bottom cohort, all
// other census ZIPs the top cohort. ZIPs absent from the census stay outside
// both.
struct GeoCohortMap {
  std::string attribute;
  double threshold = 0.75;
  std::set<std::string> bottom_zips;
  std::set<std::string> top_zips;
};

// threshold must be in (0.5, 1] so membership is a majority.
GeoCohortMap build_geo_cohorts(const CensusTable& census, const std::string& attribute,
                               double threshold);

// Utterances with a missing ZIP or a ZIP absent from the census are left
// unassigned.
CohortAssignments assign_utterances_geo(const Corpus& corpus, const GeoCohortMap& map);

struct AttributeGapEntry {
  std::string attribute;
  std::size_t bottom_zip_count = 0;
  std::size_t bottom_utterances = 0;
  std::size_t bottom_speakers = 0;
  double bottom_hours = 0.0;
  // Bottom-cohort mean confidence relative to the corpus mean; absent when no
  // ZIP reaches the threshold or no utterance falls in the bottom cohort.
  std::optional<double> confidence_disparity;
};

// Entries ordered most-negative disparity first; attributes with an undefined
// disparity come last, alphabetically.
struct AttributeGapRanking {
  double threshold = 0.75;
  std::vector<AttributeGapEntry> entries;
};

AttributeGapRanking rank_attributes_by_confidence_gap(const Corpus& corpus,
                                                      const CensusTable& census,
                                                      double threshold);

}  // namespace cohort_audit
