#include "cohort_audit/geocohort.hpp"

#include <algorithm>
#include <unordered_set>

#include "cohort_audit/error.hpp"
#include "cohort_audit/wer.hpp"

namespace cohort_audit {

GeoCohortMap build_geo_cohorts(const CensusTable& census, const std::string& attribute,
                               double threshold) {
  if (census.rows.empty()) throw ValidationError("build_geo_cohorts: empty census table");
  if (!census.has_attribute(attribute))
    throw ValidationError("unknown census attribute '" + attribute + "'");
  if (!(threshold > 0.5 && threshold <= 1.0))
    throw ValidationError("threshold must be in (0.5, 1] for majority semantics");

  GeoCohortMap map;
  map.attribute = attribute;
  map.threshold = threshold;
  for (const auto& row : census.rows) {
    if (row.attribute_shares.at(attribute) >= threshold)
      map.bottom_zips.insert(row.zip);
    else
      map.top_zips.insert(row.zip);
  }
  return map;
}

CohortAssignments assign_utterances_geo(const Corpus& corpus, const GeoCohortMap& map) {
  CohortAssignments out;
  out.source = CohortSource::Geo;
  out.labels.reserve(corpus.size());
  for (const auto& rec : corpus.records) {
    if (!rec.zip) {
      out.labels.push_back(std::nullopt);
    } else if (map.bottom_zips.count(*rec.zip)) {
      out.labels.push_back(Cohort::Bottom);
    } else if (map.top_zips.count(*rec.zip)) {
      out.labels.push_back(Cohort::Top);
    } else {
      out.labels.push_back(std::nullopt);  // ZIP not covered by the census
    }
  }
  return out;
}

AttributeGapRanking rank_attributes_by_confidence_gap(const Corpus& corpus,
                                                      const CensusTable& census,
                                                      double threshold) {
  if (census.rows.empty())
    throw ValidationError("rank_attributes_by_confidence_gap: empty census table");
  if (census.attributes.empty())
    throw ValidationError("rank_attributes_by_confidence_gap: census has no attributes");
  if (corpus.empty())
    throw ValidationError("rank_attributes_by_confidence_gap: empty corpus");

  const double overall = corpus.mean_confidence();

  AttributeGapRanking ranking;
  ranking.threshold = threshold;
  for (const auto& attribute : census.attributes) {
    GeoCohortMap map = build_geo_cohorts(census, attribute, threshold);
    AttributeGapEntry entry;
    entry.attribute = attribute;
    entry.bottom_zip_count = map.bottom_zips.size();

    double conf_sum = 0.0;
    double seconds = 0.0;
    std::unordered_set<std::string> speakers;
    for (const auto& rec : corpus.records) {
      if (!rec.zip || !map.bottom_zips.count(*rec.zip)) continue;
      ++entry.bottom_utterances;
      conf_sum += rec.confidence;
      seconds += rec.duration_s;
      speakers.insert(rec.speaker_id);
    }
    entry.bottom_speakers = speakers.size();
    entry.bottom_hours = seconds / 3600.0;
    if (entry.bottom_utterances > 0 && overall > 0.0)
      entry.confidence_disparity = confidence_disparity(
          conf_sum / static_cast<double>(entry.bottom_utterances), overall);
    ranking.entries.push_back(std::move(entry));
  }

  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const AttributeGapEntry& a, const AttributeGapEntry& b) {
              if (a.confidence_disparity.has_value() != b.confidence_disparity.has_value())
                return a.confidence_disparity.has_value();  // undefined last
              if (a.confidence_disparity && b.confidence_disparity &&
                  *a.confidence_disparity != *b.confidence_disparity)
                return *a.confidence_disparity < *b.confidence_disparity;
              return a.attribute < b.attribute;
            });
  return ranking;
}

}  // namespace cohort_audit
