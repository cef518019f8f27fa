#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cohort_audit/autocohort.hpp"
#include "cohort_audit/cohorts.hpp"
#include "cohort_audit/corpus.hpp"
#include "cohort_audit/geocohort.hpp"

namespace cohort_audit {

// On-disk cohort definition produced by `discover` and consumed by `audit`
// and `mitigate`: either a ZIP split for one census attribute or a cluster
// model plus its bottom-cluster selection.
struct CohortMapFile {
  CohortSource source = CohortSource::Geo;
  std::optional<GeoCohortMap> geo;
  std::optional<ClusterModel> model;
  std::vector<std::size_t> bottom_clusters;  // auto only, ascending

  // Compact definition echo for reports and config hashing.
  nlohmann::ordered_json definition() const;
};

nlohmann::ordered_json cohort_map_to_json(const CohortMapFile& map);
CohortMapFile cohort_map_from_json(const nlohmann::json& j);
void save_cohort_map(const CohortMapFile& map, const std::string& path);
CohortMapFile load_cohort_map(const std::string& path);

// Per-utterance labels for the corpus under this map. Geo maps leave unknown
// ZIPs unassigned; for auto maps the policy decides between failing on and
// excluding uncovered speakers.
CohortAssignments assign_from_map(const Corpus& corpus, const CohortMapFile& map,
                                  MissingSpeakerPolicy policy = MissingSpeakerPolicy::Error);

}  // namespace cohort_audit
