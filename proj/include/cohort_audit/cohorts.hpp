#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cohort_audit {

struct Corpus;

enum class Cohort { Top, Bottom };
enum class CohortSource { Geo, Auto };

const char* to_string(Cohort c);        // "top" | "bottom"
const char* to_string(CohortSource s);  // "geo" | "auto"

// Per-utterance cohort labels, parallel to corpus record order. nullopt means
// the utterance could not be assigned (missing or unknown ZIP, or a speaker
// outside the cluster model when exclusion was requested); such utterances are
// excluded from cohort metrics but counted in reports.
struct CohortAssignments {
  CohortSource source = CohortSource::Geo;
  std::vector<std::optional<Cohort>> labels;

  std::size_t count(Cohort c) const;
  std::size_t unassigned() const;
};

}  // namespace cohort_audit
