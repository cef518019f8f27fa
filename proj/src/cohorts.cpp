#include "cohort_audit/cohorts.hpp"

namespace cohort_audit {

const char* to_string(Cohort c) { return c == Cohort::Top ? "top" : "bottom"; }

const char* to_string(CohortSource s) { return s == CohortSource::Geo ? "geo" : "auto"; }

std::size_t CohortAssignments::count(Cohort c) const {
  std::size_t n = 0;
  for (const auto& l : labels)
    if (l && *l == c) ++n;
  return n;
}

std::size_t CohortAssignments::unassigned() const {
  std::size_t n = 0;
  for (const auto& l : labels)
    if (!l) ++n;
  return n;
}

}  // namespace cohort_audit
