#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cohort_audit {

// Canonical token form used by WER and agreement metrics: lowercase (ASCII and
// Latin-1), Unicode punctuation removed, split on whitespace, empty tokens
// dropped. Never fails; empty or all-punctuation input yields an empty vector.
std::vector<std::string> normalize_text(std::string_view raw);

// Convenience: normalized tokens re-joined with single spaces.
std::string normalize_join(std::string_view raw);

}  // namespace cohort_audit
