#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cohort_audit {

using TokenSeq = std::vector<std::string>;

// Minimum-edit-distance alignment of a hypothesis against a reference.
// aligned_pairs lists (ref token or gap, hyp token or gap) in order; dropping
// the gaps recovers the inputs.
struct AlignmentResult {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_length = 0;
  std::vector<std::pair<std::optional<std::string>, std::optional<std::string>>> aligned_pairs;

  std::size_t errors() const { return substitutions + insertions + deletions; }
};

// Levenshtein alignment with unit costs. Backtrace prefers substitution over
// deletion over insertion, so aligned_pairs are deterministic; the error
// counts themselves are tie-break invariant.
AlignmentResult align(const TokenSeq& reference, const TokenSeq& hypothesis);

// Corpus WER pooled over utterances: sum of errors / sum of reference words.
struct WerSummary {
  std::size_t total_errors = 0;
  std::size_t total_reference_words = 0;
  double wer = 0.0;
};

class WerAccumulator {
 public:
  void add(const TokenSeq& reference, const TokenSeq& hypothesis);
  void add_counts(std::size_t errors, std::size_t reference_words);
  WerSummary summary() const;  // throws ValidationError if no reference words
  std::size_t utterances() const { return utterances_; }

 private:
  std::size_t errors_ = 0;
  std::size_t words_ = 0;
  std::size_t utterances_ = 0;
};

WerSummary corpus_wer(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs);

// Relative degradation of the bottom cohort's WER versus the top cohort's.
double wer_gap(double wer_bottom, double wer_top);

// Relative WER reduction of a candidate model versus a baseline on one cohort.
double werr(double wer_baseline, double wer_candidate);

// Relative shrinkage of the WER gap from baseline to candidate.
double relative_gap_reduction(double gap_baseline, double gap_candidate);

// Cohort mean confidence relative to the overall mean; negative means the
// cohort scores below average.
double confidence_disparity(double cohort_conf_mean, double overall_conf_mean);

struct CohortSize {
  std::size_t utterances = 0;
  std::size_t speakers = 0;
  double hours = 0.0;
};

// Machine-performance disparity block of the audit report.
struct DisparityReport {
  std::optional<double> wer_top;
  std::optional<double> wer_bottom;
  std::optional<double> wer_gap;  // (bottom - top) / top
  double conf_overall = 0.0;
  double conf_top_mean = 0.0;
  double conf_bottom_mean = 0.0;
  double conf_top_relative = 0.0;
  double conf_bottom_relative = 0.0;
  CohortSize top;
  CohortSize bottom;
  std::size_t unassigned_utterances = 0;
};

}  // namespace cohort_audit
