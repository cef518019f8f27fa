#include "cohort_audit/wer.hpp"

#include <algorithm>

#include "cohort_audit/error.hpp"

namespace cohort_audit {

AlignmentResult align(const TokenSeq& reference, const TokenSeq& hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();

  // cost[i][j]: minimum edits aligning reference[0..i) to hypothesis[0..j).
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = cost[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      std::size_t del = cost[i - 1][j] + 1;
      std::size_t ins = cost[i][j - 1] + 1;
      cost[i][j] = std::min({sub, del, ins});
    }
  }

  AlignmentResult result;
  result.reference_length = n;

  // Backtrace, preferring substitution over deletion over insertion.
  std::size_t i = n;
  std::size_t j = m;
  std::vector<std::pair<std::optional<std::string>, std::optional<std::string>>> rev;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1)) {
      if (reference[i - 1] != hypothesis[j - 1]) ++result.substitutions;
      rev.emplace_back(reference[i - 1], hypothesis[j - 1]);
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++result.deletions;
      rev.emplace_back(reference[i - 1], std::nullopt);
      --i;
    } else {
      ++result.insertions;
      rev.emplace_back(std::nullopt, hypothesis[j - 1]);
      --j;
    }
  }
  result.aligned_pairs.assign(rev.rbegin(), rev.rend());
  return result;
}

void WerAccumulator::add(const TokenSeq& reference, const TokenSeq& hypothesis) {
  AlignmentResult a = align(reference, hypothesis);
  add_counts(a.errors(), a.reference_length);
}

void WerAccumulator::add_counts(std::size_t errors, std::size_t reference_words) {
  errors_ += errors;
  words_ += reference_words;
  ++utterances_;
}

WerSummary WerAccumulator::summary() const {
  if (words_ == 0) throw ValidationError("corpus_wer: zero total reference words");
  WerSummary s;
  s.total_errors = errors_;
  s.total_reference_words = words_;
  s.wer = static_cast<double>(errors_) / static_cast<double>(words_);
  return s;
}

WerSummary corpus_wer(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs) {
  WerAccumulator acc;
  for (const auto& [ref, hyp] : pairs) acc.add(ref, hyp);
  return acc.summary();
}

double wer_gap(double wer_bottom, double wer_top) {
  if (!(wer_top > 0.0)) throw ValidationError("wer_gap: wer_top must be positive");
  return (wer_bottom - wer_top) / wer_top;
}

double werr(double wer_baseline, double wer_candidate) {
  if (!(wer_baseline > 0.0)) throw ValidationError("werr: baseline WER must be positive");
  return (wer_baseline - wer_candidate) / wer_baseline;
}

double relative_gap_reduction(double gap_baseline, double gap_candidate) {
  if (!(gap_baseline > 0.0))
    throw ValidationError("relative_gap_reduction: baseline gap must be positive");
  return (gap_baseline - gap_candidate) / gap_baseline;
}

double confidence_disparity(double cohort_conf_mean, double overall_conf_mean) {
  if (!(overall_conf_mean > 0.0))
    throw ValidationError("confidence_disparity: overall mean must be positive");
  return (cohort_conf_mean - overall_conf_mean) / overall_conf_mean;
}

}  // namespace cohort_audit
