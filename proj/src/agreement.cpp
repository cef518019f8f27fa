#include "cohort_audit/agreement.hpp"

#include <cmath>

#include "cohort_audit/corpus.hpp"
#include "cohort_audit/error.hpp"
#include "cohort_audit/text_norm.hpp"

namespace cohort_audit {

const char* to_string(AgreementCategory c) {
  switch (c) {
    case AgreementCategory::AllDisagree: return "1-1-1";
    case AgreementCategory::TwoAgree: return "2-1";
    case AgreementCategory::AllAgree: return "3-0";
  }
  return "?";
}

namespace {

void check_three(const std::vector<std::string>& passes) {
  if (passes.size() != 3)
    throw ValidationError("expected exactly 3 blind passes, got " +
                          std::to_string(passes.size()));
}

}  // namespace

AgreementCategory categorize_agreement(const std::vector<std::string>& passes) {
  check_three(passes);
  auto a = normalize_text(passes[0]);
  auto b = normalize_text(passes[1]);
  auto c = normalize_text(passes[2]);
  int pairs_equal = (a == b) + (a == c) + (b == c);
  if (pairs_equal == 3) return AgreementCategory::AllAgree;
  if (pairs_equal == 1) return AgreementCategory::TwoAgree;
  return AgreementCategory::AllDisagree;
}

std::string adjudicate(const std::vector<std::string>& passes,
                       const std::optional<std::string>& adjudicator_choice) {
  check_three(passes);
  auto a = normalize_text(passes[0]);
  auto b = normalize_text(passes[1]);
  auto c = normalize_text(passes[2]);
  // First of the agreeing passes, verbatim; raw forms may differ while
  // normalizing equal.
  if (a == b || a == c) return passes[0];
  if (b == c) return passes[1];
  if (!adjudicator_choice)
    throw ValidationError("all three passes disagree and no adjudicator choice was supplied");
  return *adjudicator_choice;
}

double pdr(const AgreementStats& stats, PdrWeightScheme scheme) {
  double w21 = scheme == PdrWeightScheme::Pairwise ? 2.0 / 3.0 : 1.0 / 3.0;
  return stats.rate_111 + w21 * stats.rate_21;
}

double relative_pdr_increase(double pdr_top, double pdr_bottom) {
  if (!(pdr_top > 0.0))
    throw ValidationError("relative_pdr_increase: top PDR must be positive");
  return (pdr_bottom - pdr_top) / pdr_top;
}

AgreementStats agreement_stats(const std::vector<const UtteranceRecord*>& partition) {
  if (partition.empty()) throw ValidationError("agreement_stats: empty partition");
  std::size_t n111 = 0, n21 = 0, n30 = 0;
  for (const UtteranceRecord* rec : partition) {
    if (rec->blind_passes.size() != 3)
      throw ValidationError("utterance '" + rec->utterance_id + "' lacks 3 blind passes");
    switch (categorize_agreement(rec->blind_passes)) {
      case AgreementCategory::AllDisagree: ++n111; break;
      case AgreementCategory::TwoAgree: ++n21; break;
      case AgreementCategory::AllAgree: ++n30; break;
    }
  }
  AgreementStats s;
  s.n_utterances = partition.size();
  const double n = static_cast<double>(s.n_utterances);
  s.rate_111 = static_cast<double>(n111) / n;
  s.rate_21 = static_cast<double>(n21) / n;
  s.rate_30 = static_cast<double>(n30) / n;
  return s;
}

}  // namespace cohort_audit
