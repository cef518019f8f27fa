#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cohort_audit {

struct UtteranceRecord;

// Blind-pass agreement outcome: 1-1-1 all three transcribers disagree,
// 2-1 exactly two agree, 3-0 all three agree.
enum class AgreementCategory { AllDisagree, TwoAgree, AllAgree };

const char* to_string(AgreementCategory c);  // "1-1-1" | "2-1" | "3-0"

// Passes are compared as normalized token sequences.
AgreementCategory categorize_agreement(const std::vector<std::string>& passes);

// Majority transcript when two or more passes agree (the first agreeing pass,
// verbatim); otherwise the adjudicator's choice. Throws ValidationError for a
// 1-1-1 with no choice supplied.
std::string adjudicate(const std::vector<std::string>& passes,
                       const std::optional<std::string>& adjudicator_choice);

struct AgreementStats {
  double rate_111 = 0.0;
  double rate_21 = 0.0;
  double rate_30 = 0.0;
  std::size_t n_utterances = 0;
};

// Weights applied to the 1-1-1 and 2-1 rates when scoring disagreement.
// Pairwise (1, 2/3) equals the probability that two randomly chosen
// transcribers disagree; Minority (1, 1/3) weights a 2-1 by the one
// dissenting transcriber out of three.
enum class PdrWeightScheme { Pairwise, Minority };

double pdr(const AgreementStats& stats, PdrWeightScheme scheme);

// How much likelier transcribers are to disagree on the bottom cohort.
double relative_pdr_increase(double pdr_top, double pdr_bottom);

// Category rates over a partition; every utterance must carry 3 blind passes.
AgreementStats agreement_stats(const std::vector<const UtteranceRecord*>& partition);

}  // namespace cohort_audit
