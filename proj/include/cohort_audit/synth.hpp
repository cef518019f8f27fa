#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cohort_audit/corpus.hpp"

namespace cohort_audit {

// Error and confidence behaviour of one cluster class (top or bottom).
struct ClassProfile {
  double confidence_mean = 0.86;
  double confidence_std = 0.05;
  double p_substitution = 0.05;  // per reference token
  double p_deletion = 0.02;
  double p_insertion = 0.02;
  double annotator_error_rate = 0.03;  // per token, per blind pass
};

struct SynthConfig {
  std::size_t n_speakers = 1000;
  std::size_t min_utterances_per_speaker = 2;
  std::size_t max_utterances_per_speaker = 8;
  std::size_t embedding_dim = 64;
  std::size_t n_clusters = 50;
  std::size_t n_bottom_clusters = 5;
  // Centroid spacing divided by the within-cluster per-coordinate std (1.0).
  double cluster_separation = 12.0;
  ClassProfile top_profile{0.86, 0.05, 0.05, 0.02, 0.02, 0.03};
  ClassProfile bottom_profile{0.75, 0.05, 0.0825, 0.033, 0.033, 0.06};
  // Fraction of bottom-ZIP speakers whose voices actually come from bottom
  // acoustic clusters.
  double geo_acoustic_correlation = 0.4;
  double bottom_zip_speaker_fraction = 0.10;
  std::size_t n_zips = 200;
  std::string census_attribute = "attr_planted";
  std::size_t vocabulary_size = 100;
  std::size_t min_utterance_tokens = 2;
  std::size_t max_utterance_tokens = 9;
  double wakeword_only_fraction = 0.02;
  Date date_from{2021, 1, 1};
  Date date_to{2021, 5, 31};
  std::uint64_t seed = 0;
};

struct PlantedGroundTruth {
  std::size_t n_clusters = 0;
  std::vector<std::size_t> bottom_clusters;                    // ascending
  std::unordered_map<std::string, std::size_t> cluster_of_speaker;
  std::map<std::string, bool> zip_is_bottom;
  std::map<std::string, std::string> reference_of_utterance;

  bool cluster_is_bottom(std::size_t cluster) const;
};

nlohmann::ordered_json ground_truth_to_json(const PlantedGroundTruth& truth);
PlantedGroundTruth ground_truth_from_json(const nlohmann::json& j);

struct SynthOutput {
  Corpus corpus;
  CensusTable census;
  PlantedGroundTruth truth;
};

// Deterministic under the config seed; speakers draw from seeds derived per
// speaker id, so output does not depend on generation order or worker count.
SynthOutput generate_population(const SynthConfig& config);

std::vector<std::string> synth_vocabulary(std::size_t size);

// Three independent per-token corruptions of the reference: each token is
// replaced, with the given probability, by a different token drawn uniformly
// from the vocabulary.
std::array<std::string, 3> simulate_blind_passes(const std::vector<std::string>& reference_tokens,
                                                 double annotator_error_rate,
                                                 const std::vector<std::string>& vocabulary,
                                                 std::uint64_t seed);

// Toy power-law responder mapping a cohort's training-data share to WER:
// wer(s) = wer_min + (wer0 - wer_min) * (share0 / s)^alpha. A demonstration
// device for sampling plans, not an ASR model.
double simulate_learning_curve(double wer0, double share0, double share, double wer_min,
                               double alpha);

}  // namespace cohort_audit
