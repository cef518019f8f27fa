#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cohort_audit/cohorts.hpp"
#include "cohort_audit/corpus.hpp"

namespace cohort_audit {

// Per-speaker aggregate of utterance embeddings and confidences.
struct SpeakerProfile {
  std::string speaker_id;
  std::vector<double> mean_embedding;
  double mean_confidence = 0.0;
  std::size_t utterance_count = 0;
};

// Profiles sorted by speaker_id ascending; one per distinct speaker.
std::vector<SpeakerProfile> aggregate_speakers(const Corpus& corpus);

enum class DistanceMetric { Euclidean, Cosine };
enum class SeedingMethod { KMeansPlusPlusGreedy, KMeansPlusPlus, RandomPoints };

struct AutoCohortConfig {
  std::size_t k = 50;
  double bottom_fraction = 0.10;
  std::size_t max_iterations = 100;
  double convergence_tolerance = 1e-6;
  std::uint64_t seed = 0;
  // Independent restarts; the run with the lowest inertia wins. Deterministic
  // given the seed.
  std::size_t n_init = 5;
  // Split-and-relocate refinement applied to the winning run: repeatedly
  // bisect the highest-variance cluster and move the centroid that is
  // cheapest to remove, keeping the result only when inertia improves.
  // Escapes merged/split local optima that restarts alone do not. 0 disables.
  std::size_t refinement_rounds = 100;
  SeedingMethod seeding = SeedingMethod::KMeansPlusPlusGreedy;
  DistanceMetric metric = DistanceMetric::Euclidean;
  // Weight each speaker's confidence by its utterance count when ranking
  // clusters, so the cluster statistic estimates the utterance-level mean.
  bool weight_confidence_by_utterances = true;
};

// Enforces the discovery-pipeline contract (k >= 2, 0 < bottom_fraction < 1).
void validate_auto_config(const AutoCohortConfig& config);

struct ClusterModel {
  AutoCohortConfig config;
  std::vector<std::vector<double>> centroids;      // k x dim
  std::vector<std::string> speaker_ids;            // sorted ascending
  std::vector<std::size_t> assignments;            // parallel to speaker_ids
  std::vector<double> cluster_confidence;          // per cluster; 1.0 when empty
  std::vector<std::size_t> cluster_speakers;       // members per cluster
  std::vector<std::size_t> cluster_utterances;     // member utterances per cluster
  double inertia = 0.0;
  std::vector<double> inertia_trace;               // winning run, per Lloyd pass

  std::size_t k() const { return centroids.size(); }
  std::optional<std::size_t> cluster_of(const std::string& speaker_id) const;

  std::unordered_map<std::string, std::size_t> speaker_index;
};

// Lloyd's algorithm with seeded k-means++ initialization. Empty clusters are
// re-seeded from the point farthest from its current centroid. Bit-identical
// output for identical inputs and seed, independent of worker count.
ClusterModel kmeans_fit(const std::vector<SpeakerProfile>& profiles,
                        const AutoCohortConfig& config);

// Cluster indices sorted by mean confidence ascending, ties by index.
std::vector<std::size_t> rank_clusters_by_confidence(const ClusterModel& model);

// First max(1, floor(bottom_fraction * K)) clusters of the ranking.
std::vector<std::size_t> select_bottom_clusters(const std::vector<std::size_t>& ranked,
                                                double bottom_fraction);

enum class MissingSpeakerPolicy { Error, Unassigned };

// Speaker is bottom iff its cluster is in the bottom set; utterances inherit
// their speaker's label.
CohortAssignments assign_cohort_auto(const Corpus& corpus, const ClusterModel& model,
                                     const std::set<std::size_t>& bottom_clusters,
                                     MissingSpeakerPolicy policy = MissingSpeakerPolicy::Error);

nlohmann::ordered_json cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

}  // namespace cohort_audit
