#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cohort_audit/cohorts.hpp"
#include "cohort_audit/corpus.hpp"

namespace cohort_audit {

// Oversampling plan lifting the bottom cohort's share of training data to a
// target. Top-cohort utterances keep factor 1; every bottom utterance gets the
// same real-valued repetition factor, materialized to integer counts by
// flooring and handing the remainder to the lexicographically smallest ids.
struct SamplingPlan {
  double target_bottom_share = 0.0;
  double bottom_repetition_factor = 1.0;  // real-valued w
  std::size_t n_top = 0;
  std::size_t n_bottom = 0;
  std::size_t n_unassigned = 0;  // excluded from the plan, reported
  std::map<std::string, std::uint64_t> repeat_by_utterance;
  std::set<std::string> bottom_ids;
  std::uint64_t materialized_bottom = 0;  // sum of repeats over bottom ids
  double achieved_share = 0.0;            // integer share after materialization
  double achieved_share_real = 0.0;       // share under the real-valued factor
};

SamplingPlan build_sampling_plan(const Corpus& corpus, const CohortAssignments& assignments,
                                 double target_share);

struct ManifestEntry {
  std::string utterance_id;
  std::uint64_t repeat = 1;
  std::string transcript_source;  // "human" | "machine"
  Cohort cohort = Cohort::Top;
};

// Entries in corpus order. Bottom-cohort entries are marked machine-transcribed
// (they enter training through semi-supervised transcription, not new human
// annotation).
std::vector<ManifestEntry> materialize_manifest(const SamplingPlan& plan, const Corpus& corpus);

std::string manifest_to_jsonl(const std::vector<ManifestEntry>& entries);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

nlohmann::ordered_json sampling_plan_to_json(const SamplingPlan& plan);

// Frame-level cohort indicator appended to acoustic features: (1,0) for top,
// (0,1) for bottom.
struct CohortFeatureSpec {
  std::size_t base_frame_dim = 192;  // e.g. 64 mel energies x 3 stacked frames
  std::size_t onehot_dim = 2;
  std::array<std::string, 2> order = {"top", "bottom"};

  std::size_t augmented_dim() const { return base_frame_dim + onehot_dim; }
};

using FrameMatrix = std::vector<std::vector<double>>;

FrameMatrix augment_features(const FrameMatrix& frames, Cohort cohort,
                             const CohortFeatureSpec& spec);

nlohmann::ordered_json feature_spec_to_json(const CohortFeatureSpec& spec);

// Linear-logistic cohort-membership classifier over embeddings.
// P(bottom | x) = sigmoid(w.x + b).
struct CohortClassifier {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t iterations_run = 0;
  double learning_rate = 0.0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;

  double predict_bottom_probability(const std::vector<double>& x) const;
};

struct ClassifierHyperparams {
  double learning_rate = 1.0;
  std::size_t iterations = 500;
  double l2 = 0.0;
};

// Mean cross-entropy over (X, y) with optional L2 on the weights; exposed so
// the gradient can be checked against finite differences.
double logistic_loss(const std::vector<double>& weights, double bias,
                     const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     double l2);
void logistic_gradient(const std::vector<double>& weights, double bias,
                       const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       double l2, std::vector<double>& grad_w, double& grad_b);

// Full-batch gradient descent from zero weights, fixed data order.
// y: 1 = bottom, 0 = top. Both classes must be present.
CohortClassifier train_cohort_classifier(const std::vector<std::vector<double>>& x,
                                         const std::vector<int>& y, std::uint64_t seed,
                                         const ClassifierHyperparams& hyper = {});

struct RelabelEntry {
  std::string utterance_id;
  double p_bottom = 0.0;
  bool labeled_bottom = false;
};

struct RelabelReport {
  double threshold = 0.75;
  std::size_t n_evaluated = 0;
  double fraction_bottom = 0.0;
  std::vector<RelabelEntry> per_utterance;
};

// Labels each utterance bottom iff P(bottom) >= threshold.
RelabelReport relabel_with_threshold(const CohortClassifier& classifier,
                                     const std::vector<const UtteranceRecord*>& utterances,
                                     double threshold);

nlohmann::ordered_json relabel_report_to_json(const RelabelReport& report);

}  // namespace cohort_audit
