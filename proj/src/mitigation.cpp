#include "cohort_audit/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cohort_audit/error.hpp"

namespace cohort_audit {

using nlohmann::ordered_json;

SamplingPlan build_sampling_plan(const Corpus& corpus, const CohortAssignments& assignments,
                                 double target_share) {
  if (assignments.labels.size() != corpus.size())
    throw ValidationError("build_sampling_plan: assignments do not match corpus");
  if (!(target_share > 0.0 && target_share < 1.0))
    throw ValidationError("target share must be in (0, 1)");

  SamplingPlan plan;
  plan.target_bottom_share = target_share;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& label = assignments.labels[i];
    if (!label) {
      ++plan.n_unassigned;
      continue;
    }
    if (*label == Cohort::Bottom) {
      ++plan.n_bottom;
      plan.bottom_ids.insert(corpus.records[i].utterance_id);
    } else {
      ++plan.n_top;
    }
  }
  if (plan.n_bottom == 0) throw InfeasibleError("sampling plan: bottom cohort is empty");
  if (plan.n_top == 0) throw InfeasibleError("sampling plan: top cohort is empty");

  const double n_top = static_cast<double>(plan.n_top);
  const double n_bottom = static_cast<double>(plan.n_bottom);
  const double current_share = n_bottom / (n_bottom + n_top);
  if (target_share <= current_share)
    throw InfeasibleError("sampling plan would downsample: current bottom share " +
                          std::to_string(current_share) + " >= target " +
                          std::to_string(target_share) +
                          " (--allow-downsample is reserved, not implemented)");

  // w chosen so that w*n_bottom / (w*n_bottom + n_top) == target exactly.
  const double w = target_share * n_top / ((1.0 - target_share) * n_bottom);
  plan.bottom_repetition_factor = w;
  plan.achieved_share_real = (w * n_bottom) / (w * n_bottom + n_top);

  const double bottom_total_real = w * n_bottom;
  const auto bottom_total = static_cast<std::uint64_t>(std::floor(bottom_total_real));
  const auto base = static_cast<std::uint64_t>(std::floor(w));
  std::uint64_t extras = bottom_total - base * plan.n_bottom;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& label = assignments.labels[i];
    if (!label) continue;
    plan.repeat_by_utterance[corpus.records[i].utterance_id] = *label == Cohort::Top ? 1 : base;
  }
  // Remainder goes to the lexicographically smallest bottom ids; bottom_ids is
  // already sorted.
  for (const auto& id : plan.bottom_ids) {
    if (extras == 0) break;
    ++plan.repeat_by_utterance[id];
    --extras;
  }

  plan.materialized_bottom = bottom_total;
  plan.achieved_share = static_cast<double>(bottom_total) /
                        (static_cast<double>(bottom_total) + n_top);
  return plan;
}

std::vector<ManifestEntry> materialize_manifest(const SamplingPlan& plan, const Corpus& corpus) {
  std::size_t covered = 0;
  std::vector<ManifestEntry> entries;
  entries.reserve(plan.repeat_by_utterance.size());
  for (const auto& rec : corpus.records) {
    auto it = plan.repeat_by_utterance.find(rec.utterance_id);
    if (it == plan.repeat_by_utterance.end()) continue;
    ++covered;
    bool bottom = plan.bottom_ids.count(rec.utterance_id) > 0;
    ManifestEntry entry;
    entry.utterance_id = rec.utterance_id;
    entry.repeat = it->second;
    entry.cohort = bottom ? Cohort::Bottom : Cohort::Top;
    entry.transcript_source = bottom ? "machine" : "human";
    entries.push_back(std::move(entry));
  }
  if (covered != plan.repeat_by_utterance.size())
    throw ValidationError("materialize_manifest: plan references utterances absent from corpus");
  return entries;
}

std::string manifest_to_jsonl(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    ordered_json j;
    j["utterance_id"] = e.utterance_id;
    j["repeat"] = e.repeat;
    j["transcript_source"] = e.transcript_source;
    j["cohort"] = to_string(e.cohort);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write manifest: " + path);
  out << manifest_to_jsonl(entries);
}

ordered_json sampling_plan_to_json(const SamplingPlan& plan) {
  ordered_json j;
  j["target_bottom_share"] = plan.target_bottom_share;
  j["bottom_repetition_factor"] = plan.bottom_repetition_factor;
  j["n_top"] = plan.n_top;
  j["n_bottom"] = plan.n_bottom;
  j["n_unassigned"] = plan.n_unassigned;
  j["materialized_bottom"] = plan.materialized_bottom;
  j["achieved_share"] = plan.achieved_share;
  j["achieved_share_real"] = plan.achieved_share_real;
  return j;
}

FrameMatrix augment_features(const FrameMatrix& frames, Cohort cohort,
                             const CohortFeatureSpec& spec) {
  FrameMatrix out;
  out.reserve(frames.size());
  for (const auto& frame : frames) {
    if (frame.size() != spec.base_frame_dim)
      throw ValidationError("augment_features: frame has " + std::to_string(frame.size()) +
                            " features, spec expects " + std::to_string(spec.base_frame_dim));
    std::vector<double> row = frame;
    row.push_back(cohort == Cohort::Top ? 1.0 : 0.0);
    row.push_back(cohort == Cohort::Bottom ? 1.0 : 0.0);
    out.push_back(std::move(row));
  }
  return out;
}

ordered_json feature_spec_to_json(const CohortFeatureSpec& spec) {
  ordered_json j;
  j["base_frame_dim"] = spec.base_frame_dim;
  j["onehot_dim"] = spec.onehot_dim;
  j["order"] = spec.order;
  j["augmented_dim"] = spec.augmented_dim();
  return j;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double CohortClassifier::predict_bottom_probability(const std::vector<double>& x) const {
  if (x.size() != weights.size())
    throw ValidationError("classifier: embedding dimension mismatch");
  return sigmoid(dot(weights, x) + bias);
}

double logistic_loss(const std::vector<double>& weights, double bias,
                     const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = dot(weights, x[i]) + bias;
    // log(1 + exp(z)) - y z, computed in the numerically stable branch.
    double log1pe = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += log1pe - static_cast<double>(y[i]) * z;
  }
  loss /= static_cast<double>(x.size());
  if (l2 > 0.0) loss += 0.5 * l2 * dot(weights, weights);
  return loss;
}

void logistic_gradient(const std::vector<double>& weights, double bias,
                       const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       double l2, std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double err = sigmoid(dot(weights, x[i]) + bias) - static_cast<double>(y[i]);
    for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] += err * x[i][j];
    grad_b += err;
  }
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    grad_w[j] *= inv_n;
    if (l2 > 0.0) grad_w[j] += l2 * weights[j];
  }
  grad_b *= inv_n;
}

CohortClassifier train_cohort_classifier(const std::vector<std::vector<double>>& x,
                                         const std::vector<int>& y, std::uint64_t seed,
                                         const ClassifierHyperparams& hyper) {
  if (x.empty()) throw ValidationError("train_cohort_classifier: no training data");
  if (x.size() != y.size())
    throw ValidationError("train_cohort_classifier: features and labels differ in length");
  const std::size_t dim = x[0].size();
  if (dim == 0) throw ValidationError("train_cohort_classifier: zero-dimension embeddings");
  bool has_top = false;
  bool has_bottom = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != dim)
      throw ValidationError("train_cohort_classifier: embedding dimension mismatch");
    (y[i] ? has_bottom : has_top) = true;
  }
  if (!has_top || !has_bottom)
    throw ValidationError("train_cohort_classifier: both classes must be present");

  CohortClassifier clf;
  clf.weights.assign(dim, 0.0);  // zero init; the objective is convex
  clf.bias = 0.0;
  clf.learning_rate = hyper.learning_rate;
  clf.seed = seed;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  for (std::size_t it = 0; it < hyper.iterations; ++it) {
    logistic_gradient(clf.weights, clf.bias, x, y, hyper.l2, grad_w, grad_b);
    for (std::size_t j = 0; j < dim; ++j) clf.weights[j] -= hyper.learning_rate * grad_w[j];
    clf.bias -= hyper.learning_rate * grad_b;
  }
  clf.iterations_run = hyper.iterations;
  clf.final_loss = logistic_loss(clf.weights, clf.bias, x, y, hyper.l2);
  return clf;
}

RelabelReport relabel_with_threshold(const CohortClassifier& classifier,
                                     const std::vector<const UtteranceRecord*>& utterances,
                                     double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ValidationError("relabel threshold must be in (0, 1)");
  if (utterances.empty()) throw ValidationError("relabel_with_threshold: no utterances");

  RelabelReport report;
  report.threshold = threshold;
  report.n_evaluated = utterances.size();
  std::size_t n_bottom = 0;
  for (const UtteranceRecord* rec : utterances) {
    RelabelEntry entry;
    entry.utterance_id = rec->utterance_id;
    entry.p_bottom = classifier.predict_bottom_probability(rec->embedding);
    entry.labeled_bottom = entry.p_bottom >= threshold;
    if (entry.labeled_bottom) ++n_bottom;
    report.per_utterance.push_back(std::move(entry));
  }
  report.fraction_bottom = static_cast<double>(n_bottom) / static_cast<double>(utterances.size());
  return report;
}

ordered_json relabel_report_to_json(const RelabelReport& report) {
  ordered_json j;
  j["threshold"] = report.threshold;
  j["n_evaluated"] = report.n_evaluated;
  j["fraction_bottom"] = report.fraction_bottom;
  auto arr = ordered_json::array();
  for (const auto& e : report.per_utterance) {
    arr.push_back(ordered_json{{"utterance_id", e.utterance_id},
                               {"p_bottom", e.p_bottom},
                               {"labeled_bottom", e.labeled_bottom}});
  }
  j["per_utterance"] = std::move(arr);
  return j;
}

}  // namespace cohort_audit
