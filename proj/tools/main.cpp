#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cohort_audit/agreement.hpp"
#include "cohort_audit/autocohort.hpp"
#include "cohort_audit/cohort_map.hpp"
#include "cohort_audit/corpus.hpp"
#include "cohort_audit/error.hpp"
#include "cohort_audit/geocohort.hpp"
#include "cohort_audit/mitigation.hpp"
#include "cohort_audit/report.hpp"
#include "cohort_audit/synth.hpp"
#include "cohort_audit/wer.hpp"

namespace ca = cohort_audit;
using nlohmann::ordered_json;

namespace {

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ca::ValidationError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ca::ValidationError("cannot write file: " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ca::ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CorpusArgs {
  std::string path;
  std::size_t dim = 0;
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& args) {
  cmd->add_option("--corpus", args.path, "corpus JSONL path")->required();
  cmd->add_option("--dim", args.dim, "embedding dimension declared for the corpus")->required();
}

ca::Cohort parse_cohort(const std::string& name) {
  if (name == "top") return ca::Cohort::Top;
  if (name == "bottom") return ca::Cohort::Bottom;
  throw ca::ValidationError("cohort must be 'top' or 'bottom', got '" + name + "'");
}

// ---------------------------------------------------------------- ingest ---

struct IngestArgs {
  CorpusArgs corpus;
  std::string out;
  double trim = 0.039;
  bool keep_wakeword = false;
  std::string date_from, date_to;
};

void run_ingest(const IngestArgs& args) {
  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  ca::CorpusFilterConfig config;
  config.confidence_trim_fraction = args.trim;
  config.drop_wakeword_only = !args.keep_wakeword;
  if (args.date_from.empty() != args.date_to.empty())
    throw ca::ValidationError("--date-from and --date-to must be given together");
  if (!args.date_from.empty())
    config.date_range = {ca::Date::parse(args.date_from), ca::Date::parse(args.date_to)};

  ca::Corpus filtered = ca::apply_filters(corpus, config);
  if (filtered.empty())
    std::cerr << "warning: all " << corpus.size() << " utterances were filtered out\n";
  ca::save_corpus(filtered, args.out);

  ordered_json summary;
  summary["input"] = args.corpus.path;
  summary["loaded"] = corpus.size();
  summary["kept"] = filtered.size();
  summary["removed"] = corpus.size() - filtered.size();
  summary["out"] = args.out;
  std::cout << summary.dump(2) << '\n';
}

// -------------------------------------------------------------- discover ---

struct DiscoverGeoArgs {
  CorpusArgs corpus;
  std::string census;
  std::string attribute;
  double threshold = 0.75;
  bool rank = false;
  std::string out;
};

void run_discover_geo(const DiscoverGeoArgs& args) {
  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  ca::CensusTable census = ca::load_census(args.census);

  if (args.rank) {
    ca::AttributeGapRanking ranking =
        ca::rank_attributes_by_confidence_gap(corpus, census, args.threshold);
    ordered_json j;
    j["threshold"] = ranking.threshold;
    auto entries = ordered_json::array();
    for (const auto& e : ranking.entries) {
      entries.push_back(
          ordered_json{{"attribute", e.attribute},
                       {"bottom_zips", e.bottom_zip_count},
                       {"bottom_utterances", e.bottom_utterances},
                       {"bottom_speakers", e.bottom_speakers},
                       {"bottom_hours", e.bottom_hours},
                       {"confidence_disparity", e.confidence_disparity
                                                    ? ordered_json(*e.confidence_disparity)
                                                    : ordered_json(nullptr)}});
    }
    j["entries"] = std::move(entries);
    if (!args.out.empty()) write_json_file(j, args.out);
    std::cout << j.dump(2) << '\n';
    return;
  }

  if (args.attribute.empty())
    throw ca::ValidationError("discover geo requires --attribute (or --rank-attributes)");
  ca::GeoCohortMap geo = ca::build_geo_cohorts(census, args.attribute, args.threshold);
  ca::CohortMapFile map;
  map.source = ca::CohortSource::Geo;
  map.geo = geo;
  if (!args.out.empty()) ca::save_cohort_map(map, args.out);

  ca::CohortAssignments assignments = ca::assign_utterances_geo(corpus, geo);
  ordered_json summary;
  summary["attribute"] = geo.attribute;
  summary["threshold"] = geo.threshold;
  summary["bottom_zips"] = geo.bottom_zips.size();
  summary["top_zips"] = geo.top_zips.size();
  summary["bottom_utterances"] = assignments.count(ca::Cohort::Bottom);
  summary["top_utterances"] = assignments.count(ca::Cohort::Top);
  summary["unassigned_utterances"] = assignments.unassigned();
  double overall = corpus.mean_confidence();
  double bottom_sum = 0.0;
  std::size_t bottom_n = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (assignments.labels[i] && *assignments.labels[i] == ca::Cohort::Bottom) {
      bottom_sum += corpus.records[i].confidence;
      ++bottom_n;
    }
  }
  summary["bottom_confidence_disparity"] =
      (bottom_n > 0 && overall > 0.0)
          ? ordered_json(ca::confidence_disparity(bottom_sum / bottom_n, overall))
          : ordered_json(nullptr);
  std::cout << summary.dump(2) << '\n';
}

struct DiscoverAutoArgs {
  CorpusArgs corpus;
  ca::AutoCohortConfig config;
  std::string seeding = "kmeans++greedy";
  std::string metric = "euclidean";
  bool unweighted_confidence = false;
  std::string out;
};

void run_discover_auto(const DiscoverAutoArgs& args) {
  ca::AutoCohortConfig config = args.config;
  if (args.seeding == "kmeans++greedy")
    config.seeding = ca::SeedingMethod::KMeansPlusPlusGreedy;
  else if (args.seeding == "kmeans++")
    config.seeding = ca::SeedingMethod::KMeansPlusPlus;
  else if (args.seeding == "random")
    config.seeding = ca::SeedingMethod::RandomPoints;
  else
    throw ca::ValidationError("--seeding must be kmeans++greedy, kmeans++, or random");
  if (args.metric == "euclidean")
    config.metric = ca::DistanceMetric::Euclidean;
  else if (args.metric == "cosine")
    config.metric = ca::DistanceMetric::Cosine;
  else
    throw ca::ValidationError("--metric must be euclidean or cosine");
  config.weight_confidence_by_utterances = !args.unweighted_confidence;
  ca::validate_auto_config(config);

  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  std::vector<ca::SpeakerProfile> profiles = ca::aggregate_speakers(corpus);
  ca::ClusterModel model = ca::kmeans_fit(profiles, config);
  std::vector<std::size_t> ranked = ca::rank_clusters_by_confidence(model);
  std::vector<std::size_t> bottom = ca::select_bottom_clusters(ranked, config.bottom_fraction);
  std::sort(bottom.begin(), bottom.end());

  ca::CohortMapFile map;
  map.source = ca::CohortSource::Auto;
  map.model = model;
  map.bottom_clusters = bottom;
  if (!args.out.empty()) ca::save_cohort_map(map, args.out);

  std::set<std::size_t> bottom_set(bottom.begin(), bottom.end());
  ca::CohortAssignments assignments = ca::assign_cohort_auto(corpus, model, bottom_set);
  ordered_json summary;
  summary["k"] = config.k;
  summary["speakers"] = profiles.size();
  summary["inertia"] = model.inertia;
  summary["bottom_clusters"] = bottom;
  summary["bottom_utterances"] = assignments.count(ca::Cohort::Bottom);
  summary["top_utterances"] = assignments.count(ca::Cohort::Top);
  double overall = corpus.mean_confidence();
  double bottom_sum = 0.0;
  std::size_t bottom_n = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (assignments.labels[i] && *assignments.labels[i] == ca::Cohort::Bottom) {
      bottom_sum += corpus.records[i].confidence;
      ++bottom_n;
    }
  }
  summary["bottom_confidence_disparity"] =
      (bottom_n > 0 && overall > 0.0)
          ? ordered_json(ca::confidence_disparity(bottom_sum / bottom_n, overall))
          : ordered_json(nullptr);
  std::cout << summary.dump(2) << '\n';
}

// ----------------------------------------------------------------- audit ---

struct AuditArgs {
  CorpusArgs corpus;
  std::string cohorts;
  std::string out;
  std::string csv_prefix;
};

void run_audit(const AuditArgs& args) {
  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  ca::CohortMapFile map = ca::load_cohort_map(args.cohorts);
  ca::CohortAssignments assignments =
      ca::assign_from_map(corpus, map, ca::MissingSpeakerPolicy::Unassigned);
  ordered_json report = ca::build_audit_report(corpus, map, assignments);
  if (!args.out.empty())
    write_json_file(report, args.out);
  else
    std::cout << report.dump(2) << '\n';
  if (!args.csv_prefix.empty()) ca::write_csv_tables(report, args.csv_prefix);
}

// -------------------------------------------------------------- mitigate ---

struct PlanArgs {
  CorpusArgs corpus;
  std::string cohorts;
  double target_share = 0.09;
  std::string out;
  std::string plan_out;
};

void run_mitigate_plan(const PlanArgs& args) {
  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  ca::CohortMapFile map = ca::load_cohort_map(args.cohorts);
  ca::CohortAssignments assignments =
      ca::assign_from_map(corpus, map, ca::MissingSpeakerPolicy::Unassigned);
  ca::SamplingPlan plan = ca::build_sampling_plan(corpus, assignments, args.target_share);
  std::vector<ca::ManifestEntry> manifest = ca::materialize_manifest(plan, corpus);
  ca::save_manifest(manifest, args.out);
  ordered_json plan_json = ca::sampling_plan_to_json(plan);
  if (!args.plan_out.empty()) write_json_file(plan_json, args.plan_out);
  std::cout << plan_json.dump(2) << '\n';
}

struct FeaturesArgs {
  std::size_t base_dim = 192;
  std::string cohort;
  std::string spec_out;
  std::string frames_in;
  std::string frames_out;
};

ca::FrameMatrix parse_frames_csv(const std::string& text, std::size_t base_dim) {
  ca::FrameMatrix frames;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ca::ValidationError("frames CSV line " + std::to_string(line_no) +
                                  ": bad value '" + field + "'");
      }
    }
    if (row.size() != base_dim)
      throw ca::ValidationError("frames CSV line " + std::to_string(line_no) + ": expected " +
                                std::to_string(base_dim) + " values, got " +
                                std::to_string(row.size()));
    frames.push_back(std::move(row));
  }
  return frames;
}

void run_mitigate_features(const FeaturesArgs& args) {
  ca::CohortFeatureSpec spec;
  spec.base_frame_dim = args.base_dim;
  ca::Cohort cohort = parse_cohort(args.cohort);
  ordered_json spec_json = ca::feature_spec_to_json(spec);
  spec_json["cohort"] = args.cohort;
  if (!args.spec_out.empty()) write_json_file(spec_json, args.spec_out);
  std::cout << spec_json.dump(2) << '\n';

  if (!args.frames_in.empty()) {
    if (args.frames_out.empty())
      throw ca::ValidationError("--frames requires --augmented-out");
    ca::FrameMatrix frames = parse_frames_csv(read_text_file(args.frames_in), spec.base_frame_dim);
    ca::FrameMatrix augmented = ca::augment_features(frames, cohort, spec);
    std::ostringstream out;
    char buf[64];
    for (const auto& row : augmented) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
        out << (i ? "," : "") << buf;
      }
      out << '\n';
    }
    write_text_file(out.str(), args.frames_out);
  }
}

struct RelabelArgs {
  CorpusArgs corpus;
  std::string train_cohorts;
  std::string eval_cohorts;
  double threshold = 0.75;
  std::uint64_t seed = 0;
  double learning_rate = 1.0;
  std::size_t iterations = 500;
  double l2 = 0.0;
  std::string out;
};

void run_mitigate_relabel(const RelabelArgs& args) {
  ca::Corpus corpus = ca::load_corpus(args.corpus.path, args.corpus.dim);
  ca::CohortMapFile train_map = ca::load_cohort_map(args.train_cohorts);
  ca::CohortMapFile eval_map =
      args.eval_cohorts.empty() ? train_map : ca::load_cohort_map(args.eval_cohorts);

  ca::CohortAssignments train_labels =
      ca::assign_from_map(corpus, train_map, ca::MissingSpeakerPolicy::Unassigned);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!train_labels.labels[i]) continue;
    x.push_back(corpus.records[i].embedding);
    y.push_back(*train_labels.labels[i] == ca::Cohort::Bottom ? 1 : 0);
  }
  ca::ClassifierHyperparams hyper;
  hyper.learning_rate = args.learning_rate;
  hyper.iterations = args.iterations;
  hyper.l2 = args.l2;
  ca::CohortClassifier classifier = ca::train_cohort_classifier(x, y, args.seed, hyper);

  ca::CohortAssignments eval_labels =
      ca::assign_from_map(corpus, eval_map, ca::MissingSpeakerPolicy::Unassigned);
  std::vector<const ca::UtteranceRecord*> evaluated;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (eval_labels.labels[i] && *eval_labels.labels[i] == ca::Cohort::Bottom)
      evaluated.push_back(&corpus.records[i]);
  if (evaluated.empty())
    throw ca::InfeasibleError("relabel: evaluation cohort map yields no bottom utterances");

  ca::RelabelReport report = ca::relabel_with_threshold(classifier, evaluated, args.threshold);
  ordered_json j = ca::relabel_report_to_json(report);
  j["classifier"] = {{"final_loss", classifier.final_loss},
                     {"iterations", classifier.iterations_run},
                     {"learning_rate", classifier.learning_rate},
                     {"seed", classifier.seed},
                     {"training_examples", x.size()}};
  if (!args.out.empty()) write_json_file(j, args.out);
  ordered_json summary;
  summary["threshold"] = report.threshold;
  summary["n_evaluated"] = report.n_evaluated;
  summary["fraction_bottom"] = report.fraction_bottom;
  std::cout << summary.dump(2) << '\n';
}

// ----------------------------------------------------------------- synth ---

struct SynthArgs {
  ca::SynthConfig config;
  std::string out_corpus;
  std::string out_census;
  std::string out_truth;
};

void run_synth(const SynthArgs& args) {
  ca::SynthOutput out = ca::generate_population(args.config);
  ca::save_corpus(out.corpus, args.out_corpus);
  if (!args.out_census.empty()) ca::save_census(out.census, args.out_census);
  if (!args.out_truth.empty()) write_json_file(ca::ground_truth_to_json(out.truth), args.out_truth);
  ordered_json summary;
  summary["speakers"] = args.config.n_speakers;
  summary["utterances"] = out.corpus.size();
  summary["clusters"] = args.config.n_clusters;
  summary["bottom_clusters"] = args.config.n_bottom_clusters;
  summary["out_corpus"] = args.out_corpus;
  std::cout << summary.dump(2) << '\n';
}

// -------------------------------------------------------------- simulate ---

struct SimulateArgs {
  double wer_top = 0.0;
  double wer_bottom = 0.0;
  double share_before = 0.0;
  double share_after = 0.0;
  double alpha = 1.0;
  double wer_min = 0.0;
};

void run_simulate(const SimulateArgs& args) {
  double predicted = ca::simulate_learning_curve(args.wer_bottom, args.share_before,
                                                 args.share_after, args.wer_min, args.alpha);
  ordered_json j;
  j["inputs"] = {{"wer_top", args.wer_top},
                 {"wer_bottom", args.wer_bottom},
                 {"share_before", args.share_before},
                 {"share_after", args.share_after},
                 {"alpha", args.alpha},
                 {"wer_min", args.wer_min}};
  ordered_json predicted_block;
  predicted_block["wer_bottom_after"] = predicted;
  predicted_block["bottom_werr"] = ca::werr(args.wer_bottom, predicted);
  double gap_before = ca::wer_gap(args.wer_bottom, args.wer_top);
  double gap_after = ca::wer_gap(predicted, args.wer_top);
  predicted_block["wer_gap_before"] = gap_before;
  predicted_block["wer_gap_after"] = gap_after;
  predicted_block["relative_gap_reduction"] =
      gap_before > 0.0 ? ordered_json(ca::relative_gap_reduction(gap_before, gap_after))
                       : ordered_json(nullptr);
  j["predicted"] = std::move(predicted_block);
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus auditing toolkit: discovers underperforming speaker cohorts, quantifies "
               "performance disparities, and emits mitigation artifacts"};
  app.set_version_flag("--version", std::string(ca::kToolName) + " " + ca::kToolVersion);
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "validate, filter, and rewrite a corpus");
  add_corpus_options(ingest, ingest_args.corpus);
  ingest->add_option("--out", ingest_args.out, "filtered corpus JSONL path")->required();
  ingest->add_option("--trim", ingest_args.trim,
                     "fraction of lowest-confidence utterances to remove");
  ingest->add_flag("--keep-wakeword", ingest_args.keep_wakeword,
                   "keep wakeword-only utterances");
  ingest->add_option("--date-from", ingest_args.date_from, "inclusive start date YYYY-MM-DD");
  ingest->add_option("--date-to", ingest_args.date_to, "inclusive end date YYYY-MM-DD");
  ingest->callback([&] { run_ingest(ingest_args); });

  auto* discover = app.add_subcommand("discover", "discover top/bottom speaker cohorts");
  discover->require_subcommand(1);

  DiscoverGeoArgs geo_args;
  auto* geo = discover->add_subcommand("geo", "census-attribute ZIP cohorts");
  add_corpus_options(geo, geo_args.corpus);
  geo->add_option("--census", geo_args.census, "census CSV path")->required();
  geo->add_option("--attribute", geo_args.attribute, "census attribute defining the bottom cohort");
  geo->add_option("--threshold", geo_args.threshold, "majority share threshold (default 0.75)");
  geo->add_flag("--rank-attributes", geo_args.rank,
                "rank all census attributes by bottom-cohort confidence disparity");
  geo->add_option("--out", geo_args.out, "cohort map JSON path");
  geo->callback([&] { run_discover_geo(geo_args); });

  DiscoverAutoArgs auto_args;
  auto* auto_cmd = discover->add_subcommand("auto", "speaker-embedding cluster cohorts");
  add_corpus_options(auto_cmd, auto_args.corpus);
  auto_cmd->add_option("--k", auto_args.config.k, "number of clusters (default 50)");
  auto_cmd->add_option("--bottom-fraction", auto_args.config.bottom_fraction,
                       "fraction of clusters forming the bottom cohort (default 0.10)");
  auto_cmd->add_option("--seed", auto_args.config.seed, "clustering seed")->required();
  auto_cmd->add_option("--max-iters", auto_args.config.max_iterations, "Lloyd iteration cap");
  auto_cmd->add_option("--tol", auto_args.config.convergence_tolerance,
                       "centroid movement tolerance");
  auto_cmd->add_option("--n-init", auto_args.config.n_init, "independent restarts");
  auto_cmd->add_option("--seeding", auto_args.seeding, "kmeans++greedy | kmeans++ | random");
  auto_cmd->add_option("--metric", auto_args.metric, "euclidean | cosine");
  auto_cmd->add_flag("--unweighted-confidence", auto_args.unweighted_confidence,
                     "rank clusters by unweighted speaker-mean confidence");
  auto_cmd->add_option("--out", auto_args.out, "cohort map JSON path");
  auto_cmd->callback([&] { run_discover_auto(auto_args); });

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "emit the disparity audit report");
  add_corpus_options(audit, audit_args.corpus);
  audit->add_option("--cohorts", audit_args.cohorts, "cohort map JSON from `discover`")->required();
  audit->add_option("--out", audit_args.out, "report JSON path (stdout when omitted)");
  audit->add_option("--csv-tables", audit_args.csv_prefix,
                    "also write table-shaped CSVs with this path prefix");
  audit->callback([&] { run_audit(audit_args); });

  auto* mitigate = app.add_subcommand("mitigate", "produce mitigation artifacts");
  mitigate->require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = mitigate->add_subcommand("plan", "oversampling manifest for SSL training");
  add_corpus_options(plan, plan_args.corpus);
  plan->add_option("--cohorts", plan_args.cohorts, "cohort map JSON")->required();
  plan->add_option("--target-share", plan_args.target_share,
                   "target bottom-cohort share of training data");
  plan->add_option("--out", plan_args.out, "manifest JSONL path")->required();
  plan->add_option("--plan-out", plan_args.plan_out, "sampling plan JSON path");
  plan->callback([&] { run_mitigate_plan(plan_args); });

  FeaturesArgs features_args;
  auto* features = mitigate->add_subcommand("features", "one-hot cohort feature augmentation");
  features->add_option("--base-dim", features_args.base_dim,
                       "acoustic frame width before augmentation (default 192)");
  features->add_option("--cohort", features_args.cohort, "top | bottom")->required();
  features->add_option("--spec-out", features_args.spec_out, "feature spec JSON path");
  features->add_option("--frames", features_args.frames_in, "optional frames CSV to augment");
  features->add_option("--augmented-out", features_args.frames_out, "augmented frames CSV path");
  features->callback([&] { run_mitigate_features(features_args); });

  RelabelArgs relabel_args;
  auto* relabel = mitigate->add_subcommand("relabel", "classifier-based cohort relabeling report");
  add_corpus_options(relabel, relabel_args.corpus);
  relabel->add_option("--train-cohorts", relabel_args.train_cohorts,
                      "cohort map supplying training labels")->required();
  relabel->add_option("--eval-cohorts", relabel_args.eval_cohorts,
                      "cohort map selecting the evaluated bottom subset (default: training map)");
  relabel->add_option("--threshold", relabel_args.threshold,
                      "P(bottom) threshold (default 0.75)");
  relabel->add_option("--seed", relabel_args.seed, "training seed")->required();
  relabel->add_option("--learning-rate", relabel_args.learning_rate, "gradient descent step");
  relabel->add_option("--iterations", relabel_args.iterations, "gradient descent iterations");
  relabel->add_option("--l2", relabel_args.l2, "L2 regularization strength");
  relabel->add_option("--out", relabel_args.out, "relabel report JSON path");
  relabel->callback([&] { run_mitigate_relabel(relabel_args); });

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic population with ground truth");
  synth->add_option("--seed", synth_args.config.seed, "generation seed")->required();
  synth->add_option("--out-corpus", synth_args.out_corpus, "corpus JSONL path")->required();
  synth->add_option("--out-census", synth_args.out_census, "census CSV path");
  synth->add_option("--out-truth", synth_args.out_truth, "ground-truth JSON path");
  synth->add_option("--speakers", synth_args.config.n_speakers, "number of speakers");
  synth->add_option("--embedding-dim", synth_args.config.embedding_dim, "embedding dimension");
  synth->add_option("--clusters", synth_args.config.n_clusters, "number of acoustic clusters");
  synth->add_option("--bottom-clusters", synth_args.config.n_bottom_clusters,
                    "number of planted bottom clusters");
  synth->add_option("--separation", synth_args.config.cluster_separation,
                    "centroid spacing over within-cluster std");
  synth->add_option("--rho", synth_args.config.geo_acoustic_correlation,
                    "fraction of bottom-ZIP speakers with bottom acoustics");
  synth->add_option("--bottom-zip-fraction", synth_args.config.bottom_zip_speaker_fraction,
                    "fraction of speakers living in bottom ZIPs");
  synth->add_option("--zips", synth_args.config.n_zips, "number of ZIP codes");
  synth->add_option("--vocab", synth_args.config.vocabulary_size, "vocabulary size");
  synth->add_option("--min-utts", synth_args.config.min_utterances_per_speaker,
                    "min utterances per speaker");
  synth->add_option("--max-utts", synth_args.config.max_utterances_per_speaker,
                    "max utterances per speaker");
  synth->add_option("--min-tokens", synth_args.config.min_utterance_tokens,
                    "min tokens per utterance");
  synth->add_option("--max-tokens", synth_args.config.max_utterance_tokens,
                    "max tokens per utterance");
  synth->add_option("--wakeword-fraction", synth_args.config.wakeword_only_fraction,
                    "fraction of wakeword-only utterances");
  synth->add_option("--top-conf-mean", synth_args.config.top_profile.confidence_mean,
                    "top-cluster confidence mean");
  synth->add_option("--bottom-conf-mean", synth_args.config.bottom_profile.confidence_mean,
                    "bottom-cluster confidence mean");
  synth->add_option("--top-annotator-rate", synth_args.config.top_profile.annotator_error_rate,
                    "per-token annotator error rate, top clusters");
  synth->add_option("--bottom-annotator-rate",
                    synth_args.config.bottom_profile.annotator_error_rate,
                    "per-token annotator error rate, bottom clusters");
  synth->callback([&] { run_synth(synth_args); });

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate", "toy learning-curve projection of a sampling plan's WER effect");
  simulate->add_option("--wer-top", sim_args.wer_top, "top-cohort WER")->required();
  simulate->add_option("--wer-bottom", sim_args.wer_bottom, "bottom-cohort WER")->required();
  simulate->add_option("--share-before", sim_args.share_before,
                       "bottom training share before oversampling")->required();
  simulate->add_option("--share-after", sim_args.share_after,
                       "bottom training share after oversampling")->required();
  simulate->add_option("--alpha", sim_args.alpha, "learning-curve exponent");
  simulate->add_option("--wer-min", sim_args.wer_min, "asymptotic WER floor");
  simulate->callback([&] { run_simulate(sim_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ca::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ca::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
