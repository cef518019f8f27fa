#include "cohort_audit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"

namespace cohort_audit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

long jdn(const Date& d) {
  long a = (14 - d.month) / 12;
  long y = d.year + 4800 - a;
  long m = d.month + 12 * a - 3;
  return d.day + (153 * m + 2) / 5 + 365 * y + y / 4 - y / 100 + y / 400 - 32045;
}

Date date_from_jdn(long j) {
  long a = j + 32044;
  long b = (4 * a + 3) / 146097;
  long c = a - 146097 * b / 4;
  long d = (4 * c + 3) / 1461;
  long e = c - 1461 * d / 4;
  long m = (5 * e + 2) / 153;
  Date out;
  out.day = static_cast<int>(e - (153 * m + 2) / 5 + 1);
  out.month = static_cast<int>(m + 3 - 12 * (m / 10));
  out.year = static_cast<int>(100 * b + d - 4800 + m / 10);
  return out;
}

std::string zero_padded(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InfeasibleError(std::string("synth config: ") + name + " must be in [0,1]");
}

void validate_profile(const ClassProfile& p, const char* which) {
  check_probability(p.p_substitution, "p_substitution");
  check_probability(p.p_deletion, "p_deletion");
  check_probability(p.p_insertion, "p_insertion");
  check_probability(p.annotator_error_rate, "annotator_error_rate");
  if (p.p_substitution + p.p_deletion > 1.0)
    throw InfeasibleError(std::string("synth config: ") + which +
                          " p_substitution + p_deletion exceeds 1");
  if (!(p.confidence_mean >= 0.0 && p.confidence_mean <= 1.0))
    throw InfeasibleError(std::string("synth config: ") + which +
                          " confidence_mean must be in [0,1]");
  if (!(p.confidence_std >= 0.0))
    throw InfeasibleError(std::string("synth config: ") + which + " confidence_std negative");
}

// Substitute with a different vocabulary token, uniform over the others.
std::string substitute_token(const std::string& original, const std::vector<std::string>& vocab,
                             const std::unordered_map<std::string, std::size_t>& vocab_index,
                             Rng& rng) {
  auto it = vocab_index.find(original);
  if (it == vocab_index.end()) return vocab[rng.below(vocab.size())];
  std::size_t j = rng.below(vocab.size() - 1);
  if (j >= it->second) ++j;
  return vocab[j];
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

bool PlantedGroundTruth::cluster_is_bottom(std::size_t cluster) const {
  return std::binary_search(bottom_clusters.begin(), bottom_clusters.end(), cluster);
}

std::vector<std::string> synth_vocabulary(std::size_t size) {
  std::vector<std::string> vocab;
  vocab.reserve(size);
  for (std::size_t i = 0; i < size; ++i) vocab.push_back(zero_padded("w", i, 3));
  return vocab;
}

std::array<std::string, 3> simulate_blind_passes(const std::vector<std::string>& reference_tokens,
                                                 double annotator_error_rate,
                                                 const std::vector<std::string>& vocabulary,
                                                 std::uint64_t seed) {
  check_probability(annotator_error_rate, "annotator_error_rate");
  if (vocabulary.size() < 2)
    throw ValidationError("simulate_blind_passes: vocabulary needs at least 2 tokens");
  std::unordered_map<std::string, std::size_t> vocab_index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) vocab_index.emplace(vocabulary[i], i);

  Rng rng(seed);
  std::array<std::string, 3> passes;
  for (auto& pass : passes) {
    std::vector<std::string> tokens;
    tokens.reserve(reference_tokens.size());
    for (const auto& tok : reference_tokens) {
      tokens.push_back(rng.bernoulli(annotator_error_rate)
                           ? substitute_token(tok, vocabulary, vocab_index, rng)
                           : tok);
    }
    pass = join_tokens(tokens);
  }
  return passes;
}

double simulate_learning_curve(double wer0, double share0, double share, double wer_min,
                               double alpha) {
  if (!(share > 0.0)) throw ValidationError("simulate_learning_curve: share must be positive");
  if (!(share0 > 0.0)) throw ValidationError("simulate_learning_curve: share0 must be positive");
  if (!(alpha > 0.0)) throw ValidationError("simulate_learning_curve: alpha must be positive");
  if (wer_min > wer0) throw ValidationError("simulate_learning_curve: wer_min exceeds wer0");
  double wer = wer_min + (wer0 - wer_min) * std::pow(share0 / share, alpha);
  return std::max(wer, wer_min);
}

SynthOutput generate_population(const SynthConfig& config) {
  if (config.n_speakers == 0) throw InfeasibleError("synth config: n_speakers must be positive");
  if (config.n_clusters == 0) throw InfeasibleError("synth config: n_clusters must be positive");
  if (config.n_bottom_clusters == 0 || config.n_bottom_clusters >= config.n_clusters)
    throw InfeasibleError("synth config: need 0 < n_bottom_clusters < n_clusters");
  if (config.embedding_dim == 0) throw InfeasibleError("synth config: embedding_dim must be positive");
  if (config.min_utterances_per_speaker == 0 ||
      config.min_utterances_per_speaker > config.max_utterances_per_speaker)
    throw InfeasibleError("synth config: bad utterances_per_speaker range");
  if (config.min_utterance_tokens == 0 ||
      config.min_utterance_tokens > config.max_utterance_tokens)
    throw InfeasibleError("synth config: bad utterance token range");
  if (config.vocabulary_size < 2) throw InfeasibleError("synth config: vocabulary too small");
  if (config.n_zips < 2) throw InfeasibleError("synth config: need at least 2 zips");
  if (!(config.cluster_separation > 0.0))
    throw InfeasibleError("synth config: cluster_separation must be positive");
  check_probability(config.geo_acoustic_correlation, "geo_acoustic_correlation");
  check_probability(config.bottom_zip_speaker_fraction, "bottom_zip_speaker_fraction");
  check_probability(config.wakeword_only_fraction, "wakeword_only_fraction");
  if (config.date_to < config.date_from) throw InfeasibleError("synth config: date range reversed");
  validate_profile(config.top_profile, "top_profile");
  validate_profile(config.bottom_profile, "bottom_profile");

  // Acoustic-class rates that keep the overall bottom-cluster mass at
  // n_bottom_clusters / n_clusters while bottom-ZIP speakers are bottom
  // acoustic with probability rho.
  const double beta =
      static_cast<double>(config.n_bottom_clusters) / static_cast<double>(config.n_clusters);
  const double g = config.bottom_zip_speaker_fraction;
  const double rho = config.geo_acoustic_correlation;
  double p_bottom_acoustic_top_zip = 0.0;
  if (g < 1.0) {
    p_bottom_acoustic_top_zip = (beta - g * rho) / (1.0 - g);
    if (p_bottom_acoustic_top_zip < 0.0 || p_bottom_acoustic_top_zip > 1.0)
      throw InfeasibleError(
          "synth config: geo_acoustic_correlation is infeasible for the cluster and ZIP shares");
  } else if (std::abs(rho - beta) > 1e-12) {
    throw InfeasibleError("synth config: with all speakers in bottom ZIPs, rho must equal the "
                          "bottom-cluster share");
  }

  const std::size_t dim = config.embedding_dim;
  const std::size_t k = config.n_clusters;

  // Cluster centroids. With dim >= k each centroid sits on its own axis and
  // every pair is exactly cluster_separation apart (within-cluster std is 1
  // per coordinate). Otherwise fall back to scaled random directions.
  std::vector<std::vector<double>> centroids(k, std::vector<double>(dim, 0.0));
  if (dim >= k) {
    const double scale = config.cluster_separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < k; ++c) centroids[c][c] = scale;
  } else {
    Rng rng(derive_seed(config.seed, "centroids"));
    for (std::size_t c = 0; c < k; ++c) {
      double norm_sq = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        centroids[c][j] = rng.normal();
        norm_sq += centroids[c][j] * centroids[c][j];
      }
      double scale = config.cluster_separation / std::sqrt(std::max(norm_sq, 1e-300));
      for (std::size_t j = 0; j < dim; ++j) centroids[c][j] *= scale;
    }
  }

  SynthOutput out;
  out.truth.n_clusters = k;
  for (std::size_t c = 0; c < config.n_bottom_clusters; ++c) out.truth.bottom_clusters.push_back(c);

  // ZIP codes and census table.
  std::size_t n_bottom_zips = static_cast<std::size_t>(
      std::lround(g * static_cast<double>(config.n_zips)));
  n_bottom_zips = std::min(std::max<std::size_t>(n_bottom_zips, 1), config.n_zips - 1);
  std::vector<std::string> bottom_zips, top_zips;
  for (std::size_t z = 0; z < config.n_zips; ++z) {
    std::string zip = zero_padded("", 10000 + z, 5);
    bool bottom = z < n_bottom_zips;
    out.truth.zip_is_bottom[zip] = bottom;
    (bottom ? bottom_zips : top_zips).push_back(zip);
  }

  Rng census_rng(derive_seed(config.seed, "census"));
  out.census.attributes = {config.census_attribute, "attr_uncorrelated", "attr_sparse"};
  for (std::size_t z = 0; z < config.n_zips; ++z) {
    std::string zip = zero_padded("", 10000 + z, 5);
    CensusRow row;
    row.zip = zip;
    row.population = census_rng.range(1000, 100000);
    bool bottom = out.truth.zip_is_bottom.at(zip);
    row.attribute_shares[config.census_attribute] =
        bottom ? census_rng.uniform(0.78, 0.97) : census_rng.uniform(0.03, 0.60);
    row.attribute_shares["attr_uncorrelated"] = census_rng.bernoulli(0.08)
                                                    ? census_rng.uniform(0.75, 0.95)
                                                    : census_rng.uniform(0.0, 0.60);
    row.attribute_shares["attr_sparse"] = census_rng.uniform(0.0, 0.60);
    out.census.index_by_zip.emplace(zip, out.census.rows.size());
    out.census.rows.push_back(std::move(row));
  }

  const std::vector<std::string> vocab = synth_vocabulary(config.vocabulary_size);
  std::unordered_map<std::string, std::size_t> vocab_index;
  for (std::size_t i = 0; i < vocab.size(); ++i) vocab_index.emplace(vocab[i], i);
  const long day_lo = jdn(config.date_from);
  const long day_hi = jdn(config.date_to);

  out.corpus.embedding_dim = dim;
  for (std::size_t s = 0; s < config.n_speakers; ++s) {
    const std::string speaker_id = zero_padded("s", s, 5);
    Rng rng(derive_seed(config.seed, speaker_id));

    const bool bottom_zip = rng.bernoulli(g);
    const bool bottom_acoustic =
        bottom_zip ? rng.bernoulli(rho) : rng.bernoulli(p_bottom_acoustic_top_zip);
    const ClassProfile& profile = bottom_acoustic ? config.bottom_profile : config.top_profile;
    const std::size_t cluster =
        bottom_acoustic
            ? rng.below(config.n_bottom_clusters)
            : config.n_bottom_clusters + rng.below(k - config.n_bottom_clusters);
    const auto& zips = bottom_zip ? bottom_zips : top_zips;
    const std::string zip = zips[rng.below(zips.size())];
    out.truth.cluster_of_speaker.emplace(speaker_id, cluster);

    const auto n_utt = static_cast<std::size_t>(rng.range(
        static_cast<std::int64_t>(config.min_utterances_per_speaker),
        static_cast<std::int64_t>(config.max_utterances_per_speaker)));
    for (std::size_t u = 0; u < n_utt; ++u) {
      UtteranceRecord rec;
      rec.utterance_id = speaker_id + "-" + zero_padded("u", u, 3);
      rec.speaker_id = speaker_id;
      rec.zip = zip;
      rec.embedding.resize(dim);
      for (std::size_t j = 0; j < dim; ++j) rec.embedding[j] = centroids[cluster][j] + rng.normal();
      rec.confidence =
          std::clamp(rng.normal(profile.confidence_mean, profile.confidence_std), 0.0, 1.0);
      rec.timestamp = date_from_jdn(day_lo + rng.range(0, day_hi - day_lo));
      rec.is_wakeword_only = rng.bernoulli(config.wakeword_only_fraction);

      if (rec.is_wakeword_only) {
        rec.hypothesis = "heyassistant";
        rec.adjudicated_reference = "heyassistant";
        rec.blind_passes = {"heyassistant", "heyassistant", "heyassistant"};
        rec.duration_s = rng.uniform(0.5, 1.5);
        out.truth.reference_of_utterance[rec.utterance_id] = "heyassistant";
      } else {
        const auto len = static_cast<std::size_t>(rng.range(
            static_cast<std::int64_t>(config.min_utterance_tokens),
            static_cast<std::int64_t>(config.max_utterance_tokens)));
        std::vector<std::string> reference;
        reference.reserve(len);
        for (std::size_t t = 0; t < len; ++t) reference.push_back(vocab[rng.below(vocab.size())]);
        // Hypothesis: per-token deletion/substitution, then insertions.
        std::vector<std::string> hypothesis;
        for (const auto& tok : reference) {
          double roll = rng.uniform();
          if (roll < profile.p_deletion) {
            // dropped
          } else if (roll < profile.p_deletion + profile.p_substitution) {
            hypothesis.push_back(substitute_token(tok, vocab, vocab_index, rng));
          } else {
            hypothesis.push_back(tok);
          }
          if (rng.bernoulli(profile.p_insertion))
            hypothesis.push_back(vocab[rng.below(vocab.size())]);
        }
        rec.hypothesis = join_tokens(hypothesis);
        rec.adjudicated_reference = join_tokens(reference);
        auto passes = simulate_blind_passes(reference, profile.annotator_error_rate, vocab,
                                            derive_seed(config.seed, rec.utterance_id + "/passes"));
        rec.blind_passes.assign(passes.begin(), passes.end());
        rec.duration_s = 0.8 + 0.45 * static_cast<double>(len) + rng.uniform(0.0, 0.6);
        out.truth.reference_of_utterance[rec.utterance_id] = *rec.adjudicated_reference;
      }
      out.corpus.records.push_back(std::move(rec));
    }
  }
  return out;
}

ordered_json ground_truth_to_json(const PlantedGroundTruth& truth) {
  ordered_json j;
  j["n_clusters"] = truth.n_clusters;
  j["bottom_clusters"] = truth.bottom_clusters;
  ordered_json speakers = ordered_json::object();
  std::map<std::string, std::size_t> sorted(truth.cluster_of_speaker.begin(),
                                            truth.cluster_of_speaker.end());
  for (const auto& [id, cluster] : sorted) speakers[id] = cluster;
  j["cluster_of_speaker"] = std::move(speakers);
  ordered_json zips = ordered_json::object();
  for (const auto& [zip, bottom] : truth.zip_is_bottom) zips[zip] = bottom;
  j["zip_is_bottom"] = std::move(zips);
  ordered_json refs = ordered_json::object();
  for (const auto& [id, text] : truth.reference_of_utterance) refs[id] = text;
  j["reference_of_utterance"] = std::move(refs);
  return j;
}

PlantedGroundTruth ground_truth_from_json(const json& j) {
  PlantedGroundTruth truth;
  try {
    truth.n_clusters = j.at("n_clusters").get<std::size_t>();
    truth.bottom_clusters = j.at("bottom_clusters").get<std::vector<std::size_t>>();
    for (const auto& [id, cluster] : j.at("cluster_of_speaker").items())
      truth.cluster_of_speaker.emplace(id, cluster.get<std::size_t>());
    for (const auto& [zip, bottom] : j.at("zip_is_bottom").items())
      truth.zip_is_bottom.emplace(zip, bottom.get<bool>());
    for (const auto& [id, text] : j.at("reference_of_utterance").items())
      truth.reference_of_utterance.emplace(id, text.get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad ground truth JSON: ") + e.what());
  }
  return truth;
}

}  // namespace cohort_audit
