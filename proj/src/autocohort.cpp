#include "cohort_audit/autocohort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"
#include "parallel.hpp"

namespace cohort_audit {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<SpeakerProfile> aggregate_speakers(const Corpus& corpus) {
  if (corpus.empty()) throw ValidationError("aggregate_speakers: empty corpus");
  struct Acc {
    std::vector<double> sum;
    double conf_sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> by_speaker;  // ordered so output is sorted
  for (const auto& rec : corpus.records) {
    Acc& acc = by_speaker[rec.speaker_id];
    if (acc.sum.empty()) acc.sum.assign(corpus.embedding_dim, 0.0);
    for (std::size_t d = 0; d < corpus.embedding_dim; ++d) acc.sum[d] += rec.embedding[d];
    acc.conf_sum += rec.confidence;
    ++acc.count;
  }
  std::vector<SpeakerProfile> profiles;
  profiles.reserve(by_speaker.size());
  for (auto& [speaker_id, acc] : by_speaker) {
    SpeakerProfile p;
    p.speaker_id = speaker_id;
    p.utterance_count = acc.count;
    p.mean_confidence = acc.conf_sum / static_cast<double>(acc.count);
    p.mean_embedding = std::move(acc.sum);
    for (double& v : p.mean_embedding) v /= static_cast<double>(acc.count);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void validate_auto_config(const AutoCohortConfig& config) {
  if (config.k < 2) throw ValidationError("cluster count k must be >= 2");
  if (!(config.bottom_fraction > 0.0 && config.bottom_fraction < 1.0))
    throw ValidationError("bottom_fraction must be in (0, 1)");
  if (config.max_iterations == 0) throw ValidationError("max_iterations must be >= 1");
  if (!(config.convergence_tolerance >= 0.0))
    throw ValidationError("convergence_tolerance must be nonnegative");
  if (config.n_init == 0) throw ValidationError("n_init must be >= 1");
}

std::optional<std::size_t> ClusterModel::cluster_of(const std::string& speaker_id) const {
  auto it = speaker_index.find(speaker_id);
  if (it == speaker_index.end()) return std::nullopt;
  return assignments[it->second];
}

namespace {

double sqdist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

struct KmeansRun {
  std::vector<double> centroids;  // k x d, row-major
  std::vector<std::size_t> assignments;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> inertia_trace;
};

// Nearest centroid per point, ties to the lower index. Distances per point
// are independent, so this step parallelizes without affecting results.
void assign_points(const std::vector<double>& x, std::size_t n, std::size_t d,
                   const std::vector<double>& centroids, std::size_t k,
                   std::vector<std::size_t>& out, std::vector<double>& out_d2) {
  detail::parallel_chunks(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double* xi = &x[i * d];
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double dist = sqdist(xi, &centroids[c * d], d);
        if (dist < best) {
          best = dist;
          best_k = c;
        }
      }
      out[i] = best_k;
      out_d2[i] = best;
    }
  });
}

// Weighted pick proportional to d2 via cumulative mass; uniform fallback when
// all mass is zero (duplicate points).
std::size_t sample_by_d2(const std::vector<double>& d2, Rng& rng) {
  double total = std::accumulate(d2.begin(), d2.end(), 0.0);
  if (!(total > 0.0)) return static_cast<std::size_t>(rng.below(d2.size()));
  double u = rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < d2.size(); ++i) {
    cum += d2[i];
    if (u < cum) return i;
  }
  return d2.size() - 1;
}

std::vector<double> seed_centroids(const std::vector<double>& x, std::size_t n, std::size_t d,
                                   std::size_t k, SeedingMethod method, Rng& rng) {
  std::vector<double> centroids(k * d);
  auto copy_point = [&](std::size_t point, std::size_t slot) {
    std::copy_n(&x[point * d], d, &centroids[slot * d]);
  };

  if (method == SeedingMethod::RandomPoints) {
    // Partial Fisher-Yates for k distinct rows.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t j = c + static_cast<std::size_t>(rng.below(n - c));
      std::swap(idx[c], idx[j]);
      copy_point(idx[c], c);
    }
    return centroids;
  }

  const std::size_t n_candidates =
      method == SeedingMethod::KMeansPlusPlusGreedy
          ? 2 + static_cast<std::size_t>(std::log(static_cast<double>(std::max<std::size_t>(k, 2))))
          : 1;

  std::size_t first = static_cast<std::size_t>(rng.below(n));
  copy_point(first, 0);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sqdist(&x[i * d], &x[first * d], d);

  std::vector<double> cand_d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    std::size_t chosen = 0;
    if (n_candidates == 1) {
      chosen = sample_by_d2(d2, rng);
    } else {
      double best_potential = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < n_candidates; ++t) {
        std::size_t cand = sample_by_d2(d2, rng);
        double potential = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          potential += std::min(d2[i], sqdist(&x[i * d], &x[cand * d], d));
        if (potential < best_potential) {
          best_potential = potential;
          chosen = cand;
        }
      }
    }
    copy_point(chosen, c);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], sqdist(&x[i * d], &x[chosen * d], d));
  }
  return centroids;
}

// Lloyd iterations from the given centroids, with empty clusters re-seeded
// from the point farthest from its centroid. Each pass appends the
// post-assignment inertia to the trace; the run ends with a final assignment
// against the converged centroids.
void lloyd_from(const std::vector<double>& x, std::size_t n, std::size_t d, std::size_t k,
                std::size_t max_iterations, double tolerance, KmeansRun& run) {
  run.assignments.assign(n, 0);
  std::vector<double> d2(n);
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    assign_points(x, n, d, run.centroids, k, run.assignments, d2);
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += d2[i];  // fixed order
    run.inertia = inertia;
    run.inertia_trace.push_back(inertia);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = run.assignments[i];
      ++counts[c];
      const double* xi = &x[i * d];
      double* sc = &sums[c * d];
      for (std::size_t j = 0; j < d; ++j) sc[j] += xi[j];
    }

    std::vector<double> next(k * d);
    std::vector<bool> stolen(n, false);
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < d; ++j)
          next[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
        continue;
      }
      // Re-seed an empty cluster from the point farthest from its centroid.
      std::size_t far = 0;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (stolen[i]) continue;
        if (d2[i] > far_d2) {
          far_d2 = d2[i];
          far = i;
        }
      }
      stolen[far] = true;
      reseeded = true;
      std::copy_n(&x[far * d], d, &next[c * d]);
    }

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      movement = std::max(movement, std::sqrt(sqdist(&next[c * d], &run.centroids[c * d], d)));
    run.centroids = std::move(next);
    if (!reseeded && movement < tolerance) break;
  }

  assign_points(x, n, d, run.centroids, k, run.assignments, d2);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) inertia += d2[i];
  run.inertia = inertia;
  run.inertia_trace.push_back(inertia);
}

// 2-means on a member subset with deterministic farthest-pair initialization;
// used to propose a split of an overloaded cluster.
std::pair<std::vector<double>, std::vector<double>> bisect_members(
    const std::vector<double>& x, std::size_t d, const std::vector<std::size_t>& members) {
  std::vector<double> mean(d, 0.0);
  for (std::size_t i : members)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
  for (double& v : mean) v /= static_cast<double>(members.size());

  auto farthest_from = [&](const double* point) {
    std::size_t best = members[0];
    double best_d2 = -1.0;
    for (std::size_t i : members) {
      double dist = sqdist(&x[i * d], point, d);
      if (dist > best_d2) {
        best_d2 = dist;
        best = i;
      }
    }
    return best;
  };
  std::size_t a = farthest_from(mean.data());
  std::size_t b = farthest_from(&x[a * d]);

  std::vector<double> c0(&x[a * d], &x[a * d] + d);
  std::vector<double> c1(&x[b * d], &x[b * d] + d);
  for (int iter = 0; iter < 15; ++iter) {
    std::vector<double> s0(d, 0.0), s1(d, 0.0);
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i : members) {
      bool first = sqdist(&x[i * d], c0.data(), d) <= sqdist(&x[i * d], c1.data(), d);
      auto& s = first ? s0 : s1;
      (first ? n0 : n1) += 1;
      for (std::size_t j = 0; j < d; ++j) s[j] += x[i * d + j];
    }
    if (n0 == 0 || n1 == 0) break;
    bool moved = false;
    for (std::size_t j = 0; j < d; ++j) {
      double v0 = s0[j] / static_cast<double>(n0);
      double v1 = s1[j] / static_cast<double>(n1);
      moved = moved || v0 != c0[j] || v1 != c1[j];
      c0[j] = v0;
      c1[j] = v1;
    }
    if (!moved) break;
  }
  return {std::move(c0), std::move(c1)};
}

// Escapes merged/split local optima: bisect a high-variance cluster and hand
// one half to the centroid whose removal costs the least, keeping the move
// only when a capped Lloyd run improves inertia. Deterministic.
void refine_run(const std::vector<double>& x, std::size_t n, std::size_t d, std::size_t k,
                const AutoCohortConfig& config, KmeansRun& run) {
  if (k < 2 || config.refinement_rounds == 0) return;
  constexpr std::size_t kDonorCandidates = 3;
  constexpr std::size_t kTargetCandidates = 3;
  constexpr std::size_t kTrialIterations = 10;

  std::vector<double> d1(n), d2nd(n);
  std::vector<std::size_t> assign(n);
  for (std::size_t round = 0; round < config.refinement_rounds; ++round) {
    // Nearest and second-nearest centroid per point.
    detail::parallel_chunks(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double* xi = &x[i * d];
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t c = 0; c < k; ++c) {
          double dist = sqdist(xi, &run.centroids[c * d], d);
          if (dist < best) {
            second = best;
            best = dist;
            best_k = c;
          } else if (dist < second) {
            second = dist;
          }
        }
        assign[i] = best_k;
        d1[i] = best;
        d2nd[i] = second;
      }
    });

    std::vector<double> removal(k, 0.0);
    std::vector<double> spread(k, 0.0);
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < n; ++i) {
      removal[assign[i]] += d2nd[i] - d1[i];
      spread[assign[i]] += d1[i];
      members[assign[i]].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c)
      if (!members[c].empty()) spread[c] /= static_cast<double>(members[c].size());

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> donors = order;
    std::stable_sort(donors.begin(), donors.end(),
                     [&](std::size_t a, std::size_t b) { return removal[a] < removal[b]; });
    donors.resize(std::min(kDonorCandidates, donors.size()));
    std::vector<std::size_t> targets = order;
    std::stable_sort(targets.begin(), targets.end(),
                     [&](std::size_t a, std::size_t b) { return spread[a] > spread[b]; });
    targets.resize(std::min(kTargetCandidates, targets.size()));

    bool improved = false;
    for (std::size_t target : targets) {
      if (members[target].size() < 4) continue;
      auto [half_a, half_b] = bisect_members(x, d, members[target]);
      for (std::size_t donor : donors) {
        if (donor == target) continue;
        KmeansRun trial;
        trial.centroids = run.centroids;
        std::copy(half_a.begin(), half_a.end(), &trial.centroids[target * d]);
        std::copy(half_b.begin(), half_b.end(), &trial.centroids[donor * d]);
        lloyd_from(x, n, d, k, kTrialIterations, config.convergence_tolerance, trial);
        if (trial.inertia < run.inertia - 1e-9) {
          run.centroids = std::move(trial.centroids);
          run.assignments = std::move(trial.assignments);
          run.inertia = trial.inertia;
          run.inertia_trace.push_back(trial.inertia);
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
    if (!improved) return;
  }
}

}  // namespace

ClusterModel kmeans_fit(const std::vector<SpeakerProfile>& profiles,
                        const AutoCohortConfig& config) {
  const std::size_t n = profiles.size();
  const std::size_t k = config.k;
  if (k == 0) throw ValidationError("kmeans_fit: k must be >= 1");
  if (n == 0) throw ValidationError("kmeans_fit: no speaker profiles");
  if (n < k)
    throw InfeasibleError("kmeans_fit: " + std::to_string(n) + " profiles < k = " +
                          std::to_string(k));
  const std::size_t d = profiles[0].mean_embedding.size();
  if (d == 0) throw ValidationError("kmeans_fit: zero-dimension embeddings");
  for (const auto& p : profiles)
    if (p.mean_embedding.size() != d)
      throw ValidationError("kmeans_fit: embedding dimension mismatch for speaker '" +
                            p.speaker_id + "'");

  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(profiles[i].mean_embedding.begin(), profiles[i].mean_embedding.end(), &x[i * d]);
    if (config.metric == DistanceMetric::Cosine) {
      double norm_sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) norm_sq += x[i * d + j] * x[i * d + j];
      if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t j = 0; j < d; ++j) x[i * d + j] *= inv;
      }
    }
  }

  Rng master(config.seed);
  KmeansRun best;
  for (std::size_t r = 0; r < std::max<std::size_t>(config.n_init, 1); ++r) {
    Rng rng(master.next_u64());
    KmeansRun run;
    run.centroids = seed_centroids(x, n, d, k, config.seeding, rng);
    lloyd_from(x, n, d, k, config.max_iterations, config.convergence_tolerance, run);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  refine_run(x, n, d, k, config, best);
  // Polish to full convergence after refinement; the trace stays monotone
  // because the polish starts from the accepted state.
  {
    KmeansRun polish;
    polish.centroids = best.centroids;
    lloyd_from(x, n, d, k, config.max_iterations, config.convergence_tolerance, polish);
    polish.inertia_trace.insert(polish.inertia_trace.begin(), best.inertia_trace.begin(),
                                best.inertia_trace.end());
    best = std::move(polish);
  }

  ClusterModel model;
  model.config = config;
  model.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    model.centroids[c].assign(&best.centroids[c * d], &best.centroids[c * d] + d);
  model.assignments = best.assignments;
  model.inertia = best.inertia;
  model.inertia_trace = best.inertia_trace;
  model.speaker_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.speaker_ids.push_back(profiles[i].speaker_id);
    model.speaker_index.emplace(profiles[i].speaker_id, i);
  }

  model.cluster_speakers.assign(k, 0);
  model.cluster_utterances.assign(k, 0);
  std::vector<double> conf_sum(k, 0.0);
  std::vector<double> weight_sum(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = model.assignments[i];
    double w = config.weight_confidence_by_utterances
                   ? static_cast<double>(profiles[i].utterance_count)
                   : 1.0;
    ++model.cluster_speakers[c];
    model.cluster_utterances[c] += profiles[i].utterance_count;
    conf_sum[c] += w * profiles[i].mean_confidence;
    weight_sum[c] += w;
  }
  model.cluster_confidence.assign(k, 1.0);  // empty clusters rank as easiest
  for (std::size_t c = 0; c < k; ++c)
    if (weight_sum[c] > 0.0) model.cluster_confidence[c] = conf_sum[c] / weight_sum[c];
  return model;
}

std::vector<std::size_t> rank_clusters_by_confidence(const ClusterModel& model) {
  std::vector<std::size_t> order(model.k());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.cluster_confidence[a] < model.cluster_confidence[b];
  });
  return order;
}

std::vector<std::size_t> select_bottom_clusters(const std::vector<std::size_t>& ranked,
                                                double bottom_fraction) {
  if (ranked.empty()) throw ValidationError("select_bottom_clusters: empty ranking");
  if (!(bottom_fraction > 0.0 && bottom_fraction < 1.0))
    throw ValidationError("bottom_fraction must be in (0, 1)");
  auto count = static_cast<std::size_t>(bottom_fraction * static_cast<double>(ranked.size()));
  count = std::max<std::size_t>(1, count);
  return std::vector<std::size_t>(ranked.begin(), ranked.begin() + count);
}

CohortAssignments assign_cohort_auto(const Corpus& corpus, const ClusterModel& model,
                                     const std::set<std::size_t>& bottom_clusters,
                                     MissingSpeakerPolicy policy) {
  CohortAssignments out;
  out.source = CohortSource::Auto;
  out.labels.reserve(corpus.size());
  for (const auto& rec : corpus.records) {
    auto cluster = model.cluster_of(rec.speaker_id);
    if (!cluster) {
      if (policy == MissingSpeakerPolicy::Error)
        throw ValidationError("speaker '" + rec.speaker_id + "' is not covered by the cluster model");
      out.labels.push_back(std::nullopt);
      continue;
    }
    out.labels.push_back(bottom_clusters.count(*cluster) ? Cohort::Bottom : Cohort::Top);
  }
  return out;
}

namespace {

const char* to_string(SeedingMethod m) {
  switch (m) {
    case SeedingMethod::KMeansPlusPlusGreedy: return "kmeans++greedy";
    case SeedingMethod::KMeansPlusPlus: return "kmeans++";
    case SeedingMethod::RandomPoints: return "random";
  }
  return "?";
}

SeedingMethod seeding_from_string(const std::string& s) {
  if (s == "kmeans++greedy") return SeedingMethod::KMeansPlusPlusGreedy;
  if (s == "kmeans++") return SeedingMethod::KMeansPlusPlus;
  if (s == "random") return SeedingMethod::RandomPoints;
  throw ValidationError("unknown seeding method '" + s + "'");
}

}  // namespace

ordered_json cluster_model_to_json(const ClusterModel& model) {
  ordered_json j;
  j["config"] = {{"k", model.config.k},
                 {"bottom_fraction", model.config.bottom_fraction},
                 {"max_iterations", model.config.max_iterations},
                 {"convergence_tolerance", model.config.convergence_tolerance},
                 {"seed", model.config.seed},
                 {"n_init", model.config.n_init},
                 {"seeding", to_string(model.config.seeding)},
                 {"metric", model.config.metric == DistanceMetric::Cosine ? "cosine" : "euclidean"},
                 {"weight_confidence_by_utterances", model.config.weight_confidence_by_utterances}};
  j["centroids"] = model.centroids;
  j["speaker_ids"] = model.speaker_ids;
  j["assignments"] = model.assignments;
  j["cluster_confidence"] = model.cluster_confidence;
  j["cluster_speakers"] = model.cluster_speakers;
  j["cluster_utterances"] = model.cluster_utterances;
  j["inertia"] = model.inertia;
  return j;
}

ClusterModel cluster_model_from_json(const json& j) {
  ClusterModel model;
  try {
    const auto& c = j.at("config");
    model.config.k = c.at("k").get<std::size_t>();
    model.config.bottom_fraction = c.at("bottom_fraction").get<double>();
    model.config.max_iterations = c.at("max_iterations").get<std::size_t>();
    model.config.convergence_tolerance = c.at("convergence_tolerance").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.n_init = c.at("n_init").get<std::size_t>();
    model.config.seeding = seeding_from_string(c.at("seeding").get<std::string>());
    model.config.metric = c.at("metric").get<std::string>() == "cosine" ? DistanceMetric::Cosine
                                                                        : DistanceMetric::Euclidean;
    model.config.weight_confidence_by_utterances =
        c.at("weight_confidence_by_utterances").get<bool>();
    model.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    model.speaker_ids = j.at("speaker_ids").get<std::vector<std::string>>();
    model.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    model.cluster_confidence = j.at("cluster_confidence").get<std::vector<double>>();
    model.cluster_speakers = j.at("cluster_speakers").get<std::vector<std::size_t>>();
    model.cluster_utterances = j.at("cluster_utterances").get<std::vector<std::size_t>>();
    model.inertia = j.at("inertia").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad cluster model JSON: ") + e.what());
  }
  if (model.speaker_ids.size() != model.assignments.size())
    throw ValidationError("cluster model JSON: speaker_ids and assignments differ in length");
  for (std::size_t i = 0; i < model.speaker_ids.size(); ++i) {
    if (model.assignments[i] >= model.k())
      throw ValidationError("cluster model JSON: assignment out of range");
    model.speaker_index.emplace(model.speaker_ids[i], i);
  }
  return model;
}

}  // namespace cohort_audit
