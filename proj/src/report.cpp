#include "cohort_audit/report.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "cohort_audit/error.hpp"
#include "cohort_audit/rng.hpp"
#include "cohort_audit/text_norm.hpp"

namespace cohort_audit {

using nlohmann::ordered_json;

std::optional<std::string> resolve_reference_text(const UtteranceRecord& rec) {
  if (rec.adjudicated_reference) return *rec.adjudicated_reference;
  if (rec.blind_passes.size() == 3 &&
      categorize_agreement(rec.blind_passes) != AgreementCategory::AllDisagree)
    return adjudicate(rec.blind_passes, std::nullopt);
  return std::nullopt;
}

std::string config_hash_hex(const ordered_json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

namespace {

ordered_json filter_to_json(const CorpusFilterConfig& f) {
  ordered_json j;
  j["confidence_trim_fraction"] = f.confidence_trim_fraction;
  j["drop_wakeword_only"] = f.drop_wakeword_only;
  if (f.date_range)
    j["date_range"] = {f.date_range->first.to_string(), f.date_range->second.to_string()};
  else
    j["date_range"] = nullptr;
  return j;
}

struct CohortScan {
  CohortSize size;
  double conf_sum = 0.0;
  std::vector<const UtteranceRecord*> records;
};

ordered_json size_to_json(const CohortSize& s) {
  return ordered_json{{"utterances", s.utterances}, {"speakers", s.speakers}, {"hours", s.hours}};
}

}  // namespace

ordered_json build_audit_report(const Corpus& corpus, const CohortMapFile& map,
                                const CohortAssignments& assignments) {
  if (assignments.labels.size() != corpus.size())
    throw ValidationError("build_audit_report: assignments do not match corpus");
  if (corpus.empty()) throw ValidationError("build_audit_report: empty corpus");

  CohortScan top, bottom;
  std::unordered_set<std::string> top_speakers, bottom_speakers;
  std::size_t unassigned = 0;
  double overall_conf_sum = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus.records[i];
    overall_conf_sum += rec.confidence;
    const auto& label = assignments.labels[i];
    if (!label) {
      ++unassigned;
      continue;
    }
    CohortScan& scan = *label == Cohort::Top ? top : bottom;
    auto& speakers = *label == Cohort::Top ? top_speakers : bottom_speakers;
    ++scan.size.utterances;
    scan.size.hours += rec.duration_s / 3600.0;
    scan.conf_sum += rec.confidence;
    speakers.insert(rec.speaker_id);
    scan.records.push_back(&rec);
  }
  top.size.speakers = top_speakers.size();
  bottom.size.speakers = bottom_speakers.size();

  ordered_json report;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

  auto filters = ordered_json::array();
  for (const auto& f : corpus.applied_filters) filters.push_back(filter_to_json(f));

  ordered_json config;
  config["tool_version"] = kToolVersion;
  config["cohorts"] = map.definition();
  config["filters_applied"] = filters;
  report["config_hash"] = config_hash_hex(config);

  report["corpus"] = {{"utterances", corpus.size()},
                      {"speakers", corpus.speaker_count()},
                      {"hours", corpus.total_hours()},
                      {"embedding_dim", corpus.embedding_dim},
                      {"filters_applied", filters}};

  report["cohorts"] = {{"source", to_string(map.source)},
                       {"definition", map.definition()},
                       {"sizes",
                        {{"top", size_to_json(top.size)},
                         {"bottom", size_to_json(bottom.size)},
                         {"unassigned_utterances", unassigned}}}};

  // Confidence disparity. Overall mean covers the whole corpus, matching the
  // convention of reporting cohorts against the dataset baseline.
  const double overall_mean = overall_conf_sum / static_cast<double>(corpus.size());
  ordered_json conf;
  conf["overall_mean"] = overall_mean;
  conf["top_mean"] =
      top.size.utterances ? ordered_json(top.conf_sum / static_cast<double>(top.size.utterances))
                          : ordered_json(nullptr);
  conf["bottom_mean"] = bottom.size.utterances
                            ? ordered_json(bottom.conf_sum /
                                           static_cast<double>(bottom.size.utterances))
                            : ordered_json(nullptr);
  conf["top_relative"] = nullptr;
  conf["bottom_relative"] = nullptr;
  if (overall_mean > 0.0) {
    if (top.size.utterances)
      conf["top_relative"] = confidence_disparity(
          top.conf_sum / static_cast<double>(top.size.utterances), overall_mean);
    if (bottom.size.utterances)
      conf["bottom_relative"] = confidence_disparity(
          bottom.conf_sum / static_cast<double>(bottom.size.utterances), overall_mean);
  }
  report["confidence"] = std::move(conf);

  // Pooled WER per cohort against resolved references.
  ordered_json wer_section;
  WerAccumulator top_acc, bottom_acc;
  std::size_t top_unresolved = 0, bottom_unresolved = 0;
  for (const CohortScan* scan : {&top, &bottom}) {
    for (const UtteranceRecord* rec : scan->records) {
      auto ref = resolve_reference_text(*rec);
      if (!ref) {
        ++(scan == &top ? top_unresolved : bottom_unresolved);
        continue;
      }
      (scan == &top ? top_acc : bottom_acc)
          .add(normalize_text(*ref), normalize_text(rec->hypothesis));
    }
  }
  auto wer_block = [](const WerAccumulator& acc, std::size_t unresolved) {
    WerSummary s = acc.summary();
    return ordered_json{{"wer", s.wer},
                        {"errors", s.total_errors},
                        {"reference_words", s.total_reference_words},
                        {"utterances_scored", acc.utterances()},
                        {"utterances_without_reference", unresolved}};
  };
  bool top_has_words = false, bottom_has_words = false;
  try {
    top_has_words = top_acc.summary().total_reference_words > 0;
  } catch (const ValidationError&) {
  }
  try {
    bottom_has_words = bottom_acc.summary().total_reference_words > 0;
  } catch (const ValidationError&) {
  }
  if (top_has_words && bottom_has_words) {
    wer_section["available"] = true;
    wer_section["top"] = wer_block(top_acc, top_unresolved);
    wer_section["bottom"] = wer_block(bottom_acc, bottom_unresolved);
    double wer_top = top_acc.summary().wer;
    double wer_bottom = bottom_acc.summary().wer;
    wer_section["wer_gap"] =
        wer_top > 0.0 ? ordered_json(wer_gap(wer_bottom, wer_top)) : ordered_json(nullptr);
  } else {
    wer_section["available"] = false;
    wer_section["reason"] = "no resolvable references in one or both cohorts";
  }
  report["wer"] = std::move(wer_section);

  // Agreement categories and PDR. The section degrades to unavailable when a
  // cohort is empty or any member lacks blind passes.
  ordered_json agreement;
  std::size_t top_missing = 0, bottom_missing = 0;
  for (const UtteranceRecord* rec : top.records)
    if (rec->blind_passes.size() != 3) ++top_missing;
  for (const UtteranceRecord* rec : bottom.records)
    if (rec->blind_passes.size() != 3) ++bottom_missing;
  if (top.records.empty() || bottom.records.empty()) {
    agreement["available"] = false;
    agreement["reason"] = "empty cohort";
  } else if (top_missing + bottom_missing > 0) {
    agreement["available"] = false;
    agreement["reason"] = "utterances lack blind passes";
    agreement["missing"] = {{"top", top_missing}, {"bottom", bottom_missing}};
  } else {
    AgreementStats top_stats = agreement_stats(top.records);
    AgreementStats bottom_stats = agreement_stats(bottom.records);
    auto stats_block = [](const AgreementStats& s) {
      return ordered_json{{"rate_111", s.rate_111},
                          {"rate_21", s.rate_21},
                          {"rate_30", s.rate_30},
                          {"n_utterances", s.n_utterances}};
    };
    agreement["available"] = true;
    agreement["top"] = stats_block(top_stats);
    agreement["bottom"] = stats_block(bottom_stats);
    ordered_json pdr_block;
    for (auto [name, scheme] :
         {std::pair{"minority", PdrWeightScheme::Minority},
          std::pair{"pairwise", PdrWeightScheme::Pairwise}}) {
      double pdr_top = pdr(top_stats, scheme);
      double pdr_bottom = pdr(bottom_stats, scheme);
      pdr_block[name] = {{"top", pdr_top},
                         {"bottom", pdr_bottom},
                         {"relative_increase_bottom",
                          pdr_top > 0.0 ? ordered_json(relative_pdr_increase(pdr_top, pdr_bottom))
                                        : ordered_json(nullptr)}};
    }
    agreement["pdr"] = std::move(pdr_block);
    agreement["rate_111_relative_increase"] =
        top_stats.rate_111 > 0.0
            ? ordered_json(bottom_stats.rate_111 / top_stats.rate_111 - 1.0)
            : ordered_json(nullptr);
  }
  report["agreement"] = std::move(agreement);

  report["mitigation_artifacts"] = ordered_json::array();
  return report;
}

namespace {

std::string pct(const ordered_json& value) {
  if (value.is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value.get<double>() * 100.0);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write CSV: " + path);
  return out;
}

}  // namespace

void write_csv_tables(const ordered_json& report, const std::string& prefix) {
  const auto& sizes = report.at("cohorts").at("sizes");
  const auto& conf = report.at("confidence");
  {
    auto out = open_csv(prefix + "confidence_disparity.csv");
    out << "cohort,utterances,hours,conf_relative_pct\n";
    out << "overall," << report.at("corpus").at("utterances").get<std::size_t>() << ','
        << report.at("corpus").at("hours").get<double>() << ",baseline\n";
    out << "bottom," << sizes.at("bottom").at("utterances").get<std::size_t>() << ','
        << sizes.at("bottom").at("hours").get<double>() << ',' << pct(conf.at("bottom_relative"))
        << '\n';
  }
  {
    auto out = open_csv(prefix + "wer_gap.csv");
    out << "discovery,wer_gap_pct,bottom_share_pct\n";
    const auto& wer = report.at("wer");
    std::string gap = "n/a";
    if (wer.at("available").get<bool>() && !wer.at("wer_gap").is_null())
      gap = pct(wer.at("wer_gap"));
    double top_n = sizes.at("top").at("utterances").get<double>();
    double bottom_n = sizes.at("bottom").at("utterances").get<double>();
    std::string share = "n/a";
    if (top_n + bottom_n > 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * bottom_n / (top_n + bottom_n));
      share = buf;
    }
    out << report.at("cohorts").at("source").get<std::string>() << ',' << gap << ',' << share
        << '\n';
  }
  {
    auto out = open_csv(prefix + "agreement.csv");
    out << "cohort,rate_111_pct,rate_21_pct,rate_30_pct,pdr_pct,rel_pdr_increase_pct\n";
    const auto& agreement = report.at("agreement");
    if (agreement.at("available").get<bool>()) {
      const auto& pdr_min = agreement.at("pdr").at("minority");
      out << "top," << pct(agreement.at("top").at("rate_111")) << ','
          << pct(agreement.at("top").at("rate_21")) << ','
          << pct(agreement.at("top").at("rate_30")) << ',' << pct(pdr_min.at("top")) << ",-\n";
      out << "bottom," << pct(agreement.at("bottom").at("rate_111")) << ','
          << pct(agreement.at("bottom").at("rate_21")) << ','
          << pct(agreement.at("bottom").at("rate_30")) << ',' << pct(pdr_min.at("bottom")) << ','
          << pct(pdr_min.at("relative_increase_bottom")) << '\n';
    } else {
      out << "unavailable,,,,,\n";
    }
  }
}

}  // namespace cohort_audit
