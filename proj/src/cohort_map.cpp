#include "cohort_audit/cohort_map.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cohort_audit/error.hpp"

namespace cohort_audit {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json CohortMapFile::definition() const {
  ordered_json def;
  def["source"] = to_string(source);
  if (source == CohortSource::Geo && geo) {
    def["attribute"] = geo->attribute;
    def["threshold"] = geo->threshold;
    def["bottom_zip_count"] = geo->bottom_zips.size();
    def["top_zip_count"] = geo->top_zips.size();
  } else if (source == CohortSource::Auto && model) {
    def["k"] = model->config.k;
    def["bottom_fraction"] = model->config.bottom_fraction;
    def["seed"] = model->config.seed;
    def["metric"] = model->config.metric == DistanceMetric::Cosine ? "cosine" : "euclidean";
    def["bottom_clusters"] = bottom_clusters;
  }
  return def;
}

ordered_json cohort_map_to_json(const CohortMapFile& map) {
  ordered_json j;
  j["type"] = to_string(map.source);
  if (map.source == CohortSource::Geo) {
    if (!map.geo) throw ValidationError("geo cohort map has no ZIP split");
    j["attribute"] = map.geo->attribute;
    j["threshold"] = map.geo->threshold;
    j["bottom_zips"] = std::vector<std::string>(map.geo->bottom_zips.begin(),
                                                map.geo->bottom_zips.end());
    j["top_zips"] = std::vector<std::string>(map.geo->top_zips.begin(), map.geo->top_zips.end());
  } else {
    if (!map.model) throw ValidationError("auto cohort map has no cluster model");
    j["model"] = cluster_model_to_json(*map.model);
    j["bottom_clusters"] = map.bottom_clusters;
  }
  return j;
}

CohortMapFile cohort_map_from_json(const json& j) {
  CohortMapFile map;
  std::string type;
  try {
    type = j.at("type").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad cohort map JSON: ") + e.what());
  }
  if (type == "geo") {
    map.source = CohortSource::Geo;
    GeoCohortMap geo;
    try {
      geo.attribute = j.at("attribute").get<std::string>();
      geo.threshold = j.at("threshold").get<double>();
      auto bottom = j.at("bottom_zips").get<std::vector<std::string>>();
      auto top = j.at("top_zips").get<std::vector<std::string>>();
      geo.bottom_zips.insert(bottom.begin(), bottom.end());
      geo.top_zips.insert(top.begin(), top.end());
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad geo cohort map JSON: ") + e.what());
    }
    map.geo = std::move(geo);
  } else if (type == "auto") {
    map.source = CohortSource::Auto;
    try {
      map.model = cluster_model_from_json(j.at("model"));
      map.bottom_clusters = j.at("bottom_clusters").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad auto cohort map JSON: ") + e.what());
    }
    for (std::size_t c : map.bottom_clusters)
      if (c >= map.model->k())
        throw ValidationError("cohort map JSON: bottom cluster index out of range");
  } else {
    throw ValidationError("cohort map JSON: unknown type '" + type + "'");
  }
  return map;
}

void save_cohort_map(const CohortMapFile& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write cohort map: " + path);
  out << cohort_map_to_json(map).dump(2) << '\n';
}

CohortMapFile load_cohort_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open cohort map: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  return cohort_map_from_json(j);
}

CohortAssignments assign_from_map(const Corpus& corpus, const CohortMapFile& map,
                                  MissingSpeakerPolicy policy) {
  if (map.source == CohortSource::Geo) {
    if (!map.geo) throw ValidationError("geo cohort map has no ZIP split");
    return assign_utterances_geo(corpus, *map.geo);
  }
  if (!map.model) throw ValidationError("auto cohort map has no cluster model");
  std::set<std::size_t> bottom(map.bottom_clusters.begin(), map.bottom_clusters.end());
  return assign_cohort_auto(corpus, *map.model, bottom, policy);
}

}  // namespace cohort_audit
