#include "lockstep/records.hpp"

#include <stdexcept>

#include "json.hpp"

namespace lockstep {

using Json = nlohmann::ordered_json;

std::string_view to_string(StarStatus s) {
  switch (s) {
    case StarStatus::Live: return "live";
    case StarStatus::Replaced: return "replaced";
    case StarStatus::Discarded: return "discarded";
  }
  return "live";
}

namespace {

Json names(const std::vector<NodeId>& ids, const SymbolTable& symbols) {
  Json out = Json::array();
  for (auto id : ids) out.push_back(symbols.name(id));
  return out;
}

Json versioned(const std::vector<VersionedCenter>& centers, const SymbolTable& symbols) {
  Json out = Json::array();
  for (const auto& c : centers) {
    out.push_back(Json{{"star_id", c.star_id}, {"base", symbols.name(c.base)}});
  }
  return out;
}

}  // namespace

std::string star_to_json(const Star& star, const StarTable& table) {
  const auto& symbols = table.symbols();
  Json j;
  j["star_id"] = star.star_id;
  j["orientation"] = to_string(table.orientation());
  j["center"] = symbols.name(star.center);
  j["leaves"] = names(star.leaves, symbols);
  j["window_index"] = star.window_index;
  j["window_start"] = star.window_start;
  j["first_edge_time"] = star.first_edge_time;
  j["last_edge_time"] = star.last_edge_time;
  j["event_ids"] = star.event_ids;
  j["status"] = to_string(table.status(star.star_id));
  return j.dump();
}

std::string star_status_to_json(StarId id, StarStatus status, std::size_t batch) {
  Json j;
  j["star_id"] = id;
  j["status"] = to_string(status);
  j["batch"] = batch;
  return j.dump();
}

std::string lockstep_to_json(const Lockstep& ls) {
  Json j;
  j["lockstep_id"] = ls.lockstep_id;
  j["orientation"] = to_string(ls.orientation);
  j["downloaders"] = ls.downloaders;
  j["domains"] = ls.domains;
  j["star_ids"] = ls.star_ids;
  j["alpha"] = ls.alpha;
  j["fp_level"] = ls.fp_level;
  j["fp_level_delta"] = ls.fp_level_delta;
  j["detected_at"] = ls.detected_at;
  j["origin"] = to_string(ls.origin);
  return j.dump();
}

Lockstep lockstep_from_json(std::string_view line) {
  try {
    const auto j = Json::parse(line);
    Lockstep ls;
    ls.lockstep_id = j.at("lockstep_id").get<std::uint64_t>();
    ls.orientation = parse_orientation(j.at("orientation").get<std::string>());
    ls.downloaders = j.at("downloaders").get<std::vector<std::string>>();
    ls.domains = j.at("domains").get<std::vector<std::string>>();
    ls.star_ids = j.at("star_ids").get<std::vector<StarId>>();
    ls.alpha = j.at("alpha").get<double>();
    ls.fp_level = j.at("fp_level").get<int>();
    ls.fp_level_delta = j.at("fp_level_delta").get<int>();
    ls.detected_at = j.at("detected_at").get<Timestamp>();
    const auto origin = j.at("origin").get<std::string>();
    if (origin == "main") {
      ls.origin = LockstepOrigin::Main;
    } else if (origin == "supplement") {
      ls.origin = LockstepOrigin::Supplement;
    } else {
      throw std::invalid_argument("unknown origin '" + origin + "'");
    }
    return ls;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("bad lockstep record: ") + e.what());
  }
}

std::string report_to_json(const LockstepReport& report) {
  Json j;
  j["lockstep_id"] = report.lockstep_id;
  j["label"] = to_string(report.label);
  j["rep_pub"] = report.rep_pub;
  Json labels = Json::object();
  for (const auto& [dlr, label] : report.downloader_labels) labels[dlr] = to_string(label);
  j["downloader_labels"] = std::move(labels);
  Json campaigns = Json::array();
  for (const auto& c : report.campaigns) {
    Json cj;
    cj["campaign_id"] = c.campaign_id;
    cj["window_indices"] = c.window_indices;
    cj["start_time"] = c.start_time;
    cj["end_time"] = c.end_time;
    campaigns.push_back(std::move(cj));
  }
  j["campaigns"] = std::move(campaigns);
  return j.dump();
}

std::string candidate_to_json(const CandidateRecord& rec, const SymbolTable& symbols) {
  Json j;
  j["origin"] = to_string(rec.origin);
  j["supplement_item"] =
      rec.supplement_item ? Json(symbols.name(*rec.supplement_item)) : Json(nullptr);
  j["node"] = rec.node;
  j["path"] = names(rec.path_items, symbols);
  j["visited"] = versioned(rec.visited, symbols);
  j["expanded_items"] = names(rec.expanded.items, symbols);
  j["expanded_centers"] = versioned(rec.expanded.centers, symbols);
  j["alpha"] = rec.expanded.alpha;
  j["outcome"] = to_string(rec.outcome);
  return j.dump();
}

}  // namespace lockstep
