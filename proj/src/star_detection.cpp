#include "lockstep/star_detection.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace lockstep {

namespace {

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string_view to_string(StarOrientation o) {
  return o == StarOrientation::DlrDom ? "dlr:dom" : "dom:dlr";
}

StarOrientation parse_orientation(std::string_view text) {
  if (text == "dlr:dom" || text == "dlrdom" || text == "DlrDom") return StarOrientation::DlrDom;
  if (text == "dom:dlr" || text == "domdlr" || text == "DomDlr") return StarOrientation::DomDlr;
  throw std::invalid_argument("unknown orientation: " + std::string(text));
}

void WindowConfig::validate() const {
  if (window_length <= 0) throw std::invalid_argument("window length must be positive");
  if (slide <= 0) throw std::invalid_argument("window slide must be positive");
  if (!(alpha_min > 0.5 && alpha_min <= 1.0)) {
    throw std::invalid_argument("alpha_min must lie in (0.5, 1.0]");
  }
  if (level_cut && *level_cut <= 0) throw std::invalid_argument("level cut must be positive");
  if (campaign_gap_n <= 0) throw std::invalid_argument("campaign gap n must be positive");
}

Timestamp schedule_origin(Timestamp first_event, const WindowConfig& cfg) {
  if (cfg.origin) return *cfg.origin;
  return floor_div(first_event, cfg.slide) * cfg.slide;
}

Window window_at(std::int64_t index, Timestamp origin, const WindowConfig& cfg) {
  const Timestamp start = origin + index * cfg.slide;
  return {index, start, start + cfg.window_length};
}

std::vector<Window> window_schedule(Timestamp first, Timestamp last, Timestamp origin,
                                    const WindowConfig& cfg) {
  std::vector<Window> out;
  if (last < first || last < origin) return out;
  // Smallest k with origin + k*δt + Δt > first.
  std::int64_t k_min = floor_div(first - origin - cfg.window_length, cfg.slide) + 1;
  k_min = std::max<std::int64_t>(k_min, 0);
  const std::int64_t k_max = floor_div(last - origin, cfg.slide);
  for (auto k = k_min; k <= k_max; ++k) out.push_back(window_at(k, origin, cfg));
  return out;
}

std::vector<Window> window_schedule(const EventBatch& batch, Timestamp origin,
                                    const WindowConfig& cfg) {
  if (batch.empty()) return {};
  return window_schedule(*batch.min_timestamp, *batch.max_timestamp, origin, cfg);
}

NodeId center_of(const DownloadEvent& e, StarOrientation o, SymbolTable& symbols) {
  return symbols.intern(o == StarOrientation::DlrDom ? e.domain : e.downloader);
}

NodeId leaf_of(const DownloadEvent& e, StarOrientation o, SymbolTable& symbols) {
  return symbols.intern(o == StarOrientation::DlrDom ? e.downloader : e.domain);
}

bool Star::contains_leaf(NodeId leaf) const {
  return std::find(leaves.begin(), leaves.end(), leaf) != leaves.end();
}

std::size_t StarTable::KeyHash::operator()(
    const std::pair<NodeId, std::vector<NodeId>>& k) const {
  std::size_t h = std::hash<NodeId>{}(k.first);
  for (auto v : k.second) h ^= std::hash<NodeId>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::optional<StarId> StarTable::find(NodeId center, const std::vector<NodeId>& leaves) const {
  auto it = index_.find({center, leaves});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StarId StarTable::insert(Star star) {
  const StarId id = stars_.size() + 1;
  star.star_id = id;
  auto [it, inserted] = index_.try_emplace({star.center, star.leaves}, id);
  if (!inserted) throw std::logic_error("duplicate star inserted into star table");
  for (auto leaf : star.leaves) by_leaf_[leaf].push_back(id);
  stars_.push_back(std::move(star));
  status_.push_back(StarStatus::Live);
  return id;
}

std::span<const StarId> StarTable::stars_with_leaf(NodeId leaf) const {
  auto it = by_leaf_.find(leaf);
  if (it == by_leaf_.end()) return {};
  return it->second;
}

std::vector<Star> detect_stars(std::span<const DownloadEvent* const> window_events,
                               const Window& window, StarTable& table) {
  struct Group {
    std::vector<NodeId> leaves;
    std::vector<EventId> events;
    Timestamp first = 0;
    Timestamp last = 0;
  };
  auto& symbols = table.symbols();
  const auto orientation = table.orientation();

  std::unordered_map<NodeId, Group> groups;
  std::unordered_set<std::uint64_t> seen_edges;
  for (const auto* e : window_events) {
    if (e->timestamp < window.start || e->timestamp >= window.end) {
      throw std::invalid_argument("event outside of the star detection window");
    }
    const NodeId center = center_of(*e, orientation, symbols);
    const NodeId leaf = leaf_of(*e, orientation, symbols);
    auto [it, fresh] = groups.try_emplace(center);
    auto& g = it->second;
    if (fresh) {
      g.first = g.last = e->timestamp;
    } else {
      g.first = std::min(g.first, e->timestamp);
      g.last = std::max(g.last, e->timestamp);
    }
    if (seen_edges.insert((std::uint64_t{center} << 32) | leaf).second) g.leaves.push_back(leaf);
    g.events.push_back(e->event_id);
  }

  std::vector<NodeId> centers;
  for (const auto& [center, g] : groups) {
    if (g.leaves.size() >= 2) centers.push_back(center);
  }
  std::sort(centers.begin(), centers.end(),
            [&](NodeId a, NodeId b) { return symbols.name(a) < symbols.name(b); });

  std::vector<Star> fresh_stars;
  for (auto center : centers) {
    auto& g = groups[center];
    std::sort(g.leaves.begin(), g.leaves.end(),
              [&](NodeId a, NodeId b) { return symbols.name(a) < symbols.name(b); });
    if (table.find(center, g.leaves)) continue;
    Star star;
    star.center = center;
    star.leaves = std::move(g.leaves);
    star.window_index = window.index;
    star.window_start = window.start;
    star.first_edge_time = g.first;
    star.last_edge_time = g.last;
    std::sort(g.events.begin(), g.events.end());
    star.event_ids = std::move(g.events);
    const auto id = table.insert(star);
    star.star_id = id;
    fresh_stars.push_back(std::move(star));
  }
  return fresh_stars;
}

}  // namespace lockstep
