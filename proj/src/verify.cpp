#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "lockstep/lockstep_detection.hpp"

namespace lockstep {

namespace {

VerifyResult fail(std::string violation, std::string detail) {
  return {false, std::move(violation), std::move(detail)};
}

const std::string& center_name(const DownloadEvent& e, StarOrientation o) {
  return o == StarOrientation::DlrDom ? e.domain : e.downloader;
}

const std::string& leaf_name(const DownloadEvent& e, StarOrientation o) {
  return o == StarOrientation::DlrDom ? e.downloader : e.domain;
}

}  // namespace

VerifyResult verify_lockstep(const Lockstep& ls, const StarTable& stars, const EventTable& events,
                             const WindowConfig& cfg) {
  if (ls.star_ids.empty()) return fail("provenance", "no stars");
  for (auto id : ls.star_ids) {
    if (!stars.contains(id)) return fail("provenance", "unknown star " + std::to_string(id));
  }

  if (ls.downloaders.size() < 3 || ls.domains.size() < 3) {
    return fail("eq3", std::to_string(ls.downloaders.size()) + " downloaders, " +
                           std::to_string(ls.domains.size()) + " domains");
  }

  const auto o = ls.orientation;
  const auto& items = o == StarOrientation::DlrDom ? ls.downloaders : ls.domains;
  const auto& bases = o == StarOrientation::DlrDom ? ls.domains : ls.downloaders;
  const std::set<std::string> item_set(items.begin(), items.end());

  std::set<std::pair<std::string, std::string>> edges;  // (item, base)
  std::set<std::string> star_bases;
  std::vector<Timestamp> last_times;
  for (auto id : ls.star_ids) {
    const auto& star = stars.at(id);
    const auto& base = stars.symbols().name(star.center);
    const auto tag = "star " + std::to_string(id);
    star_bases.insert(base);

    std::set<std::string> leaves;
    Timestamp first = 0;
    Timestamp last = 0;
    bool any = false;
    for (auto eid : star.event_ids) {
      const auto* e = events.find(eid);
      if (e == nullptr) return fail("eq5", tag + ": missing event " + std::to_string(eid));
      if (center_name(*e, o) != base) return fail("eq5", tag + ": event center mismatch");
      if (e->timestamp < star.window_start || e->timestamp >= star.window_start + cfg.window_length) {
        return fail("eq5", tag + ": event outside its window");
      }
      leaves.insert(leaf_name(*e, o));
      first = any ? std::min(first, e->timestamp) : e->timestamp;
      last = any ? std::max(last, e->timestamp) : e->timestamp;
      any = true;
    }
    std::set<std::string> recorded;
    for (auto leaf : star.leaves) recorded.insert(stars.symbols().name(leaf));
    if (!any || leaves != recorded || leaves.size() < 2) {
      return fail("eq5", tag + ": leaves do not match its events");
    }
    for (const auto& leaf : leaves) {
      if (item_set.contains(leaf)) edges.emplace(leaf, base);
    }

    if (last - first >= cfg.window_length) return fail("eq6", tag + ": edges span a full window");
    if (last != star.last_edge_time || first != star.first_edge_time) {
      return fail("eq7", tag + ": recorded edge times differ from its events");
    }
    last_times.push_back(last);
  }
  if (star_bases != std::set<std::string>(bases.begin(), bases.end())) {
    return fail("eq5", "center side differs from the stars' centers");
  }

  const auto [lo, hi] = std::minmax_element(last_times.begin(), last_times.end());
  if (*hi - *lo < cfg.slide) return fail("eq8", "stars closer than the slide");

  std::set<std::string> covered_items;
  std::set<std::string> covered_bases;
  for (const auto& [item, base] : edges) {
    covered_items.insert(item);
    covered_bases.insert(base);
  }
  if (covered_items.size() != items.size()) return fail("eq4", "a leaf-side node has no edge");
  if (covered_bases.size() != bases.size()) return fail("eq4", "a center has no edge");

  const double density = static_cast<double>(edges.size()) /
                         (static_cast<double>(items.size()) * static_cast<double>(bases.size()));
  if (std::abs(density - ls.alpha) > 1e-12) {
    return fail("alpha", "recorded " + std::to_string(ls.alpha) + ", recomputed " +
                             std::to_string(density));
  }
  if (density + 1e-12 < cfg.alpha_min) {
    return fail("alpha", "density " + std::to_string(density) + " below alpha_min");
  }
  return {};
}

}  // namespace lockstep
