#include "lockstep/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>

namespace lockstep {

namespace {

struct RawStar {
  std::size_t center;
  std::uint32_t leaves;  // bitmask over leaf indices
  Timestamp last;
};

}  // namespace

bool contained_in(const OracleBiclique& inner, const std::vector<std::string>& downloaders,
                  const std::vector<std::string>& domains) {
  return std::includes(downloaders.begin(), downloaders.end(), inner.downloaders.begin(),
                       inner.downloaders.end()) &&
         std::includes(domains.begin(), domains.end(), inner.domains.begin(),
                       inner.domains.end());
}

OracleResult enumerate_locksteps_bruteforce(std::span<const DownloadEvent> events,
                                            const WindowConfig& cfg, StarOrientation orientation,
                                            std::size_t max_nodes_per_side) {
  OracleResult result;
  if (events.empty()) return result;
  const bool dlr_dom = orientation == StarOrientation::DlrDom;
  auto center_name = [&](const DownloadEvent& e) { return dlr_dom ? e.domain : e.downloader; };
  auto leaf_name = [&](const DownloadEvent& e) { return dlr_dom ? e.downloader : e.domain; };

  std::set<std::string> leaf_set;
  std::set<std::string> center_set;
  Timestamp first = events.front().timestamp;
  Timestamp last = first;
  for (const auto& e : events) {
    leaf_set.insert(leaf_name(e));
    center_set.insert(center_name(e));
    first = std::min(first, e.timestamp);
    last = std::max(last, e.timestamp);
  }
  if (leaf_set.size() > max_nodes_per_side || center_set.size() > max_nodes_per_side ||
      max_nodes_per_side > 31) {
    throw InstanceTooLarge("oracle instance has " + std::to_string(leaf_set.size()) + " x " +
                           std::to_string(center_set.size()) + " nodes");
  }
  const std::vector<std::string> leaves(leaf_set.begin(), leaf_set.end());
  const std::vector<std::string> centers(center_set.begin(), center_set.end());
  auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
  };

  // Stars per window, first occurrence of each (center, leaf set) only.
  std::vector<RawStar> stars;
  std::set<std::pair<std::size_t, std::uint32_t>> seen;
  const auto origin = schedule_origin(first, cfg);
  for (const auto& w : window_schedule(first, last, origin, cfg)) {
    std::map<std::size_t, std::pair<std::uint32_t, Timestamp>> groups;
    for (const auto& e : events) {
      if (e.timestamp < w.start || e.timestamp >= w.end) continue;
      auto& g = groups[index_of(centers, center_name(e))];
      g.first |= std::uint32_t{1} << index_of(leaves, leaf_name(e));
      g.second = std::max(g.second, e.timestamp);
    }
    for (const auto& [c, g] : groups) {
      if (std::popcount(g.first) < 2) continue;
      if (!seen.emplace(c, g.first).second) continue;
      stars.push_back({c, g.first, g.second});
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> valid;  // (leaf mask, center mask)
  const std::uint32_t full = (std::uint32_t{1} << leaves.size()) - 1;
  for (std::uint32_t u = 1; u <= full && u != 0; ++u) {
    if (std::popcount(u) < 3) continue;
    std::uint32_t cmask = 0;
    Timestamp lo = 0;
    Timestamp hi = 0;
    bool any = false;
    for (const auto& s : stars) {
      if ((s.leaves & u) != u) continue;
      cmask |= std::uint32_t{1} << s.center;
      lo = any ? std::min(lo, s.last) : s.last;
      hi = any ? std::max(hi, s.last) : s.last;
      any = true;
    }
    if (std::popcount(cmask) < 3 || hi - lo < cfg.slide) continue;
    valid.emplace_back(u, cmask);
  }

  for (const auto& [u, c] : valid) {
    bool maximal = true;
    for (const auto& [u2, c2] : valid) {
      if ((u2 & u) == u && (c2 & c) == c && (u2 != u || c2 != c)) {
        maximal = false;
        break;
      }
    }
    if (!maximal) continue;
    std::vector<std::string> ls;
    std::vector<std::string> cs;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (u & (std::uint32_t{1} << i)) ls.push_back(leaves[i]);
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (c & (std::uint32_t{1} << i)) cs.push_back(centers[i]);
    }
    OracleBiclique b;
    b.downloaders = dlr_dom ? ls : cs;
    b.domains = dlr_dom ? cs : ls;
    result.maximal_bicliques.push_back(std::move(b));
  }
  std::sort(result.maximal_bicliques.begin(), result.maximal_bicliques.end());
  return result;
}

}  // namespace lockstep
