#include "lockstep/galaxy_graph.hpp"

#include <algorithm>
#include <ostream>

namespace lockstep {

bool GalaxyGraph::has_edge(NodeId leaf, StarId center) const {
  auto it = centers_.find(center);
  if (it == centers_.end()) return false;
  const auto& n = it->second.neighbors;
  return std::binary_search(n.begin(), n.end(), leaf);
}

std::size_t GalaxyGraph::leaf_degree(NodeId leaf) const {
  auto it = leaf_adj_.find(leaf);
  return it == leaf_adj_.end() ? 0 : it->second.size();
}

std::span<const StarId> GalaxyGraph::centers_of(NodeId leaf) const {
  auto it = leaf_adj_.find(leaf);
  if (it == leaf_adj_.end()) return {};
  return it->second;
}

std::vector<VersionedCenter> GalaxyGraph::centers() const {
  std::vector<VersionedCenter> out;
  out.reserve(centers_.size());
  for (const auto& [id, entry] : centers_) out.push_back({entry.base, id});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.star_id < b.star_id; });
  return out;
}

std::vector<StarId> GalaxyGraph::versions_of(NodeId base) const {
  auto it = by_base_.find(base);
  if (it == by_base_.end()) return {};
  auto out = it->second;
  std::sort(out.begin(), out.end());
  return out;
}

void GalaxyGraph::remove_center(StarId id) {
  auto it = centers_.find(id);
  for (auto leaf : it->second.neighbors) {
    auto adj = leaf_adj_.find(leaf);
    std::erase(adj->second, id);
    if (adj->second.empty()) leaf_adj_.erase(adj);
  }
  edges_ -= it->second.neighbors.size();
  auto& versions = by_base_[it->second.base];
  std::erase(versions, id);
  if (versions.empty()) by_base_.erase(it->second.base);
  centers_.erase(it);
}

void GalaxyGraph::add_star(const Star& star, UpdateReport& report) {
  std::vector<NodeId> leaves = star.leaves;
  std::sort(leaves.begin(), leaves.end());

  // The containment test runs before any removal: a star that fits inside
  // an existing version is dropped even if it also covers another one.
  std::vector<StarId> subsumed;
  if (auto it = by_base_.find(star.center); it != by_base_.end()) {
    for (auto version : it->second) {
      const auto& existing = centers_.at(version).neighbors;
      if (std::includes(existing.begin(), existing.end(), leaves.begin(), leaves.end())) {
        report.discarded.push_back(star.star_id);
        return;
      }
      if (std::includes(leaves.begin(), leaves.end(), existing.begin(), existing.end())) {
        subsumed.push_back(version);
      }
    }
  }
  std::sort(subsumed.begin(), subsumed.end());
  for (auto version : subsumed) {
    remove_center(version);
    report.replaced.push_back(version);
  }
  for (auto leaf : leaves) leaf_adj_[leaf].push_back(star.star_id);
  edges_ += leaves.size();
  by_base_[star.center].push_back(star.star_id);
  centers_.emplace(star.star_id, CenterEntry{star.center, std::move(leaves)});
  report.added.push_back(star.star_id);
}

GalaxyGraph::UpdateReport GalaxyGraph::update(std::span<const Star> new_stars) {
  UpdateReport report;
  for (const auto& star : new_stars) add_star(star, report);
  return report;
}

GalaxyGraph::UpdateReport GalaxyGraph::update(std::span<const StarId> new_stars,
                                              const StarTable& table) {
  UpdateReport report;
  for (auto id : new_stars) add_star(table.at(id), report);
  return report;
}

void GalaxyGraph::dump_edges(std::ostream& out, const SymbolTable& symbols) const {
  for (const auto& c : centers()) {
    std::vector<NodeId> leaves = centers_.at(c.star_id).neighbors;
    std::sort(leaves.begin(), leaves.end(),
              [&](NodeId a, NodeId b) { return symbols.name(a) < symbols.name(b); });
    for (auto leaf : leaves) {
      out << symbols.name(leaf) << '\t' << symbols.name(c.base) << '\t' << c.star_id << '\n';
    }
  }
}

SortedAdjacency adjacency_snapshot(const GalaxyGraph& graph, const NameOrder& order) {
  SortedAdjacency snap;
  auto centers = graph.centers();
  snap.rows.reserve(centers.size());
  for (const auto& c : centers) snap.rows.push_back({c, graph.neighbors(c.star_id)});

  std::sort(snap.rows.begin(), snap.rows.end(), [&](const auto& a, const auto& b) {
    if (a.neighbors.size() != b.neighbors.size()) return a.neighbors.size() > b.neighbors.size();
    if (a.center.base != b.center.base) return order.less(a.center.base, b.center.base);
    return a.center.star_id < b.center.star_id;
  });

  // Packed (degree descending, name ascending) key per leaf.
  std::vector<std::pair<std::uint64_t, NodeId>> keyed;
  for (auto& row : snap.rows) {
    keyed.clear();
    for (auto leaf : row.neighbors) {
      const auto degree = static_cast<std::uint32_t>(graph.leaf_degree(leaf));
      keyed.emplace_back((std::uint64_t{0xffffffffu - degree} << 32) | order.rank(leaf), leaf);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < keyed.size(); ++i) row.neighbors[i] = keyed[i].second;
  }
  return snap;
}

SortedAdjacency adjacency_snapshot(const GalaxyGraph& graph, const SymbolTable& symbols) {
  return adjacency_snapshot(graph, NameOrder(symbols));
}

}  // namespace lockstep
