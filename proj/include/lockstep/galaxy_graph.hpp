#pragma once

#include <compare>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "lockstep/star_detection.hpp"
#include "lockstep/symbols.hpp"

namespace lockstep {

// A center node tagged with the star that created it, e.g. "(2) dom_B".
struct VersionedCenter {
  NodeId base = 0;
  StarId star_id = 0;

  auto operator<=>(const VersionedCenter&) const = default;
};

// Bipartite graph of leaf nodes and star-versioned centers. Every center
// holds exactly the leaves of its star. Among versions that share a base,
// no neighbor set contains another.
class GalaxyGraph {
 public:
  struct UpdateReport {
    std::vector<StarId> added;
    std::vector<StarId> replaced;   // versions removed because a superset arrived
    std::vector<StarId> discarded;  // new stars contained in an existing version
  };

  UpdateReport update(std::span<const Star> new_stars);
  UpdateReport update(std::span<const StarId> new_stars, const StarTable& table);

  std::size_t center_count() const { return centers_.size(); }
  std::size_t leaf_count() const { return leaf_adj_.size(); }
  std::size_t edge_count() const { return edges_; }

  bool has_center(StarId id) const { return centers_.contains(id); }
  NodeId base_of(StarId id) const { return centers_.at(id).base; }
  // Sorted by node id.
  const std::vector<NodeId>& neighbors(StarId id) const { return centers_.at(id).neighbors; }
  bool has_edge(NodeId leaf, StarId center) const;
  std::size_t leaf_degree(NodeId leaf) const;
  // Live centers adjacent to `leaf`, unordered.
  std::span<const StarId> centers_of(NodeId leaf) const;

  std::vector<VersionedCenter> centers() const;  // ascending star id
  std::vector<StarId> versions_of(NodeId base) const;

  // Line-delimited "leaf<TAB>base<TAB>star_id" records, ordered by star id.
  void dump_edges(std::ostream& out, const SymbolTable& symbols) const;

 private:
  struct CenterEntry {
    NodeId base = 0;
    std::vector<NodeId> neighbors;
  };

  void add_star(const Star& star, UpdateReport& report);
  void remove_center(StarId id);

  std::unordered_map<StarId, CenterEntry> centers_;
  std::unordered_map<NodeId, std::vector<StarId>> by_base_;
  std::unordered_map<NodeId, std::vector<StarId>> leaf_adj_;
  std::size_t edges_ = 0;
};

struct SortedAdjacency {
  struct Row {
    VersionedCenter center;
    std::vector<NodeId> neighbors;
  };
  std::vector<Row> rows;
};

// Centers by degree descending (ties: base name, then star id), each
// neighbor list by leaf degree descending (ties: leaf name).
SortedAdjacency adjacency_snapshot(const GalaxyGraph& graph, const NameOrder& order);
SortedAdjacency adjacency_snapshot(const GalaxyGraph& graph, const SymbolTable& symbols);

}  // namespace lockstep
