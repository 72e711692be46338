#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lockstep/galaxy_graph.hpp"

namespace lockstep {

// Prefix tree over the sorted neighbor lists of a galaxy graph snapshot.
// The path ROOT -> n spells a leaf-side item sequence; n.visited lists the
// centers whose sorted neighbor list begins with that sequence.
class FPTree {
 public:
  using Index = std::int32_t;
  static constexpr Index kRoot = 0;
  static constexpr Index kNone = -1;

  struct Node {
    NodeId item = 0;  // meaningless for the root
    Index parent = kNone;
    std::int32_t depth = 0;
    std::vector<Index> children;  // insertion order
    std::vector<VersionedCenter> visited;
  };

  FPTree();

  const Node& node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }  // includes the root
  Index child(Index parent, NodeId item) const;
  std::vector<NodeId> path_items(Index n) const;  // root-side first

  // Number of tree nodes (distinct root paths) carrying `item`; 0 if absent.
  std::size_t version_count(NodeId item) const;
  // Items with more than one version, ordered by name.
  std::vector<NodeId> multi_version_items(const NameOrder& order) const;

  std::optional<int> level_cut() const { return level_cut_; }
  // Adjacency entries not inserted because they lay beyond the level cut.
  std::size_t truncated_entries() const { return truncated_; }
  std::size_t inserted_entries() const { return inserted_; }

  // Indented "item [visited...]" lines, children in insertion order.
  void dump(std::ostream& out, const SymbolTable& symbols) const;

 private:
  friend FPTree build_fp_tree(const SortedAdjacency&, std::optional<int>);

  Index add_child(Index parent, NodeId item);

  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, Index> child_index_;
  std::unordered_map<NodeId, std::uint32_t> versions_;
  std::optional<int> level_cut_;
  std::size_t truncated_ = 0;
  std::size_t inserted_ = 0;
};

FPTree build_fp_tree(const SortedAdjacency& snapshot, std::optional<int> level_cut);

}  // namespace lockstep
