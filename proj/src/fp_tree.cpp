#include "lockstep/fp_tree.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

namespace lockstep {

namespace {

std::uint64_t child_key(FPTree::Index parent, NodeId item) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(parent)) << 32) | item;
}

}  // namespace

FPTree::FPTree() { nodes_.emplace_back(); }

FPTree::Index FPTree::child(Index parent, NodeId item) const {
  auto it = child_index_.find(child_key(parent, item));
  return it == child_index_.end() ? kNone : it->second;
}

FPTree::Index FPTree::add_child(Index parent, NodeId item) {
  const auto idx = static_cast<Index>(nodes_.size());
  Node n;
  n.item = item;
  n.parent = parent;
  n.depth = nodes_[static_cast<std::size_t>(parent)].depth + 1;
  nodes_.push_back(std::move(n));
  nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
  child_index_.emplace(child_key(parent, item), idx);
  ++versions_[item];
  return idx;
}

std::vector<NodeId> FPTree::path_items(Index n) const {
  std::vector<NodeId> items;
  for (Index cur = n; cur != kRoot; cur = node(cur).parent) items.push_back(node(cur).item);
  std::reverse(items.begin(), items.end());
  return items;
}

std::size_t FPTree::version_count(NodeId item) const {
  auto it = versions_.find(item);
  return it == versions_.end() ? 0 : it->second;
}

std::vector<NodeId> FPTree::multi_version_items(const NameOrder& order) const {
  std::vector<NodeId> out;
  for (const auto& [item, count] : versions_) {
    if (count > 1) out.push_back(item);
  }
  std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) { return order.less(a, b); });
  return out;
}

void FPTree::dump(std::ostream& out, const SymbolTable& symbols) const {
  std::function<void(Index, int)> walk = [&](Index i, int indent) {
    const auto& n = node(i);
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ')
        << (i == kRoot ? std::string("ROOT") : symbols.name(n.item));
    if (i != kRoot) {
      out << " [";
      for (std::size_t k = 0; k < n.visited.size(); ++k) {
        if (k) out << ' ';
        out << '(' << n.visited[k].star_id << ')' << symbols.name(n.visited[k].base);
      }
      out << ']';
    }
    out << '\n';
    for (auto c : n.children) walk(c, indent + 1);
  };
  walk(kRoot, 0);
}

FPTree build_fp_tree(const SortedAdjacency& snapshot, std::optional<int> level_cut) {
  FPTree tree;
  tree.level_cut_ = level_cut;
  for (const auto& row : snapshot.rows) {
    FPTree::Index cur = FPTree::kRoot;
    for (std::size_t pos = 0; pos < row.neighbors.size(); ++pos) {
      if (level_cut && static_cast<int>(pos) >= *level_cut) {
        tree.truncated_ += row.neighbors.size() - pos;
        break;
      }
      const NodeId item = row.neighbors[pos];
      auto next = tree.child(cur, item);
      if (next == FPTree::kNone) next = tree.add_child(cur, item);
      tree.nodes_[static_cast<std::size_t>(next)].visited.push_back(row.center);
      ++tree.inserted_;
      cur = next;
    }
  }
  return tree;
}

}  // namespace lockstep
