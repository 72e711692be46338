#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lockstep {

using Timestamp = std::int64_t;  // seconds since epoch
using EventId = std::uint64_t;
using StarId = std::uint64_t;
using NodeId = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

// Interns node names (downloader hashes, domains) to dense ids. Ids are
// assigned in first-seen order; they carry no ordering meaning. Use
// NameOrder when a lexicographic tie-break is required.
class SymbolTable {
 public:
  NodeId intern(std::string_view name);
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name(NodeId id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

// Lexicographic rank of every symbol known at construction time.
class NameOrder {
 public:
  explicit NameOrder(const SymbolTable& symbols);

  std::uint32_t rank(NodeId id) const { return rank_[id]; }
  bool less(NodeId a, NodeId b) const { return rank_[a] < rank_[b]; }
  std::size_t size() const { return rank_.size(); }

 private:
  std::vector<std::uint32_t> rank_;
};

}  // namespace lockstep
