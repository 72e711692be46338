#include "lockstep/symbols.hpp"

#include <algorithm>
#include <numeric>

namespace lockstep {

NodeId SymbolTable::intern(std::string_view name) {
  auto [it, inserted] =
      index_.try_emplace(std::string(name), static_cast<NodeId>(names_.size()));
  if (inserted) names_.emplace_back(name);
  return it->second;
}

std::optional<NodeId> SymbolTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NameOrder::NameOrder(const SymbolTable& symbols) : rank_(symbols.size()) {
  std::vector<NodeId> ids(symbols.size());
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
    return symbols.name(a) < symbols.name(b);
  });
  for (std::uint32_t r = 0; r < ids.size(); ++r) rank_[ids[r]] = r;
}

}  // namespace lockstep
