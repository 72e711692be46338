#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lockstep/event_model.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

struct OracleBiclique {
  std::vector<std::string> downloaders;  // sorted
  std::vector<std::string> domains;      // sorted

  auto operator<=>(const OracleBiclique&) const = default;
};

struct OracleResult {
  std::vector<OracleBiclique> maximal_bicliques;  // sorted
};

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive reference: cuts the events into the same windows as the
// pipeline, forms one star per (center, leaf set) at its first occurrence,
// and enumerates every leaf subset of size >= 3 with its full set of
// supporting centers. A result needs >= 3 centers and two supporting stars
// whose last edges are at least δt apart; only maximal results are kept.
// Throws InstanceTooLarge when either side exceeds `max_nodes_per_side`.
OracleResult enumerate_locksteps_bruteforce(std::span<const DownloadEvent> events,
                                            const WindowConfig& cfg,
                                            StarOrientation orientation = StarOrientation::DlrDom,
                                            std::size_t max_nodes_per_side = 16);

// True when `inner` is contained in `outer` on both sides.
bool contained_in(const OracleBiclique& inner, const std::vector<std::string>& downloaders,
                  const std::vector<std::string>& domains);

}  // namespace lockstep
