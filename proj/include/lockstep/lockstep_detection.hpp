#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lockstep/event_model.hpp"
#include "lockstep/fp_tree.hpp"
#include "lockstep/galaxy_graph.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

enum class LockstepOrigin { Main, Supplement };

std::string_view to_string(LockstepOrigin o);

struct Lockstep {
  std::uint64_t lockstep_id = 0;
  StarOrientation orientation = StarOrientation::DlrDom;
  std::vector<std::string> downloaders;  // sorted
  std::vector<std::string> domains;      // sorted, star ids stripped
  std::vector<StarId> star_ids;          // ascending
  double alpha = 1.0;
  int fp_level = 0;        // depth of the originating tree node
  int fp_level_delta = 0;  // leaf-side nodes added by near-biclique expansion
  Timestamp detected_at = 0;
  LockstepOrigin origin = LockstepOrigin::Main;
};

// Identity of a lockstep across passes and batches.
using LockstepKey = std::pair<std::vector<std::string>, std::vector<std::string>>;
inline LockstepKey key_of(const Lockstep& ls) { return {ls.downloaders, ls.domains}; }

struct NearBiclique {
  std::vector<NodeId> items;              // leaf side
  std::vector<VersionedCenter> centers;
  double alpha = 1.0;
};

// Grows the (path, visited) biclique at `node` with ancestor-visited centers
// (penalty: hops to the first ancestor with a larger visited list) and child
// items (penalty: centers they miss), cheapest first, while the edge density
// stays at or above `alpha_min`.
NearBiclique near_biclique_expand(const FPTree& tree, FPTree::Index node,
                                  const GalaxyGraph& graph, const NameOrder& order,
                                  double alpha_min);

// Edge density of items x distinct center bases, counting (item, base) as
// present when any selected version of the base is adjacent to the item.
double biclique_density(const std::vector<NodeId>& items,
                        const std::vector<VersionedCenter>& centers, const GalaxyGraph& graph);

enum class CandidateOutcome {
  Emitted,
  TooSmall,          // fewer than 3 on either side
  SameVisitedChild,  // a child carries the same visited list
  Temporal,          // no two stars at least δt apart
  Duplicate,         // same (downloaders, domains) already emitted
  Subsumed,          // strict subset of another lockstep with the same stars
};

std::string_view to_string(CandidateOutcome o);

// Per tree node record kept for debugging and golden tests.
struct CandidateRecord {
  LockstepOrigin origin = LockstepOrigin::Main;
  std::optional<NodeId> supplement_item;
  FPTree::Index node = FPTree::kRoot;
  std::vector<NodeId> path_items;
  std::vector<VersionedCenter> visited;
  NearBiclique expanded;
  CandidateOutcome outcome = CandidateOutcome::Emitted;
};

struct DetectionOptions {
  bool supplement = true;
  unsigned supplement_parallelism = 1;
  bool record_candidates = false;
};

struct DetectionStats {
  double main_seconds = 0;
  double supplement_seconds = 0;  // wall time of the whole supplementation phase
  double supplement_subpass_total_seconds = 0;
  double supplement_subpass_max_seconds = 0;
  double near_biclique_seconds = 0;
  std::size_t multi_version_items = 0;
  std::size_t tree_nodes = 0;
};

struct DetectionResult {
  std::vector<Lockstep> locksteps;
  std::vector<CandidateRecord> candidates;
  DetectionStats stats;
};

// Breadth-first main pass over `tree`. Lockstep ids are left at 0.
DetectionResult extract_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                  const StarTable& stars, const NameOrder& order,
                                  const WindowConfig& cfg, const DetectionOptions& opts = {});

// One non-recursive pass per multi-version item over a galaxy graph built
// from only the stars containing that item. Results already present in
// `known` (by key) are dropped; merge order is by item name.
DetectionResult supplement_missing(const FPTree& tree, const StarTable& stars,
                                   const NameOrder& order, const WindowConfig& cfg,
                                   const std::vector<Lockstep>& known,
                                   const DetectionOptions& opts = {});

// Main pass plus supplementation, subset pruning and id assignment (1..n).
DetectionResult detect_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                 const StarTable& stars, const WindowConfig& cfg,
                                 const DetectionOptions& opts = {});
DetectionResult detect_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                 const StarTable& stars, const NameOrder& order,
                                 const WindowConfig& cfg, const DetectionOptions& opts = {});

struct VerifyResult {
  bool ok = true;
  std::string violation;  // "provenance", "eq3", ..., "alpha"; empty when ok
  std::string detail;

  explicit operator bool() const { return ok; }
};

// Re-derives the lockstep from the raw events behind its stars and checks
// size, coverage, edge existence, per-star time spread, star separation
// and density. Reports the first violated constraint.
VerifyResult verify_lockstep(const Lockstep& ls, const StarTable& stars, const EventTable& events,
                             const WindowConfig& cfg);

}  // namespace lockstep
