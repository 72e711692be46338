#include "lockstep/lockstep_detection.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <exception>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace lockstep {

std::string_view to_string(LockstepOrigin o) {
  return o == LockstepOrigin::Main ? "main" : "supplement";
}

std::string_view to_string(CandidateOutcome o) {
  switch (o) {
    case CandidateOutcome::Emitted: return "emitted";
    case CandidateOutcome::TooSmall: return "too_small";
    case CandidateOutcome::SameVisitedChild: return "same_visited_child";
    case CandidateOutcome::Temporal: return "temporal";
    case CandidateOutcome::Duplicate: return "duplicate";
    case CandidateOutcome::Subsumed: return "subsumed";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Present (item, base) pairs of a growing item x center selection.
class DensityCounter {
 public:
  explicit DensityCounter(const GalaxyGraph& graph) : graph_(graph) {}

  std::size_t items() const { return items_.size(); }
  std::size_t bases() const { return base_versions_.size(); }
  std::size_t present() const { return present_; }

  double alpha() const { return alpha_with(0, 0, 0); }

  double alpha_with(std::size_t gain, std::size_t extra_items, std::size_t extra_bases) const {
    const double cells = static_cast<double>(items_.size() + extra_items) *
                         static_cast<double>(base_versions_.size() + extra_bases);
    return cells == 0 ? 0.0 : static_cast<double>(present_ + gain) / cells;
  }

  bool has_base(NodeId base) const { return base_versions_.contains(base); }
  bool has_item(NodeId item) const { return item_set_.contains(item); }
  bool has_center(StarId id) const { return selected_.contains(id); }

  std::size_t item_gain(NodeId item) const { return hit_bases(item).size(); }

  void add_item(NodeId item) {
    if (!item_set_.insert(item).second) return;
    items_.push_back(item);
    for (auto base : hit_bases(item)) {
      covered_[base].insert(item);
      ++present_;
    }
  }

  std::size_t center_gain(const VersionedCenter& c) const {
    std::size_t gain = 0;
    for_each_new_item(c, [&](NodeId) { ++gain; });
    return gain;
  }

  void add_center(const VersionedCenter& c) {
    if (!selected_.insert(c.star_id).second) return;
    std::vector<NodeId> fresh;
    for_each_new_item(c, [&](NodeId item) { fresh.push_back(item); });
    auto& cov = covered_[c.base];
    for (auto item : fresh) cov.insert(item);
    present_ += fresh.size();
    base_versions_[c.base].push_back(c.star_id);
  }

 private:
  std::vector<NodeId> hit_bases(NodeId item) const {
    std::vector<NodeId> bases;
    const auto adj = graph_.centers_of(item);
    if (adj.size() <= selected_.size()) {
      for (auto id : adj) {
        if (selected_.contains(id)) bases.push_back(graph_.base_of(id));
      }
      std::sort(bases.begin(), bases.end());
      bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
    } else {
      for (const auto& [base, versions] : base_versions_) {
        for (auto id : versions) {
          if (graph_.has_edge(item, id)) {
            bases.push_back(base);
            break;
          }
        }
      }
    }
    return bases;
  }

  template <typename F>
  void for_each_new_item(const VersionedCenter& c, F&& f) const {
    const std::unordered_set<NodeId>* cov = nullptr;
    if (auto it = covered_.find(c.base); it != covered_.end()) cov = &it->second;
    auto fresh = [&](NodeId item) { return cov == nullptr || !cov->contains(item); };
    const auto& nbrs = graph_.neighbors(c.star_id);
    if (nbrs.size() < items_.size()) {
      for (auto item : nbrs) {
        if (item_set_.contains(item) && fresh(item)) f(item);
      }
    } else {
      for (auto item : items_) {
        if (fresh(item) && std::binary_search(nbrs.begin(), nbrs.end(), item)) f(item);
      }
    }
  }

  const GalaxyGraph& graph_;
  std::vector<NodeId> items_;
  std::unordered_set<NodeId> item_set_;
  std::unordered_set<StarId> selected_;
  std::unordered_map<NodeId, std::vector<StarId>> base_versions_;
  std::unordered_map<NodeId, std::unordered_set<NodeId>> covered_;
  std::size_t present_ = 0;
};

std::vector<NodeId> distinct_bases(const std::vector<VersionedCenter>& centers) {
  std::vector<NodeId> bases;
  bases.reserve(centers.size());
  for (const auto& c : centers) bases.push_back(c.base);
  std::sort(bases.begin(), bases.end());
  bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
  return bases;
}

bool temporally_separated(const std::vector<VersionedCenter>& centers, const StarTable& stars,
                          const WindowConfig& cfg) {
  if (centers.empty()) return false;
  Timestamp lo = stars.at(centers.front().star_id).last_edge_time;
  Timestamp hi = lo;
  for (const auto& c : centers) {
    const auto t = stars.at(c.star_id).last_edge_time;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return hi - lo >= cfg.slide;
}

Timestamp detection_time(const std::vector<VersionedCenter>& centers, const StarTable& stars) {
  std::vector<std::pair<Timestamp, StarId>> order;
  order.reserve(centers.size());
  for (const auto& c : centers) order.emplace_back(stars.at(c.star_id).window_start, c.star_id);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  return order.size() >= 2 ? order[1].first : order.front().first;
}

std::vector<std::string> sorted_names(const std::vector<NodeId>& ids, const SymbolTable& symbols) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(symbols.name(id));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Lockstep make_lockstep(const NearBiclique& nb, const std::vector<NodeId>& bases,
                       const FPTree::Node& node, std::size_t path_len, const StarTable& stars,
                       LockstepOrigin origin) {
  Lockstep ls;
  ls.orientation = stars.orientation();
  auto items = sorted_names(nb.items, stars.symbols());
  auto centers = sorted_names(bases, stars.symbols());
  if (ls.orientation == StarOrientation::DlrDom) {
    ls.downloaders = std::move(items);
    ls.domains = std::move(centers);
  } else {
    ls.downloaders = std::move(centers);
    ls.domains = std::move(items);
  }
  for (const auto& c : nb.centers) ls.star_ids.push_back(c.star_id);
  std::sort(ls.star_ids.begin(), ls.star_ids.end());
  ls.alpha = nb.alpha;
  ls.fp_level = node.depth;
  ls.fp_level_delta = static_cast<int>(nb.items.size() - path_len);
  ls.detected_at = detection_time(nb.centers, stars);
  ls.origin = origin;
  return ls;
}

// False when no expansion of the node can reach 3 x 3 or the temporal
// spread; such nodes would be rejected as TooSmall or Temporal.
bool may_qualify(const FPTree& tree, FPTree::Index idx, const StarTable& stars,
                 const WindowConfig& cfg, bool expand) {
  const auto& node = tree.node(idx);
  const std::size_t max_items =
      static_cast<std::size_t>(node.depth) + (expand ? node.children.size() : 0);
  if (max_items < 3) return false;
  const std::vector<VersionedCenter>* wider = nullptr;
  if (expand) {
    for (auto p = node.parent; p != FPTree::kRoot && p != FPTree::kNone; p = tree.node(p).parent) {
      if (tree.node(p).visited.size() > node.visited.size()) {
        wider = &tree.node(p).visited;
        break;
      }
    }
  }
  const auto& pool = wider != nullptr ? *wider : node.visited;
  if (pool.size() < 3) return false;
  Timestamp lo = stars.at(pool.front().star_id).last_edge_time;
  Timestamp hi = lo;
  for (const auto& c : pool) {
    const auto t = stars.at(c.star_id).last_edge_time;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return hi - lo >= cfg.slide;
}

struct PassResult {
  std::vector<Lockstep> locksteps;
  std::vector<std::ptrdiff_t> record_of;  // candidate index per lockstep, -1 if not recorded
  std::vector<CandidateRecord> candidates;
  double near_biclique_seconds = 0;
};

PassResult run_pass(const FPTree& tree, const GalaxyGraph& graph, const StarTable& stars,
                    const NameOrder& order, const WindowConfig& cfg, LockstepOrigin origin,
                    std::optional<NodeId> supplement_item, bool record) {
  PassResult out;
  std::set<std::pair<std::vector<NodeId>, std::vector<NodeId>>> seen;
  const bool expand = cfg.alpha_min < 1.0;

  std::deque<FPTree::Index> queue;
  for (auto c : tree.node(FPTree::kRoot).children) queue.push_back(c);
  while (!queue.empty()) {
    const auto idx = queue.front();
    queue.pop_front();
    const auto& node = tree.node(idx);
    for (auto c : node.children) queue.push_back(c);

    bool same_child = false;
    for (auto c : node.children) {
      if (tree.node(c).visited.size() == node.visited.size()) {
        same_child = true;
        break;
      }
    }
    if (!record && (same_child || !may_qualify(tree, idx, stars, cfg, expand))) continue;

    const auto path = tree.path_items(idx);
    NearBiclique nb;
    CandidateOutcome outcome = CandidateOutcome::Emitted;
    std::vector<NodeId> bases;
    if (same_child) {
      nb = {path, node.visited, 1.0};
      outcome = CandidateOutcome::SameVisitedChild;
    } else {
      if (expand) {
        const auto t0 = Clock::now();
        nb = near_biclique_expand(tree, idx, graph, order, cfg.alpha_min);
        out.near_biclique_seconds += seconds_since(t0);
      } else {
        nb = {path, node.visited, 1.0};
      }
      bases = distinct_bases(nb.centers);
      if (nb.items.size() < 3 || bases.size() < 3) {
        outcome = CandidateOutcome::TooSmall;
      } else if (!temporally_separated(nb.centers, stars, cfg)) {
        outcome = CandidateOutcome::Temporal;
      } else {
        auto items = nb.items;
        std::sort(items.begin(), items.end());
        if (!seen.emplace(std::move(items), bases).second) outcome = CandidateOutcome::Duplicate;
      }
    }

    if (outcome == CandidateOutcome::Emitted) {
      out.locksteps.push_back(make_lockstep(nb, bases, node, path.size(), stars, origin));
      out.record_of.push_back(record ? static_cast<std::ptrdiff_t>(out.candidates.size()) : -1);
    }
    if (record) {
      CandidateRecord rec;
      rec.origin = origin;
      rec.supplement_item = supplement_item;
      rec.node = idx;
      rec.path_items = path;
      rec.visited = node.visited;
      rec.expanded = std::move(nb);
      rec.outcome = outcome;
      out.candidates.push_back(std::move(rec));
    }
  }
  return out;
}

void append_candidates(DetectionResult& into, PassResult& pass,
                       std::vector<std::ptrdiff_t>& record_of) {
  const auto offset = static_cast<std::ptrdiff_t>(into.candidates.size());
  for (auto& r : pass.record_of) {
    if (r >= 0) r += offset;
  }
  for (auto& c : pass.candidates) into.candidates.push_back(std::move(c));
  record_of.insert(record_of.end(), pass.record_of.begin(), pass.record_of.end());
}

void mark(DetectionResult& result, std::ptrdiff_t record, CandidateOutcome outcome) {
  if (record >= 0) result.candidates[static_cast<std::size_t>(record)].outcome = outcome;
}

// Removes locksteps that are a strict subset of another lockstep built on
// exactly the same stars.
void prune_subsets(DetectionResult& result, std::vector<std::ptrdiff_t>& record_of) {
  std::map<std::vector<StarId>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < result.locksteps.size(); ++i) {
    groups[result.locksteps[i].star_ids].push_back(i);
  }
  auto includes = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::includes(a.begin(), a.end(), b.begin(), b.end());
  };
  std::vector<bool> drop(result.locksteps.size(), false);
  for (const auto& [stars, members] : groups) {
    if (members.size() < 2) continue;
    for (auto i : members) {
      const auto& a = result.locksteps[i];
      for (auto j : members) {
        if (i == j) continue;
        const auto& b = result.locksteps[j];
        if (includes(b.downloaders, a.downloaders) && includes(b.domains, a.domains) &&
            key_of(a) != key_of(b)) {
          drop[i] = true;
          break;
        }
      }
    }
  }
  std::vector<Lockstep> kept;
  std::vector<std::ptrdiff_t> kept_records;
  for (std::size_t i = 0; i < result.locksteps.size(); ++i) {
    if (drop[i]) {
      mark(result, record_of[i], CandidateOutcome::Subsumed);
      continue;
    }
    kept.push_back(std::move(result.locksteps[i]));
    kept_records.push_back(record_of[i]);
  }
  result.locksteps = std::move(kept);
  record_of = std::move(kept_records);
}

// Every supplement result is built from live versions of these stars, so
// fewer than 3 live bases or a short spread of their last edges rules the
// item out.
bool supplement_may_qualify(NodeId item, std::span<const StarId> ids, const StarTable& stars,
                            const WindowConfig& cfg) {
  std::vector<NodeId> bases;
  std::vector<NodeId> others;
  Timestamp lo = 0;
  Timestamp hi = 0;
  bool any = false;
  for (auto id : ids) {
    if (stars.status(id) != StarStatus::Live) continue;
    const auto& s = stars.at(id);
    bases.push_back(s.center);
    for (auto leaf : s.leaves) {
      if (leaf != item) others.push_back(leaf);
    }
    lo = any ? std::min(lo, s.last_edge_time) : s.last_edge_time;
    hi = any ? std::max(hi, s.last_edge_time) : s.last_edge_time;
    any = true;
  }
  std::sort(bases.begin(), bases.end());
  bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
  if (bases.size() < 3 || hi - lo < cfg.slide) return false;
  // Above 5/9 density a 3x3 candidate needs a second item sharing two stars
  // with this one.
  if (9 * cfg.alpha_min <= 5) return true;
  std::sort(others.begin(), others.end());
  return std::adjacent_find(others.begin(), others.end()) != others.end();
}

DetectionResult supplement_impl(const FPTree& tree, const StarTable& stars,
                                const NameOrder& order, const WindowConfig& cfg,
                                const std::vector<Lockstep>& known, const DetectionOptions& opts,
                                std::vector<std::ptrdiff_t>& record_of) {
  const auto t0 = Clock::now();
  DetectionResult result;
  const auto items = tree.multi_version_items(order);
  result.stats.multi_version_items = items.size();

  struct Slot {
    PassResult pass;
    double seconds = 0;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(items.size());

  auto work = [&](std::size_t i) {
    const auto s0 = Clock::now();
    try {
      const auto ids = stars.stars_with_leaf(items[i]);
      if (!opts.record_candidates && !supplement_may_qualify(items[i], ids, stars, cfg)) {
        slots[i].seconds = seconds_since(s0);
        return;
      }
      GalaxyGraph sub;
      sub.update(ids, stars);
      auto subtree = build_fp_tree(adjacency_snapshot(sub, order), tree.level_cut());
      slots[i].pass = run_pass(subtree, sub, stars, order, cfg, LockstepOrigin::Supplement,
                               items[i], opts.record_candidates);
    } catch (...) {
      slots[i].error = std::current_exception();
    }
    slots[i].seconds = seconds_since(s0);
  };

  const auto workers = std::min<std::size_t>(std::max(1u, opts.supplement_parallelism),
                                             items.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < items.size(); i = next++) work(i);
      });
    }
  }

  std::set<LockstepKey> keys;
  for (const auto& ls : known) keys.insert(key_of(ls));
  for (auto& slot : slots) {
    if (slot.error) std::rethrow_exception(slot.error);
    result.stats.supplement_subpass_total_seconds += slot.seconds;
    result.stats.supplement_subpass_max_seconds =
        std::max(result.stats.supplement_subpass_max_seconds, slot.seconds);
    result.stats.near_biclique_seconds += slot.pass.near_biclique_seconds;

    std::vector<std::ptrdiff_t> slot_records;
    append_candidates(result, slot.pass, slot_records);
    for (std::size_t k = 0; k < slot.pass.locksteps.size(); ++k) {
      auto& ls = slot.pass.locksteps[k];
      if (!keys.insert(key_of(ls)).second) {
        mark(result, slot_records[k], CandidateOutcome::Duplicate);
        continue;
      }
      result.locksteps.push_back(std::move(ls));
      record_of.push_back(slot_records[k]);
    }
  }
  result.stats.supplement_seconds = seconds_since(t0);
  return result;
}

}  // namespace

double biclique_density(const std::vector<NodeId>& items,
                        const std::vector<VersionedCenter>& centers, const GalaxyGraph& graph) {
  DensityCounter counter(graph);
  for (const auto& c : centers) counter.add_center(c);
  for (auto item : items) counter.add_item(item);
  return counter.alpha();
}

NearBiclique near_biclique_expand(const FPTree& tree, FPTree::Index node,
                                  const GalaxyGraph& graph, const NameOrder& order,
                                  double alpha_min) {
  if (node == FPTree::kRoot) throw std::invalid_argument("near_biclique_expand: root node");
  const auto& a = tree.node(node);

  NearBiclique nb;
  nb.items = tree.path_items(node);
  nb.centers = a.visited;

  DensityCounter counter(graph);
  for (const auto& c : nb.centers) counter.add_center(c);
  for (auto item : nb.items) counter.add_item(item);

  struct Candidate {
    std::size_t penalty;
    std::uint32_t rank;
    bool is_center;
    NodeId item;
    VersionedCenter center;
  };
  std::vector<Candidate> candidates;

  // Centers of the nearest ancestor whose visited list is larger.
  std::size_t hops = 1;
  for (auto p = a.parent; p != FPTree::kRoot && p != FPTree::kNone;
       p = tree.node(p).parent, ++hops) {
    const auto& anc = tree.node(p);
    if (anc.visited.size() <= a.visited.size()) continue;
    for (const auto& c : anc.visited) {
      if (counter.has_center(c.star_id)) continue;
      candidates.push_back({hops, order.rank(c.base), true, 0, c});
    }
    break;
  }
  for (auto ci : a.children) {
    const auto& child = tree.node(ci);
    candidates.push_back(
        {a.visited.size() - child.visited.size(), order.rank(child.item), false, child.item, {}});
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    if (x.penalty != y.penalty) return x.penalty < y.penalty;
    if (x.rank != y.rank) return x.rank < y.rank;
    if (x.is_center != y.is_center) return !x.is_center;
    return x.center.star_id < y.center.star_id;
  });

  for (const auto& cand : candidates) {
    if (cand.is_center) {
      const bool new_base = !counter.has_base(cand.center.base);
      const double next = counter.alpha_with(counter.center_gain(cand.center), 0, new_base ? 1 : 0);
      if (next < alpha_min) break;
      counter.add_center(cand.center);
      nb.centers.push_back(cand.center);
    } else {
      if (counter.has_item(cand.item)) continue;
      const double next = counter.alpha_with(counter.item_gain(cand.item), 1, 0);
      if (next < alpha_min) break;
      counter.add_item(cand.item);
      nb.items.push_back(cand.item);
    }
  }
  std::sort(nb.centers.begin(), nb.centers.end(),
            [](const auto& x, const auto& y) { return x.star_id < y.star_id; });
  nb.alpha = counter.alpha();
  return nb;
}

DetectionResult extract_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                  const StarTable& stars, const NameOrder& order,
                                  const WindowConfig& cfg, const DetectionOptions& opts) {
  const auto t0 = Clock::now();
  auto pass = run_pass(tree, graph, stars, order, cfg, LockstepOrigin::Main, std::nullopt,
                       opts.record_candidates);
  DetectionResult result;
  result.locksteps = std::move(pass.locksteps);
  result.candidates = std::move(pass.candidates);
  result.stats.near_biclique_seconds = pass.near_biclique_seconds;
  result.stats.tree_nodes = tree.size();
  result.stats.main_seconds = seconds_since(t0);
  return result;
}

DetectionResult supplement_missing(const FPTree& tree, const StarTable& stars,
                                   const NameOrder& order, const WindowConfig& cfg,
                                   const std::vector<Lockstep>& known,
                                   const DetectionOptions& opts) {
  std::vector<std::ptrdiff_t> record_of;
  return supplement_impl(tree, stars, order, cfg, known, opts, record_of);
}

DetectionResult detect_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                 const StarTable& stars, const WindowConfig& cfg,
                                 const DetectionOptions& opts) {
  return detect_locksteps(tree, graph, stars, NameOrder(stars.symbols()), cfg, opts);
}

DetectionResult detect_locksteps(const FPTree& tree, const GalaxyGraph& graph,
                                 const StarTable& stars, const NameOrder& order,
                                 const WindowConfig& cfg, const DetectionOptions& opts) {
  const auto t0 = Clock::now();
  auto main = run_pass(tree, graph, stars, order, cfg, LockstepOrigin::Main, std::nullopt,
                       opts.record_candidates);

  DetectionResult result;
  result.stats.tree_nodes = tree.size();
  result.stats.near_biclique_seconds = main.near_biclique_seconds;
  std::vector<std::ptrdiff_t> record_of;
  append_candidates(result, main, record_of);
  result.locksteps = std::move(main.locksteps);
  result.stats.main_seconds = seconds_since(t0);

  if (opts.supplement) {
    std::vector<std::ptrdiff_t> supp_records;
    auto supp = supplement_impl(tree, stars, order, cfg, result.locksteps, opts, supp_records);
    const auto offset = static_cast<std::ptrdiff_t>(result.candidates.size());
    for (auto& c : supp.candidates) result.candidates.push_back(std::move(c));
    for (std::size_t k = 0; k < supp.locksteps.size(); ++k) {
      result.locksteps.push_back(std::move(supp.locksteps[k]));
      record_of.push_back(supp_records[k] >= 0 ? supp_records[k] + offset : -1);
    }
    result.stats.supplement_seconds = supp.stats.supplement_seconds;
    result.stats.supplement_subpass_total_seconds = supp.stats.supplement_subpass_total_seconds;
    result.stats.supplement_subpass_max_seconds = supp.stats.supplement_subpass_max_seconds;
    result.stats.near_biclique_seconds += supp.stats.near_biclique_seconds;
    result.stats.multi_version_items = supp.stats.multi_version_items;
  } else {
    result.stats.multi_version_items = tree.multi_version_items(order).size();
  }

  prune_subsets(result, record_of);
  for (std::size_t i = 0; i < result.locksteps.size(); ++i) result.locksteps[i].lockstep_id = i + 1;
  return result;
}

}  // namespace lockstep
