#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lockstep/event_model.hpp"
#include "lockstep/symbols.hpp"

namespace lockstep {

// DlrDom: the center is a domain and the leaves are downloaders.
// DomDlr: the center is a downloader and the leaves are domains.
enum class StarOrientation { DlrDom, DomDlr };

std::string_view to_string(StarOrientation o);
StarOrientation parse_orientation(std::string_view text);

struct WindowConfig {
  Timestamp window_length = 3 * kSecondsPerDay;  // Δt
  Timestamp slide = 3 * kSecondsPerDay;          // δt
  double alpha_min = 0.8;
  std::optional<int> level_cut = 7;
  int campaign_gap_n = 3;
  // Schedule origin override. Default: first event, floored to `slide`.
  std::optional<Timestamp> origin;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct Window {
  std::int64_t index = 0;
  Timestamp start = 0;
  Timestamp end = 0;  // exclusive

  bool operator==(const Window&) const = default;
};

Timestamp schedule_origin(Timestamp first_event, const WindowConfig& cfg);

// Windows of length Δt advancing by δt from `origin` that contain at least
// one instant of [first, last].
std::vector<Window> window_schedule(Timestamp first, Timestamp last, Timestamp origin,
                                    const WindowConfig& cfg);
std::vector<Window> window_schedule(const EventBatch& batch, Timestamp origin,
                                    const WindowConfig& cfg);

Window window_at(std::int64_t index, Timestamp origin, const WindowConfig& cfg);

NodeId center_of(const DownloadEvent& e, StarOrientation o, SymbolTable& symbols);
NodeId leaf_of(const DownloadEvent& e, StarOrientation o, SymbolTable& symbols);

struct Star {
  StarId star_id = 0;
  NodeId center = 0;
  std::vector<NodeId> leaves;  // distinct, ordered by name
  std::int64_t window_index = 0;
  Timestamp window_start = 0;
  Timestamp first_edge_time = 0;
  Timestamp last_edge_time = 0;
  std::vector<EventId> event_ids;  // ascending

  bool contains_leaf(NodeId leaf) const;
};

enum class StarStatus { Live, Replaced, Discarded };

// The stars table. Owns the node symbol table shared by every later stage.
// Star ids are dense and start at 1.
class StarTable {
 public:
  explicit StarTable(StarOrientation orientation = StarOrientation::DlrDom)
      : orientation_(orientation) {}

  StarOrientation orientation() const { return orientation_; }
  SymbolTable& symbols() { return symbols_; }
  const SymbolTable& symbols() const { return symbols_; }

  std::size_t size() const { return stars_.size(); }
  bool contains(StarId id) const { return id >= 1 && id <= stars_.size(); }
  const Star& at(StarId id) const { return stars_.at(id - 1); }
  std::span<const Star> stars() const { return stars_; }

  std::optional<StarId> find(NodeId center, const std::vector<NodeId>& leaves) const;

  // Assigns the next id. The (center, leaves) pair must be new.
  StarId insert(Star star);

  StarStatus status(StarId id) const { return status_.at(id - 1); }
  void set_status(StarId id, StarStatus s) { status_.at(id - 1) = s; }

  // Ids of every star whose leaf set contains `leaf`, ascending.
  std::span<const StarId> stars_with_leaf(NodeId leaf) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<NodeId, std::vector<NodeId>>& k) const;
  };

  StarOrientation orientation_;
  SymbolTable symbols_;
  std::vector<Star> stars_;
  std::vector<StarStatus> status_;
  std::unordered_map<std::pair<NodeId, std::vector<NodeId>>, StarId, KeyHash> index_;
  std::unordered_map<NodeId, std::vector<StarId>> by_leaf_;
};

// Groups the window's events by center and emits a star for every center
// with at least two distinct leaves, unless the same (center, leaves) star
// is already in the table. New stars are appended to `table` and returned
// in center-name order.
std::vector<Star> detect_stars(std::span<const DownloadEvent* const> window_events,
                               const Window& window, StarTable& table);

}  // namespace lockstep
