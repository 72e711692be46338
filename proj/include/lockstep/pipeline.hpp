#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lockstep/campaigns.hpp"
#include "lockstep/event_model.hpp"
#include "lockstep/fp_tree.hpp"
#include "lockstep/galaxy_graph.hpp"
#include "lockstep/lockstep_detection.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

enum class RunMode { Offline, Streaming };

std::string_view to_string(RunMode m);
RunMode parse_mode(std::string_view text);

// "3d", "72h", "90m", "30s" or plain seconds.
Timestamp parse_duration(std::string_view text);

struct EngineConfig {
  StarOrientation orientation = StarOrientation::DlrDom;
  WindowConfig window;
  bool supplement = true;
  unsigned supplement_parallelism = 1;
  bool record_candidates = false;
};

struct PhaseMetrics {
  std::size_t batch = 0;
  std::size_t events = 0;
  std::size_t late_events = 0;
  std::size_t windows = 0;
  std::size_t new_stars = 0;
  double star_detection_ms = 0;
  double graph_update_ms = 0;
  double fp_build_ms = 0;
  double main_pass_ms = 0;
  double supplement_ms = 0;
  double supplement_subpass_max_ms = 0;
  double near_biclique_ms = 0;
  double total_ms = 0;
  std::size_t graph_nodes = 0;  // live centers + leaves
  std::size_t graph_edges = 0;  // live
  std::size_t cumulative_events = 0;
  std::size_t cumulative_stars = 0;
  std::size_t cumulative_nodes = 0;  // distinct node names seen
  std::size_t cumulative_edges = 0;  // distinct (leaf, center) pairs seen
  std::size_t fp_nodes = 0;
  std::size_t multi_version_items = 0;
  std::size_t new_locksteps = 0;
  std::size_t total_locksteps = 0;

  double lockstep_detection_ms() const { return main_pass_ms + supplement_ms; }
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const PhaseMetrics& m);

struct BatchResult {
  EventBatch ingest;
  std::vector<StarId> new_stars;
  std::vector<std::pair<StarId, StarStatus>> status_changes;
  std::vector<Lockstep> new_locksteps;  // ids assigned in emission order
  std::vector<CandidateRecord> candidates;
  PhaseMetrics metrics;
  bool detection_ran = false;
};

// Stateful detector. Windows are processed in index order once the
// watermark passes their end; a batch that completes no new star skips the
// tree rebuild.
class Engine {
 public:
  explicit Engine(EngineConfig cfg, PublicSuffixRules rules = {}, Whitelist wl = {},
                  std::optional<std::filesystem::path> event_sink = std::nullopt);

  // Ingests `records`, then closes every window ending at or before
  // `watermark` (default: one second past the batch's latest event). With
  // `final`, every remaining window holding an event is closed as well.
  BatchResult process_batch(std::span<const RawRecord> records,
                            std::optional<Timestamp> watermark = std::nullopt,
                            bool final = false);
  BatchResult finish() { return process_batch({}, std::nullopt, true); }

  const EngineConfig& config() const { return cfg_; }
  const EventTable& events() const { return events_; }
  const StarTable& stars() const { return stars_; }
  const GalaxyGraph& graph() const { return graph_; }
  const FPTree& tree() const { return tree_; }
  std::optional<Timestamp> origin() const { return origin_; }
  std::int64_t next_window() const { return next_window_; }

  // Result of the latest extraction.
  const std::vector<Lockstep>& current() const { return current_; }
  // Every lockstep emitted so far.
  const std::vector<Lockstep>& emitted() const { return emitted_; }
  const std::vector<PhaseMetrics>& metrics() const { return metrics_; }

 private:
  EngineConfig cfg_;
  PublicSuffixRules rules_;
  Whitelist whitelist_;
  EventTable events_;
  StarTable stars_;
  GalaxyGraph graph_;
  FPTree tree_;
  std::optional<Timestamp> origin_;
  std::int64_t next_window_ = 0;
  std::vector<Lockstep> current_;
  std::vector<Lockstep> emitted_;
  std::set<LockstepKey> emitted_keys_;
  std::set<std::pair<NodeId, NodeId>> seen_edges_;
  std::vector<PhaseMetrics> metrics_;
  std::size_t batches_ = 0;
};

struct RunConfig {
  RunMode mode = RunMode::Offline;
  EngineConfig engine;
  std::filesystem::path events;
  std::optional<std::filesystem::path> psl;
  std::optional<std::filesystem::path> whitelist;
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> metrics;  // default: <out_dir>/metrics.csv
  bool metrics_enabled = true;
  // Streaming batch length; default δt.
  std::optional<Timestamp> batch_period;
};

struct RunSummary {
  std::size_t batches = 0;
  std::size_t events = 0;
  std::size_t diagnostics = 0;
  std::size_t stars = 0;
  std::size_t locksteps = 0;
  bool complete = true;
  std::vector<Lockstep> locksteps_final;  // latest extraction
  std::vector<Lockstep> locksteps_emitted;
  std::vector<PhaseMetrics> metrics;
};

// Splits records into consecutive periods of `period` seconds aligned to
// the schedule origin. Returns (watermark, records) per period, including
// empty periods between the first and last event.
std::vector<std::pair<Timestamp, std::vector<RawRecord>>> split_into_batches(
    std::vector<RawRecord> records, Timestamp period, const WindowConfig& cfg);

RunSummary run_offline(const RunConfig& cfg);
RunSummary run_streaming(const RunConfig& cfg);
RunSummary run(const RunConfig& cfg);

// In-memory variants used by tests and benchmarks; nothing is written.
RunSummary run_offline(std::span<const RawRecord> records, const EngineConfig& cfg);
RunSummary run_streaming(std::span<const RawRecord> records, const EngineConfig& cfg,
                         std::optional<Timestamp> batch_period = std::nullopt);

}  // namespace lockstep
