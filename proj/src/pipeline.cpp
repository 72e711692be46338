#include "lockstep/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "lockstep/records.hpp"

namespace lockstep {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string_view to_string(RunMode m) { return m == RunMode::Offline ? "offline" : "streaming"; }

RunMode parse_mode(std::string_view text) {
  if (text == "offline") return RunMode::Offline;
  if (text == "streaming") return RunMode::Streaming;
  throw std::invalid_argument("unknown mode: " + std::string(text));
}

Timestamp parse_duration(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty duration");
  Timestamp unit = 1;
  switch (text.back()) {
    case 'd': unit = kSecondsPerDay; break;
    case 'h': unit = 3600; break;
    case 'm': unit = 60; break;
    case 's': unit = 1; break;
    default: unit = 0; break;
  }
  auto digits = unit == 0 ? text : text.substr(0, text.size() - 1);
  if (unit == 0) unit = 1;
  Timestamp value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || value <= 0) {
    throw std::invalid_argument("bad duration: " + std::string(text));
  }
  return value * unit;
}

void write_metrics_header(std::ostream& out) {
  out << "batch,events,late_events,windows,new_stars,star_detection_ms,graph_update_ms,"
         "fp_build_ms,main_pass_ms,supplement_ms,supplement_subpass_max_ms,near_biclique_ms,"
         "total_ms,graph_nodes,graph_edges,cumulative_events,cumulative_stars,cumulative_nodes,"
         "cumulative_edges,fp_nodes,multi_version_items,new_locksteps,total_locksteps\n";
}

void write_metrics_row(std::ostream& out, const PhaseMetrics& m) {
  out << m.batch << ',' << m.events << ',' << m.late_events << ',' << m.windows << ','
      << m.new_stars << ',' << m.star_detection_ms << ',' << m.graph_update_ms << ','
      << m.fp_build_ms << ',' << m.main_pass_ms << ',' << m.supplement_ms << ','
      << m.supplement_subpass_max_ms << ',' << m.near_biclique_ms << ',' << m.total_ms << ','
      << m.graph_nodes << ',' << m.graph_edges << ',' << m.cumulative_events << ','
      << m.cumulative_stars << ',' << m.cumulative_nodes << ',' << m.cumulative_edges << ','
      << m.fp_nodes << ',' << m.multi_version_items << ',' << m.new_locksteps << ','
      << m.total_locksteps << '\n';
}

Engine::Engine(EngineConfig cfg, PublicSuffixRules rules, Whitelist wl,
               std::optional<std::filesystem::path> event_sink)
    : cfg_(std::move(cfg)),
      rules_(std::move(rules)),
      whitelist_(std::move(wl)),
      events_(event_sink ? EventTable(*event_sink) : EventTable()),
      stars_(cfg_.orientation) {
  cfg_.window.validate();
  if (cfg_.supplement_parallelism == 0) {
    throw std::invalid_argument("supplement parallelism must be at least 1");
  }
}

BatchResult Engine::process_batch(std::span<const RawRecord> records,
                                  std::optional<Timestamp> watermark, bool final) {
  const auto t_batch = Clock::now();
  BatchResult out;
  auto& m = out.metrics;
  m.batch = ++batches_;

  out.ingest = ingest_batch(records, rules_, whitelist_, events_);
  m.events = out.ingest.events.size();
  if (!origin_ && out.ingest.min_timestamp) {
    origin_ = schedule_origin(*out.ingest.min_timestamp, cfg_.window);
  }
  if (origin_) {
    const auto open = window_at(next_window_, *origin_, cfg_.window).start;
    for (const auto& e : out.ingest.events) {
      if (e.timestamp < open) ++m.late_events;
    }
  }
  if (!watermark && out.ingest.max_timestamp) watermark = *out.ingest.max_timestamp + 1;

  auto t0 = Clock::now();
  if (origin_) {
    const auto last = events_.max_timestamp();
    for (;;) {
      const auto w = window_at(next_window_, *origin_, cfg_.window);
      const bool due = (watermark && w.end <= *watermark) || (final && last && w.start <= *last);
      if (!due) break;
      const auto window_events = events_.range(w.start, w.end);
      for (const auto& star : detect_stars(window_events, w, stars_)) {
        out.new_stars.push_back(star.star_id);
        for (auto leaf : star.leaves) seen_edges_.emplace(leaf, star.center);
      }
      ++next_window_;
      ++m.windows;
    }
  }
  m.star_detection_ms = ms_since(t0);
  m.new_stars = out.new_stars.size();

  if (!out.new_stars.empty()) {
    t0 = Clock::now();
    const auto report = graph_.update(out.new_stars, stars_);
    for (auto id : report.replaced) {
      stars_.set_status(id, StarStatus::Replaced);
      out.status_changes.emplace_back(id, StarStatus::Replaced);
    }
    for (auto id : report.discarded) {
      stars_.set_status(id, StarStatus::Discarded);
      out.status_changes.emplace_back(id, StarStatus::Discarded);
    }
    m.graph_update_ms = ms_since(t0);

    t0 = Clock::now();
    const NameOrder order(stars_.symbols());
    tree_ = build_fp_tree(adjacency_snapshot(graph_, order), cfg_.window.level_cut);
    m.fp_build_ms = ms_since(t0);

    DetectionOptions opts;
    opts.supplement = cfg_.supplement;
    opts.supplement_parallelism = cfg_.supplement_parallelism;
    opts.record_candidates = cfg_.record_candidates;
    auto result = detect_locksteps(tree_, graph_, stars_, order, cfg_.window, opts);
    m.main_pass_ms = result.stats.main_seconds * 1e3;
    m.supplement_ms = result.stats.supplement_seconds * 1e3;
    m.supplement_subpass_max_ms = result.stats.supplement_subpass_max_seconds * 1e3;
    m.near_biclique_ms = result.stats.near_biclique_seconds * 1e3;
    m.multi_version_items = result.stats.multi_version_items;
    out.detection_ran = true;

    current_ = std::move(result.locksteps);
    out.candidates = std::move(result.candidates);
    for (const auto& ls : current_) {
      if (!emitted_keys_.insert(key_of(ls)).second) continue;
      auto copy = ls;
      copy.lockstep_id = emitted_.size() + 1;
      emitted_.push_back(copy);
      out.new_locksteps.push_back(std::move(copy));
    }
  } else {
    m.multi_version_items = metrics_.empty() ? 0 : metrics_.back().multi_version_items;
  }

  m.graph_nodes = graph_.center_count() + graph_.leaf_count();
  m.graph_edges = graph_.edge_count();
  m.cumulative_events = events_.size();
  m.cumulative_stars = stars_.size();
  m.cumulative_nodes = stars_.symbols().size();
  m.cumulative_edges = seen_edges_.size();
  m.fp_nodes = tree_.size() - 1;
  m.new_locksteps = out.new_locksteps.size();
  m.total_locksteps = emitted_.size();
  m.total_ms = ms_since(t_batch);
  metrics_.push_back(m);
  return out;
}

std::vector<std::pair<Timestamp, std::vector<RawRecord>>> split_into_batches(
    std::vector<RawRecord> records, Timestamp period, const WindowConfig& cfg) {
  if (period <= 0) throw std::invalid_argument("batch period must be positive");
  std::vector<std::pair<Timestamp, std::vector<RawRecord>>> out;
  if (records.empty()) return out;
  Timestamp first = records.front().timestamp;
  Timestamp last = first;
  for (const auto& r : records) {
    first = std::min(first, r.timestamp);
    last = std::max(last, r.timestamp);
  }
  const Timestamp origin = schedule_origin(first, cfg);
  const auto lo = floor_div(first - origin, period);
  const auto hi = floor_div(last - origin, period);
  for (auto b = lo; b <= hi; ++b) out.emplace_back(origin + (b + 1) * period, std::vector<RawRecord>{});
  for (auto& r : records) {
    const auto b = floor_div(r.timestamp - origin, period) - lo;
    out[static_cast<std::size_t>(b)].second.push_back(std::move(r));
  }
  return out;
}

namespace {

// Output files of a run. All are truncated when the run starts.
class RunWriter {
 public:
  RunWriter(const RunConfig& cfg, const GroundTruth* truth) : truth_(truth), cfg_(cfg) {
    if (cfg.out_dir) {
      std::filesystem::create_directories(*cfg.out_dir);
      const auto& dir = *cfg.out_dir;
      open(stars_, dir / "stars.jsonl");
      open(status_, dir / "star_status.jsonl");
      open(locksteps_, dir / "locksteps.jsonl");
      open(reports_, dir / "report.jsonl");
      open(diagnostics_, dir / "diagnostics.tsv");
      if (cfg.engine.record_candidates) open(candidates_, dir / "candidates.jsonl");
      std::ofstream(dir / "download_events.tsv", std::ios::trunc);
    }
    if (cfg.metrics_enabled && (cfg.metrics || cfg.out_dir)) {
      const auto path = cfg.metrics ? *cfg.metrics : *cfg.out_dir / "metrics.csv";
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      open(metrics_, path);
      write_metrics_header(metrics_);
    }
  }

  std::optional<std::filesystem::path> event_sink() const {
    if (!cfg_.out_dir) return std::nullopt;
    return *cfg_.out_dir / "download_events.tsv";
  }

  void batch(const Engine& engine, const BatchResult& r, bool metrics_row) {
    const auto& stars = engine.stars();
    if (stars_.is_open()) {
      for (auto id : r.new_stars) stars_ << star_to_json(stars.at(id), stars) << '\n';
      for (const auto& [id, s] : r.status_changes) {
        status_ << star_status_to_json(id, s, r.metrics.batch) << '\n';
      }
      for (const auto& ls : r.new_locksteps) {
        locksteps_ << lockstep_to_json(ls) << '\n';
        reports_ << report_to_json(build_report(ls, stars, engine.events(), *truth_,
                                                engine.config().window))
                 << '\n';
      }
      for (const auto& d : r.ingest.diagnostics) {
        diagnostics_ << r.metrics.batch << '\t' << d.line << '\t' << d.message << '\n';
      }
      if (candidates_.is_open()) {
        for (const auto& c : r.candidates) {
          candidates_ << candidate_to_json(c, stars.symbols()) << '\n';
        }
      }
    }
    if (metrics_.is_open() && metrics_row) write_metrics_row(metrics_, r.metrics);
    check();
  }

  void parse_diagnostics(const std::vector<Diagnostic>& diags) {
    if (!diagnostics_.is_open()) return;
    for (const auto& d : diags) diagnostics_ << 0 << '\t' << d.line << '\t' << d.message << '\n';
    check();
  }

  void summary(const RunSummary& s) {
    if (!cfg_.out_dir) return;
    nlohmann::ordered_json j;
    j["mode"] = to_string(cfg_.mode);
    j["complete"] = s.complete;
    j["batches"] = s.batches;
    j["events"] = s.events;
    j["diagnostics"] = s.diagnostics;
    j["stars"] = s.stars;
    j["locksteps"] = s.locksteps;
    std::ofstream out(*cfg_.out_dir / "summary.json", std::ios::trunc);
    out << j.dump(2) << '\n';
  }

 private:
  static void open(std::ofstream& f, const std::filesystem::path& p) {
    f.open(p, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
  }

  void check() {
    for (auto* f : {&stars_, &status_, &locksteps_, &reports_, &diagnostics_, &candidates_,
                    &metrics_}) {
      if (f->is_open()) {
        f->flush();
        if (!*f) throw std::runtime_error("write failure in output directory");
      }
    }
  }

  const GroundTruth* truth_;
  const RunConfig& cfg_;
  std::ofstream stars_, status_, locksteps_, reports_, diagnostics_, candidates_, metrics_;
};

struct Inputs {
  ParsedRecords parsed;
  PublicSuffixRules rules;
  Whitelist whitelist;
  GroundTruth truth;
};

Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  std::ifstream events(cfg.events);
  if (!events) throw std::runtime_error("cannot open events file " + cfg.events.string());
  in.parsed = parse_records(events);
  if (cfg.psl) in.rules = PublicSuffixRules::load(*cfg.psl);
  if (cfg.whitelist) in.whitelist = Whitelist::load(*cfg.whitelist);
  if (cfg.ground_truth) in.truth = GroundTruth::load(*cfg.ground_truth);
  return in;
}

void fill_summary(RunSummary& s, const Engine& engine) {
  s.events = engine.events().size();
  s.stars = engine.stars().size();
  s.locksteps = engine.emitted().size();
  s.locksteps_final = engine.current();
  s.locksteps_emitted = engine.emitted();
  s.metrics = engine.metrics();
}

template <typename Body>
RunSummary run_with_files(const RunConfig& cfg, Body&& body) {
  auto inputs = load_inputs(cfg);
  RunWriter writer(cfg, &inputs.truth);
  Engine engine(cfg.engine, std::move(inputs.rules), std::move(inputs.whitelist),
                writer.event_sink());
  RunSummary summary;
  summary.diagnostics = inputs.parsed.diagnostics.size();
  writer.parse_diagnostics(inputs.parsed.diagnostics);
  try {
    body(engine, writer, std::move(inputs.parsed.records), summary);
  } catch (...) {
    summary.complete = false;
    fill_summary(summary, engine);
    writer.summary(summary);
    throw;
  }
  fill_summary(summary, engine);
  writer.summary(summary);
  return summary;
}

}  // namespace

RunSummary run_offline(const RunConfig& cfg) {
  return run_with_files(cfg, [](Engine& engine, RunWriter& writer,
                                std::vector<RawRecord> records, RunSummary& s) {
    auto r = engine.process_batch(records, std::nullopt, true);
    s.diagnostics += r.ingest.diagnostics.size();
    s.batches = 1;
    writer.batch(engine, r, true);
  });
}

RunSummary run_streaming(const RunConfig& cfg) {
  return run_with_files(cfg, [&cfg](Engine& engine, RunWriter& writer,
                                    std::vector<RawRecord> records, RunSummary& s) {
    const auto period = cfg.batch_period.value_or(cfg.engine.window.slide);
    for (auto& [watermark, batch] : split_into_batches(std::move(records), period,
                                                       cfg.engine.window)) {
      auto r = engine.process_batch(batch, watermark);
      s.diagnostics += r.ingest.diagnostics.size();
      ++s.batches;
      writer.batch(engine, r, true);
    }
    auto r = engine.finish();
    writer.batch(engine, r, r.metrics.windows > 0);
  });
}

RunSummary run(const RunConfig& cfg) {
  return cfg.mode == RunMode::Offline ? run_offline(cfg) : run_streaming(cfg);
}

RunSummary run_offline(std::span<const RawRecord> records, const EngineConfig& cfg) {
  Engine engine(cfg);
  engine.process_batch(records, std::nullopt, true);
  RunSummary s;
  s.batches = 1;
  fill_summary(s, engine);
  return s;
}

RunSummary run_streaming(std::span<const RawRecord> records, const EngineConfig& cfg,
                         std::optional<Timestamp> batch_period) {
  Engine engine(cfg);
  RunSummary s;
  std::vector<RawRecord> copy(records.begin(), records.end());
  for (auto& [watermark, batch] :
       split_into_batches(std::move(copy), batch_period.value_or(cfg.window.slide), cfg.window)) {
    engine.process_batch(batch, watermark);
    ++s.batches;
  }
  engine.finish();
  fill_summary(s, engine);
  return s;
}

}  // namespace lockstep
