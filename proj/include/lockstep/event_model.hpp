#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lockstep/symbols.hpp"

namespace lockstep {

struct DownloadEvent {
  EventId event_id = 0;
  std::string downloader;
  std::string domain;  // registrable (second-level) domain
  std::string payload;
  Timestamp timestamp = 0;

  bool operator==(const DownloadEvent&) const = default;
};

// One input line before normalization and id assignment.
struct RawRecord {
  std::string downloader;
  std::string host;
  std::string payload;
  Timestamp timestamp = 0;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based input line, 0 when not line-oriented
  std::string message;
};

class DomainRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Public suffix list rules: plain, wildcard ("*.ck") and exception
// ("!www.ck") entries.
class PublicSuffixRules {
 public:
  static PublicSuffixRules parse(std::istream& in);
  static PublicSuffixRules load(const std::filesystem::path& path);

  void add_rule(std::string_view rule);
  std::size_t size() const {
    return plain_.size() + wildcard_.size() + exception_.size();
  }

  // Number of trailing labels forming the public suffix of `labels`.
  std::size_t suffix_label_count(const std::vector<std::string_view>& labels) const;

  bool operator==(const PublicSuffixRules&) const = default;

 private:
  std::unordered_set<std::string> plain_;
  std::unordered_set<std::string> wildcard_;   // parent of the "*" label
  std::unordered_set<std::string> exception_;  // rule text without '!'
};

// Registrable domain of `raw_host`: the longest matching public suffix plus
// one label, lowercased. IPv4 literals are returned unchanged. Throws
// DomainRejected for empty hosts, malformed labels and bare suffixes.
std::string normalize_domain(std::string_view raw_host, const PublicSuffixRules& rules);

class Whitelist {
 public:
  Whitelist() = default;
  explicit Whitelist(std::vector<std::string> downloaders);
  static Whitelist load(const std::filesystem::path& path);

  void insert(std::string downloader) { ids_.insert(std::move(downloader)); }
  bool contains(std::string_view downloader) const {
    return ids_.contains(std::string(downloader));
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_set<std::string> ids_;
};

struct FilterResult {
  std::vector<DownloadEvent> events;
  std::size_t removed = 0;
};

FilterResult filter_whitelisted(std::span<const DownloadEvent> events, const Whitelist& wl);

// Parses "downloader \t host \t payload \t timestamp". Returns nullopt and
// fills `error` for malformed lines. Comment and blank lines are not records;
// callers skip them with is_ignorable_line.
std::optional<RawRecord> parse_record_line(std::string_view line, std::string* error);
bool is_ignorable_line(std::string_view line);

struct ParsedRecords {
  std::vector<RawRecord> records;
  std::vector<Diagnostic> diagnostics;
};

ParsedRecords parse_records(std::istream& in);

// The persistent download_events table. Events are addressed by id; ids are
// dense, start at 1 and strictly increase in append order. When a sink path
// is configured every append is written there before it becomes visible.
class EventTable {
 public:
  EventTable() = default;
  explicit EventTable(std::filesystem::path sink);

  const DownloadEvent* find(EventId id) const;
  std::span<const DownloadEvent> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  EventId next_id() const { return events_.size() + 1; }
  std::optional<Timestamp> max_timestamp() const;

  // Events with timestamp in [begin, end), ordered by (timestamp, id).
  std::vector<const DownloadEvent*> range(Timestamp begin, Timestamp end) const;

  // Assigns ids in (timestamp, input order) order and commits. Throws
  // std::runtime_error on sink failure, leaving the table unmodified.
  std::vector<DownloadEvent> append(std::vector<DownloadEvent> events);

 private:
  std::vector<DownloadEvent> events_;
  std::vector<std::uint32_t> by_time_;  // indices into events_
  std::optional<std::filesystem::path> sink_;
};

struct EventBatch {
  std::vector<DownloadEvent> events;
  std::optional<Timestamp> min_timestamp;
  std::optional<Timestamp> max_timestamp;
  std::vector<Diagnostic> diagnostics;
  std::size_t malformed = 0;
  std::size_t rejected_domains = 0;
  std::size_t whitelisted = 0;
  // The batch ends before the table's previous maximum timestamp.
  bool out_of_order = false;

  bool empty() const { return events.empty(); }
};

EventBatch ingest_batch(std::span<const RawRecord> records, const PublicSuffixRules& rules,
                        const Whitelist& wl, EventTable& table);

// Line-oriented variant: malformed lines become diagnostics.
EventBatch ingest_batch(std::istream& lines, const PublicSuffixRules& rules,
                        const Whitelist& wl, EventTable& table);

}  // namespace lockstep
