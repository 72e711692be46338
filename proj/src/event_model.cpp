#include "lockstep/event_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lockstep {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string_view>& labels, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (i > from) out.push_back('.');
    out.append(labels[i]);
  }
  return out;
}

bool is_ipv4(const std::vector<std::string_view>& labels) {
  if (labels.size() != 4) return false;
  for (auto label : labels) {
    if (label.empty() || label.size() > 3) return false;
    int value = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
    if (ec != std::errc{} || ptr != label.data() + label.size() || value > 255) return false;
  }
  return true;
}

bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 63) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '-' || c == '_' || u >= 0x80;
  });
}

}  // namespace

PublicSuffixRules PublicSuffixRules::parse(std::istream& in) {
  PublicSuffixRules rules;
  std::string line;
  while (std::getline(in, line)) {
    auto text = trim(line);
    if (text.empty() || text.starts_with("//")) continue;
    // Only the first whitespace-delimited token is the rule.
    auto end = std::find_if(text.begin(), text.end(),
                            [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    rules.add_rule(text.substr(0, static_cast<std::size_t>(end - text.begin())));
  }
  return rules;
}

PublicSuffixRules PublicSuffixRules::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open public suffix list: " + path.string());
  return parse(in);
}

void PublicSuffixRules::add_rule(std::string_view rule) {
  auto text = to_lower(trim(rule));
  if (text.empty()) return;
  if (text.front() == '!') {
    exception_.insert(text.substr(1));
  } else if (text.starts_with("*.")) {
    wildcard_.insert(text.substr(2));
  } else {
    plain_.insert(std::move(text));
  }
}

std::size_t PublicSuffixRules::suffix_label_count(
    const std::vector<std::string_view>& labels) const {
  const std::size_t n = labels.size();
  std::size_t best = 1;  // implicit "*" rule
  for (std::size_t i = 0; i < n; ++i) {
    auto candidate = join(labels, i);
    // An exception rule prevails over every other match.
    if (exception_.contains(candidate)) return n - i - 1;
    std::size_t len = n - i;
    if (len <= best) continue;
    if (plain_.contains(candidate)) {
      best = len;
    } else if (i + 1 < n && wildcard_.contains(join(labels, i + 1))) {
      best = len;
    }
  }
  return best;
}

std::string normalize_domain(std::string_view raw_host, const PublicSuffixRules& rules) {
  auto host = to_lower(trim(raw_host));
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) throw DomainRejected("empty host");
  auto labels = split(host, '.');
  if (is_ipv4(labels)) return host;
  for (auto label : labels) {
    if (!valid_label(label)) throw DomainRejected("malformed host: " + host);
  }
  const std::size_t suffix = rules.suffix_label_count(labels);
  if (labels.size() <= suffix) throw DomainRejected("host is a public suffix: " + host);
  return join(labels, labels.size() - suffix - 1);
}

Whitelist::Whitelist(std::vector<std::string> downloaders) {
  for (auto& d : downloaders) ids_.insert(std::move(d));
}

Whitelist Whitelist::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open whitelist: " + path.string());
  Whitelist wl;
  std::string line;
  while (std::getline(in, line)) {
    auto id = trim(line);
    if (id.empty() || id.front() == '#') continue;
    wl.insert(std::string(id));
  }
  return wl;
}

FilterResult filter_whitelisted(std::span<const DownloadEvent> events, const Whitelist& wl) {
  FilterResult result;
  result.events.reserve(events.size());
  for (const auto& e : events) {
    if (wl.contains(e.downloader)) {
      ++result.removed;
    } else {
      result.events.push_back(e);
    }
  }
  return result;
}

bool is_ignorable_line(std::string_view line) {
  auto text = trim(line);
  return text.empty() || text.front() == '#';
}

std::optional<RawRecord> parse_record_line(std::string_view line, std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<RawRecord> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto fields = split(line, '\t');
  if (fields.size() != 4) {
    return fail("expected 4 tab-separated fields, got " + std::to_string(fields.size()));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (trim(fields[i]).empty()) return fail("empty field " + std::to_string(i + 1));
  }
  auto ts_text = trim(fields[3]);
  Timestamp ts = 0;
  auto [ptr, ec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
  if (ec != std::errc{} || ptr != ts_text.data() + ts_text.size()) {
    return fail("timestamp is not an integer: '" + std::string(ts_text) + "'");
  }
  return RawRecord{std::string(trim(fields[0])), std::string(trim(fields[1])),
                   std::string(trim(fields[2])), ts};
}

ParsedRecords parse_records(std::istream& in) {
  ParsedRecords out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_ignorable_line(line)) continue;
    std::string error;
    if (auto rec = parse_record_line(line, &error)) {
      out.records.push_back(std::move(*rec));
    } else {
      out.diagnostics.push_back({lineno, error});
    }
  }
  return out;
}

EventTable::EventTable(std::filesystem::path sink) : sink_(std::move(sink)) {}

const DownloadEvent* EventTable::find(EventId id) const {
  if (id == 0 || id > events_.size()) return nullptr;
  return &events_[id - 1];
}

std::optional<Timestamp> EventTable::max_timestamp() const {
  if (by_time_.empty()) return std::nullopt;
  return events_[by_time_.back()].timestamp;
}

std::vector<const DownloadEvent*> EventTable::range(Timestamp begin, Timestamp end) const {
  auto ts_of = [&](std::uint32_t idx) { return events_[idx].timestamp; };
  auto lo = std::partition_point(by_time_.begin(), by_time_.end(),
                                 [&](std::uint32_t idx) { return ts_of(idx) < begin; });
  auto hi = std::partition_point(lo, by_time_.end(),
                                 [&](std::uint32_t idx) { return ts_of(idx) < end; });
  std::vector<const DownloadEvent*> out;
  out.reserve(static_cast<std::size_t>(hi - lo));
  for (auto it = lo; it != hi; ++it) out.push_back(&events_[*it]);
  return out;
}

std::vector<DownloadEvent> EventTable::append(std::vector<DownloadEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  EventId id = next_id();
  for (auto& e : events) e.event_id = id++;

  if (sink_ && !events.empty()) {
    std::ostringstream buf;
    for (const auto& e : events) {
      buf << e.event_id << '\t' << e.downloader << '\t' << e.domain << '\t' << e.payload << '\t'
          << e.timestamp << '\n';
    }
    std::ofstream out(*sink_, std::ios::app);
    out << buf.str();
    out.flush();
    if (!out) throw std::runtime_error("failed to append to event table " + sink_->string());
  }

  const auto old_size = static_cast<std::uint32_t>(events_.size());
  events_.insert(events_.end(), events.begin(), events.end());
  const auto mid = by_time_.size();
  for (auto i = old_size; i < events_.size(); ++i) by_time_.push_back(i);
  auto key_less = [&](std::uint32_t a, std::uint32_t b) {
    const auto& ea = events_[a];
    const auto& eb = events_[b];
    return ea.timestamp != eb.timestamp ? ea.timestamp < eb.timestamp : a < b;
  };
  std::inplace_merge(by_time_.begin(), by_time_.begin() + static_cast<std::ptrdiff_t>(mid),
                     by_time_.end(), key_less);
  return events;
}

EventBatch ingest_batch(std::span<const RawRecord> records, const PublicSuffixRules& rules,
                        const Whitelist& wl, EventTable& table) {
  EventBatch batch;
  std::vector<DownloadEvent> normalized;
  normalized.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    DownloadEvent e;
    try {
      e.domain = normalize_domain(rec.host, rules);
    } catch (const DomainRejected& err) {
      ++batch.rejected_domains;
      batch.diagnostics.push_back({0, "record " + std::to_string(i + 1) + ": " + err.what()});
      continue;
    }
    e.downloader = rec.downloader;
    e.payload = rec.payload;
    e.timestamp = rec.timestamp;
    normalized.push_back(std::move(e));
  }

  auto filtered = filter_whitelisted(normalized, wl);
  batch.whitelisted = filtered.removed;
  if (filtered.events.empty()) return batch;

  const auto previous_max = table.max_timestamp();
  batch.events = table.append(std::move(filtered.events));
  batch.min_timestamp = batch.events.front().timestamp;
  batch.max_timestamp = batch.events.back().timestamp;
  batch.out_of_order = previous_max && *batch.max_timestamp < *previous_max;
  return batch;
}

EventBatch ingest_batch(std::istream& lines, const PublicSuffixRules& rules, const Whitelist& wl,
                        EventTable& table) {
  auto parsed = parse_records(lines);
  auto batch = ingest_batch(parsed.records, rules, wl, table);
  batch.malformed = parsed.diagnostics.size();
  batch.diagnostics.insert(batch.diagnostics.begin(), parsed.diagnostics.begin(),
                           parsed.diagnostics.end());
  return batch;
}

}  // namespace lockstep
