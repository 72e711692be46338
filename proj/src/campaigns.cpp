#include "lockstep/campaigns.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lockstep {

std::vector<std::pair<std::size_t, std::size_t>> split_at_gaps(std::span<const Timestamp> starts,
                                                              Timestamp gap) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (starts.empty()) return out;
  std::size_t first = 0;
  for (std::size_t i = 1; i < starts.size(); ++i) {
    if (starts[i] - starts[i - 1] >= gap) {
      out.emplace_back(first, i - 1);
      first = i;
    }
  }
  out.emplace_back(first, starts.size() - 1);
  return out;
}

std::vector<Campaign> segment_campaigns(const Lockstep& ls, const StarTable& stars,
                                        const WindowConfig& cfg) {
  struct WindowSpan {
    Timestamp start;
    Timestamp first_edge;
    Timestamp last_edge;
  };
  std::map<std::int64_t, WindowSpan> windows;
  for (auto id : ls.star_ids) {
    const auto& s = stars.at(id);
    auto [it, fresh] = windows.try_emplace(s.window_index,
                                           WindowSpan{s.window_start, s.first_edge_time,
                                                      s.last_edge_time});
    if (!fresh) {
      it->second.first_edge = std::min(it->second.first_edge, s.first_edge_time);
      it->second.last_edge = std::max(it->second.last_edge, s.last_edge_time);
    }
  }
  std::vector<std::int64_t> indices;
  std::vector<Timestamp> starts;
  for (const auto& [index, w] : windows) {
    indices.push_back(index);
    starts.push_back(w.start);
  }

  std::vector<Campaign> out;
  const Timestamp gap = static_cast<Timestamp>(cfg.campaign_gap_n) * cfg.slide;
  for (auto [first, last] : split_at_gaps(starts, gap)) {
    Campaign c;
    c.campaign_id = out.size() + 1;
    c.lockstep_id = ls.lockstep_id;
    c.window_indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(first),
                            indices.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    c.start_time = windows.at(indices[first]).first_edge;
    c.end_time = windows.at(indices[first]).last_edge;
    for (auto idx : c.window_indices) {
      c.start_time = std::min(c.start_time, windows.at(idx).first_edge);
      c.end_time = std::max(c.end_time, windows.at(idx).last_edge);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string_view to_string(BinaryClass c) {
  switch (c) {
    case BinaryClass::Malware: return "malware";
    case BinaryClass::Pup: return "pup";
    case BinaryClass::Benign: return "benign";
    case BinaryClass::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(DownloaderLabel l) {
  switch (l) {
    case DownloaderLabel::MD: return "MD";
    case DownloaderLabel::PD: return "PD";
    case DownloaderLabel::BD: return "BD";
    case DownloaderLabel::UD: return "UD";
  }
  return "UD";
}

std::string_view to_string(LockstepLabel l) {
  switch (l) {
    case LockstepLabel::MDL: return "MDL";
    case LockstepLabel::PDL: return "PDL";
    case LockstepLabel::BDL: return "BDL";
    case LockstepLabel::UDL: return "UDL";
  }
  return "UDL";
}

BinaryClass classify_binary(const GroundTruthRecord& rec) {
  if (rec.r_mal >= kMalwareThreshold) {
    return rec.r_pup <= kPupThreshold ? BinaryClass::Malware : BinaryClass::Pup;
  }
  return rec.known_benign ? BinaryClass::Benign : BinaryClass::Unknown;
}

DownloaderLabel label_downloader(std::span<const BinaryClass> payloads) {
  auto has = [&](BinaryClass c) { return std::find(payloads.begin(), payloads.end(), c) != payloads.end(); };
  if (has(BinaryClass::Malware)) return DownloaderLabel::MD;
  if (has(BinaryClass::Pup)) return DownloaderLabel::PD;
  if (has(BinaryClass::Benign)) return DownloaderLabel::BD;
  return DownloaderLabel::UD;
}

LockstepLabel label_lockstep(std::span<const DownloaderLabel> downloaders) {
  auto has = [&](DownloaderLabel l) {
    return std::find(downloaders.begin(), downloaders.end(), l) != downloaders.end();
  };
  if (has(DownloaderLabel::MD)) return LockstepLabel::MDL;
  if (has(DownloaderLabel::PD)) return LockstepLabel::PDL;
  if (has(DownloaderLabel::BD)) return LockstepLabel::BDL;
  return LockstepLabel::UDL;
}

std::string attribute_rep_pub(std::span<const std::optional<std::string>> valid_signers) {
  std::map<std::string, std::size_t> counts;
  std::size_t signed_total = 0;
  for (const auto& s : valid_signers) {
    if (!s) continue;
    ++counts[*s];
    ++signed_total;
  }
  if (signed_total == 0) return std::string(kUnknownPublisher);
  for (const auto& [publisher, n] : counts) {
    if (2 * n > signed_total) return publisher;
  }
  return std::string(kMixedPublisher);
}

namespace {

double parse_fraction(const std::string& text, std::size_t line, const char* field) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0.0 || v > 1.0) {
    throw std::invalid_argument("ground truth line " + std::to_string(line) + ": bad " + field +
                                " '" + text + "'");
  }
  return v;
}

bool parse_flag(const std::string& text, std::size_t line, const char* field) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false" || text.empty()) return false;
  throw std::invalid_argument("ground truth line " + std::to_string(line) + ": bad " + field +
                              " '" + text + "'");
}

}  // namespace

GroundTruth::GroundTruth(std::vector<GroundTruthRecord> records) {
  for (auto& r : records) {
    auto id = r.binary_id;
    records_.insert_or_assign(std::move(id), std::move(r));
  }
}

GroundTruth GroundTruth::parse(std::istream& in) {
  std::vector<GroundTruthRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (line.back() == '\t') fields.emplace_back();
    if (fields.size() < 4 || fields.size() > 6 || fields[0].empty()) {
      throw std::invalid_argument("ground truth line " + std::to_string(lineno) +
                                  ": expected 4 to 6 tab-separated fields");
    }
    fields.resize(6);
    GroundTruthRecord r;
    r.binary_id = fields[0];
    r.r_mal = parse_fraction(fields[1], lineno, "r_mal");
    r.r_pup = parse_fraction(fields[2], lineno, "r_pup");
    r.known_benign = parse_flag(fields[3], lineno, "known_benign");
    if (!fields[4].empty() && fields[4] != "-") r.publisher = fields[4];
    r.signature_valid = parse_flag(fields[5], lineno, "signature_valid");
    records.push_back(std::move(r));
  }
  return GroundTruth(std::move(records));
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ground truth " + path.string());
  return parse(in);
}

const GroundTruthRecord* GroundTruth::find(std::string_view binary_id) const {
  auto it = records_.find(std::string(binary_id));
  return it == records_.end() ? nullptr : &it->second;
}

BinaryClass GroundTruth::classify(std::string_view binary_id) const {
  const auto* r = find(binary_id);
  return r == nullptr ? BinaryClass::Unknown : classify_binary(*r);
}

std::optional<std::string> GroundTruth::valid_signer(std::string_view binary_id) const {
  const auto* r = find(binary_id);
  if (r == nullptr || !r->publisher || !r->signature_valid) return std::nullopt;
  return r->publisher;
}

LockstepReport build_report(const Lockstep& ls, const StarTable& stars, const EventTable& events,
                            const GroundTruth& truth, const WindowConfig& cfg) {
  LockstepReport report;
  report.lockstep_id = ls.lockstep_id;
  report.campaigns = segment_campaigns(ls, stars, cfg);

  const std::set<std::string> domains(ls.domains.begin(), ls.domains.end());
  std::map<std::string, std::set<std::string>> payloads;
  for (const auto& d : ls.downloaders) payloads[d];
  for (auto id : ls.star_ids) {
    for (auto eid : stars.at(id).event_ids) {
      const auto* e = events.find(eid);
      if (e == nullptr || !domains.contains(e->domain)) continue;
      auto it = payloads.find(e->downloader);
      if (it != payloads.end()) it->second.insert(e->payload);
    }
  }

  std::vector<DownloaderLabel> labels;
  std::vector<std::optional<std::string>> signers;
  for (const auto& [dlr, files] : payloads) {
    std::vector<BinaryClass> classes;
    for (const auto& p : files) classes.push_back(truth.classify(p));
    const auto label = label_downloader(classes);
    report.downloader_labels.emplace(dlr, label);
    labels.push_back(label);
    signers.push_back(truth.valid_signer(dlr));
  }
  report.label = label_lockstep(labels);
  report.rep_pub = attribute_rep_pub(signers);
  return report;
}

}  // namespace lockstep
