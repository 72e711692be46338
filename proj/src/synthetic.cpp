#include "lockstep/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace lockstep {

namespace {

std::string numbered(const char* prefix, int n, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%05d%s", prefix, n, suffix);
  return buf;
}

std::string downloader_name(int n) { return numbered("dlr_", n); }
std::string domain_name(int n) { return numbered("dom", n, ".com"); }
std::string payload_name(int n) { return numbered("pay_", n); }

void check(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("synthetic spec: " + message);
}

void validate(const SyntheticSpec& spec) {
  check(spec.windows >= 1, "windows must be positive");
  check(spec.window_length > 0 && spec.slide > 0, "window length and slide must be positive");
  check(spec.slide <= spec.window_length, "slide exceeds window length");
  check(spec.downloader_universe >= 1 && spec.domain_universe >= 1 && spec.payload_universe >= 1,
        "universes must be non-empty");
  check(spec.noise_events_per_window >= 0, "negative noise rate");
  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    const auto& p = spec.planted[i];
    const auto tag = "planted[" + std::to_string(i) + "]: ";
    check(p.downloaders >= 1 && p.domains >= 1, tag + "empty side");
    check(p.downloaders <= spec.downloader_universe, tag + "more downloaders than the universe");
    check(p.domains <= spec.domain_universe, tag + "more domains than the universe");
    check(!p.windows.empty(), tag + "no windows");
    for (auto w : p.windows) check(w >= 0 && w < spec.windows, tag + "window out of range");
    std::set<int> distinct(p.windows.begin(), p.windows.end());
    const auto w = static_cast<int>(distinct.size());
    check(p.layout != PlantLayout::SpreadDomains || p.domains >= w,
          tag + "fewer domains than windows to spread over");
    check(p.layout != PlantLayout::SpreadDownloaders || p.downloaders >= w,
          tag + "fewer downloaders than windows to spread over");
    check(p.missing_edges >= 0 && p.missing_edges < p.downloaders * p.domains,
          tag + "missing edges must leave at least one edge");
  }
}

std::vector<int> sample(std::mt19937_64& rng, int universe, int k) {
  std::vector<int> all(static_cast<std::size_t>(universe));
  for (int i = 0; i < universe; ++i) all[static_cast<std::size_t>(i)] = i;
  std::vector<int> out;
  std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
  return out;
}

}  // namespace

SyntheticStream generate_synthetic_stream(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  SyntheticStream out;

  struct Timed {
    RawRecord rec;
    std::size_t seq;
  };
  std::vector<Timed> events;
  auto emit = [&](std::string dlr, std::string dom, std::string pay, Timestamp t) {
    events.push_back({{std::move(dlr), std::move(dom), std::move(pay), t}, events.size()});
  };
  auto window_start = [&](int w) { return spec.start_time + spec.slide * w; };
  // Offsets stay inside the first slide so each edge lands in one window
  // when windows overlap.
  std::uniform_int_distribution<Timestamp> offset(0, spec.slide - 1);

  for (std::size_t k = 0; k < spec.planted.size(); ++k) {
    const auto& p = spec.planted[k];
    auto dlrs = sample(rng, spec.downloader_universe, p.downloaders);
    auto doms = sample(rng, spec.domain_universe, p.domains);
    std::vector<std::pair<int, int>> cells;
    for (auto d : dlrs) {
      for (auto m : doms) cells.emplace_back(d, m);
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    std::set<std::pair<int, int>> missing(cells.begin(), cells.begin() + p.missing_edges);

    PlantedTruth truth;
    for (auto d : dlrs) truth.downloaders.push_back(downloader_name(d));
    for (auto m : doms) truth.domains.push_back(domain_name(m));
    std::sort(truth.downloaders.begin(), truth.downloaders.end());
    std::sort(truth.domains.begin(), truth.domains.end());
    truth.windows = p.windows;
    std::sort(truth.windows.begin(), truth.windows.end());
    truth.windows.erase(std::unique(truth.windows.begin(), truth.windows.end()),
                        truth.windows.end());
    for (const auto& [d, m] : missing) truth.missing.emplace_back(downloader_name(d), domain_name(m));
    std::sort(truth.missing.begin(), truth.missing.end());

    std::sort(cells.begin(), cells.end());
    std::map<int, std::size_t> slot;  // node -> position in its sample
    const auto& spread = p.layout == PlantLayout::SpreadDownloaders ? dlrs : doms;
    for (std::size_t i = 0; i < spread.size(); ++i) slot[spread[i]] = i;
    const auto nw = truth.windows.size();
    for (std::size_t wi = 0; wi < nw; ++wi) {
      const auto w = truth.windows[wi];
      for (const auto& cell : cells) {
        if (missing.contains(cell)) continue;
        if (p.layout == PlantLayout::SpreadDomains && slot.at(cell.second) % nw != wi) continue;
        if (p.layout == PlantLayout::SpreadDownloaders && slot.at(cell.first) % nw != wi) continue;
        emit(downloader_name(cell.first), domain_name(cell.second),
             numbered("pay_p", static_cast<int>(k), ""), window_start(w) + offset(rng));
      }
    }
    out.planted.push_back(std::move(truth));
  }

  std::uniform_int_distribution<int> pick_dlr(0, spec.downloader_universe - 1);
  std::uniform_int_distribution<int> pick_dom(0, spec.domain_universe - 1);
  std::uniform_int_distribution<int> pick_pay(0, spec.payload_universe - 1);
  for (int w = 0; w < spec.windows; ++w) {
    for (int i = 0; i < spec.noise_events_per_window; ++i) {
      const auto d = pick_dlr(rng);
      const auto m = pick_dom(rng);
      emit(downloader_name(d), domain_name(m), payload_name(pick_pay(rng)),
           window_start(w) + offset(rng));
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const Timed& a, const Timed& b) {
    return a.rec.timestamp < b.rec.timestamp;
  });
  out.records.reserve(events.size());
  for (auto& e : events) out.records.push_back(std::move(e.rec));
  return out;
}

void write_records(std::ostream& out, const std::vector<RawRecord>& records) {
  for (const auto& r : records) {
    out << r.downloader << '\t' << r.host << '\t' << r.payload << '\t' << r.timestamp << '\n';
  }
}

std::string manifest_to_json(const SyntheticSpec& spec, const SyntheticStream& stream) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["seed"] = spec.seed;
  j["windows"] = spec.windows;
  j["window_length"] = spec.window_length;
  j["slide"] = spec.slide;
  j["start_time"] = spec.start_time;
  j["downloader_universe"] = spec.downloader_universe;
  j["domain_universe"] = spec.domain_universe;
  j["noise_events_per_window"] = spec.noise_events_per_window;
  j["events"] = stream.records.size();
  Json planted = Json::array();
  for (std::size_t i = 0; i < stream.planted.size(); ++i) {
    const auto& p = stream.planted[i];
    const auto layout = spec.planted[i].layout;
    Json pj;
    pj["layout"] = layout == PlantLayout::SpreadDomains       ? "spread_domains"
                   : layout == PlantLayout::SpreadDownloaders ? "spread_downloaders"
                                                              : "repeat";
    pj["downloaders"] = p.downloaders;
    pj["domains"] = p.domains;
    pj["windows"] = p.windows;
    Json missing = Json::array();
    for (const auto& [d, m] : p.missing) missing.push_back(Json::array({d, m}));
    pj["missing"] = std::move(missing);
    planted.push_back(std::move(pj));
  }
  j["planted"] = std::move(planted);
  return j.dump(2);
}

}  // namespace lockstep
