#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lockstep/event_model.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

// How a planted structure is laid out over its windows. An identical star
// seen again in a later window is not a new star, so a structure repeated
// verbatim only yields stars in its first window.
enum class PlantLayout {
  SpreadDomains,      // domain i is active in windows[i % |windows|] only
  SpreadDownloaders,  // downloader i is active in windows[i % |windows|] only
  Repeat,             // every edge in every window
};

struct PlantedSpec {
  int downloaders = 3;
  int domains = 3;
  std::vector<int> windows;  // window indices carrying the structure
  int missing_edges = 0;     // (downloader, domain) pairs never emitted
  PlantLayout layout = PlantLayout::SpreadDomains;
};

struct SyntheticSpec {
  int windows = 10;
  Timestamp window_length = 3 * kSecondsPerDay;
  Timestamp slide = 3 * kSecondsPerDay;
  Timestamp start_time = 0;  // aligned to `slide`
  int downloader_universe = 50;
  int domain_universe = 50;
  int payload_universe = 100;
  int noise_events_per_window = 20;
  std::vector<PlantedSpec> planted;
  std::uint64_t seed = 1;
};

struct PlantedTruth {
  std::vector<std::string> downloaders;  // sorted
  std::vector<std::string> domains;      // sorted
  std::vector<int> windows;
  std::vector<std::pair<std::string, std::string>> missing;  // (downloader, domain)
};

struct SyntheticStream {
  std::vector<RawRecord> records;  // ascending timestamp
  std::vector<PlantedTruth> planted;
};

// Names: dlr_NNNNN, domNNNNN.com, pay_NNNNN. Planted members are drawn
// without replacement per structure; different structures may share nodes.
// Throws std::invalid_argument for contradictory specs.
SyntheticStream generate_synthetic_stream(const SyntheticSpec& spec);

void write_records(std::ostream& out, const std::vector<RawRecord>& records);
std::string manifest_to_json(const SyntheticSpec& spec, const SyntheticStream& stream);

}  // namespace lockstep
