#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lockstep/event_model.hpp"
#include "lockstep/lockstep_detection.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

struct Campaign {
  std::uint64_t campaign_id = 0;
  std::uint64_t lockstep_id = 0;
  std::vector<std::int64_t> window_indices;  // ascending, distinct
  Timestamp start_time = 0;                  // earliest edge of the campaign's stars
  Timestamp end_time = 0;                    // latest edge of the campaign's stars
};

// Splits ascending window start times wherever consecutive starts are at
// least `gap` apart. Returns index ranges [first, last] into `starts`.
std::vector<std::pair<std::size_t, std::size_t>> split_at_gaps(std::span<const Timestamp> starts,
                                                              Timestamp gap);

// Campaign ids are 1..k within the lockstep.
std::vector<Campaign> segment_campaigns(const Lockstep& ls, const StarTable& stars,
                                        const WindowConfig& cfg);

enum class BinaryClass { Malware, Pup, Benign, Unknown };
enum class DownloaderLabel { MD, PD, BD, UD };
enum class LockstepLabel { MDL, PDL, BDL, UDL };

std::string_view to_string(BinaryClass c);
std::string_view to_string(DownloaderLabel l);
std::string_view to_string(LockstepLabel l);

struct GroundTruthRecord {
  std::string binary_id;
  double r_mal = 0;
  double r_pup = 0;
  bool known_benign = false;
  std::optional<std::string> publisher;
  bool signature_valid = false;
};

inline constexpr double kMalwareThreshold = 0.30;
inline constexpr double kPupThreshold = 0.10;

BinaryClass classify_binary(const GroundTruthRecord& rec);
DownloaderLabel label_downloader(std::span<const BinaryClass> payloads);
LockstepLabel label_lockstep(std::span<const DownloaderLabel> downloaders);

inline constexpr std::string_view kMixedPublisher = "MIXED";
inline constexpr std::string_view kUnknownPublisher = "UNKNOWN";

// One entry per member downloader: its signer when the signature is
// present and valid, nullopt otherwise.
std::string attribute_rep_pub(std::span<const std::optional<std::string>> valid_signers);

// Tab-separated: binary_id, r_mal, r_pup, known_benign, publisher,
// signature_valid. Empty or "-" publisher means unsigned. Lines starting
// with '#' are ignored.
class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<GroundTruthRecord> records);

  static GroundTruth parse(std::istream& in);
  static GroundTruth load(const std::filesystem::path& path);

  const GroundTruthRecord* find(std::string_view binary_id) const;
  std::size_t size() const { return records_.size(); }

  BinaryClass classify(std::string_view binary_id) const;
  std::optional<std::string> valid_signer(std::string_view binary_id) const;

 private:
  std::unordered_map<std::string, GroundTruthRecord> records_;
};

struct LockstepReport {
  std::uint64_t lockstep_id = 0;
  LockstepLabel label = LockstepLabel::UDL;
  std::string rep_pub;
  std::map<std::string, DownloaderLabel> downloader_labels;
  std::vector<Campaign> campaigns;
};

// Payloads count toward a downloader when they were delivered from one of
// the lockstep's domains by an event of one of its stars.
LockstepReport build_report(const Lockstep& ls, const StarTable& stars, const EventTable& events,
                            const GroundTruth& truth, const WindowConfig& cfg);

}  // namespace lockstep
