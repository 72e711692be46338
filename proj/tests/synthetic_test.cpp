#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lockstep/pipeline.hpp"
#include "lockstep/synthetic.hpp"

namespace lockstep {
namespace {

SyntheticSpec base_spec() {
  SyntheticSpec s;
  s.windows = 6;
  s.noise_events_per_window = 30;
  s.planted = {{4, 3, {0, 3}, 0}};
  s.seed = 42;
  return s;
}

TEST(Synthetic, Deterministic) {
  const auto a = generate_synthetic_stream(base_spec());
  const auto b = generate_synthetic_stream(base_spec());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].downloader, b.records[i].downloader);
    EXPECT_EQ(a.records[i].host, b.records[i].host);
    EXPECT_EQ(a.records[i].timestamp, b.records[i].timestamp);
  }
  auto other = base_spec();
  other.seed = 43;
  const auto c = generate_synthetic_stream(other);
  EXPECT_NE(a.planted[0].downloaders, c.planted[0].downloaders);
}

TEST(Synthetic, SortedAndInsideWindows) {
  const auto spec = base_spec();
  const auto s = generate_synthetic_stream(spec);
  EXPECT_EQ(s.records.size(), 6u * 30u + 12u);
  for (std::size_t i = 1; i < s.records.size(); ++i) {
    EXPECT_LE(s.records[i - 1].timestamp, s.records[i].timestamp);
  }
  for (const auto& r : s.records) {
    EXPECT_GE(r.timestamp, 0);
    EXPECT_LT(r.timestamp, spec.windows * spec.slide);
  }
}

TEST(Synthetic, SpreadLayoutPutsEachDomainInOneWindow) {
  const auto spec = base_spec();
  const auto s = generate_synthetic_stream(spec);
  const auto& p = s.planted[0];
  std::map<std::string, std::set<Timestamp>> windows_of;
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& r : s.records) {
    if (r.payload != "pay_p00000") continue;
    windows_of[r.host].insert(r.timestamp / spec.slide);
    edges.emplace(r.downloader, r.host);
  }
  EXPECT_EQ(edges.size(), 12u);
  std::set<Timestamp> used;
  for (const auto& dom : p.domains) {
    ASSERT_EQ(windows_of[dom].size(), 1u) << dom;
    used.insert(*windows_of[dom].begin());
  }
  EXPECT_EQ(used, (std::set<Timestamp>{0, 3}));
}

TEST(Synthetic, MissingEdgesAreNeverEmitted) {
  auto spec = base_spec();
  spec.planted[0].missing_edges = 2;
  const auto s = generate_synthetic_stream(spec);
  ASSERT_EQ(s.planted[0].missing.size(), 2u);
  for (const auto& r : s.records) {
    if (r.payload != "pay_p00000") continue;
    for (const auto& [d, m] : s.planted[0].missing) {
      EXPECT_FALSE(r.downloader == d && r.host == m);
    }
  }
}

TEST(Synthetic, PlantedLockstepIsDetected) {
  auto spec = base_spec();
  spec.noise_events_per_window = 0;
  const auto s = generate_synthetic_stream(spec);
  const auto run = run_offline(s.records, EngineConfig{});
  ASSERT_EQ(run.locksteps_final.size(), 1u);
  EXPECT_EQ(run.locksteps_final[0].downloaders, s.planted[0].downloaders);
  EXPECT_EQ(run.locksteps_final[0].domains, s.planted[0].domains);
}

TEST(Synthetic, RejectsContradictorySpecs) {
  auto too_big = base_spec();
  too_big.planted[0].downloaders = 51;
  EXPECT_THROW(generate_synthetic_stream(too_big), std::invalid_argument);
  auto bad_window = base_spec();
  bad_window.planted[0].windows = {0, 6};
  EXPECT_THROW(generate_synthetic_stream(bad_window), std::invalid_argument);
  auto all_missing = base_spec();
  all_missing.planted[0].missing_edges = 12;
  EXPECT_THROW(generate_synthetic_stream(all_missing), std::invalid_argument);
  auto narrow = base_spec();
  narrow.planted[0].windows = {0, 1, 2, 3};
  EXPECT_THROW(generate_synthetic_stream(narrow), std::invalid_argument);
}

TEST(Synthetic, WriteAndManifest) {
  const auto spec = base_spec();
  const auto s = generate_synthetic_stream(spec);
  std::ostringstream out;
  write_records(out, {s.records.front()});
  const auto line = out.str();
  EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 3);
  const auto m = nlohmann::json::parse(manifest_to_json(spec, s));
  EXPECT_EQ(m["seed"], 42);
  EXPECT_EQ(m["planted"][0]["domains"].size(), 3u);
  EXPECT_EQ(m["planted"][0]["layout"], "spread_domains");
}

}  // namespace
}  // namespace lockstep
