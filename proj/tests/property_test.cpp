#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lockstep/oracle.hpp"
#include "lockstep/pipeline.hpp"
#include "lockstep/synthetic.hpp"
#include "test_util.hpp"

namespace lockstep {
namespace {

SyntheticSpec random_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  SyntheticSpec spec;
  spec.seed = seed;
  spec.windows = pick(3, 10);
  spec.downloader_universe = pick(8, 50);
  spec.domain_universe = pick(8, 50);
  spec.noise_events_per_window = pick(0, 60);
  const int plants = pick(0, 3);
  for (int i = 0; i < plants; ++i) {
    PlantedSpec p;
    p.downloaders = pick(3, 6);
    p.domains = pick(3, 6);
    const int nw = pick(2, 3);
    std::set<int> ws;
    while (static_cast<int>(ws.size()) < nw) ws.insert(pick(0, spec.windows - 1));
    p.windows.assign(ws.begin(), ws.end());
    p.missing_edges = pick(0, 1);
    spec.planted.push_back(p);
  }
  return spec;
}

TEST(Property, EmittedLockstepsVerify) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto s = generate_synthetic_stream(random_spec(seed));
    Engine e{EngineConfig{}};
    e.process_batch(s.records, std::nullopt, true);
    for (const auto& ls : e.emitted()) {
      const auto v = verify_lockstep(ls, e.stars(), e.events(), e.config().window);
      EXPECT_TRUE(v.ok) << "seed " << seed << ": " << v.violation << " " << v.detail;
    }
  }
}

TEST(Property, NoLockstepIsAStrictSubsetWithTheSameStars) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto s = generate_synthetic_stream(random_spec(seed));
    const auto run = run_offline(s.records, EngineConfig{});
    const auto& ls = run.locksteps_final;
    for (const auto& a : ls) {
      for (const auto& b : ls) {
        if (&a == &b || a.star_ids != b.star_ids) continue;
        const bool sub = std::includes(b.downloaders.begin(), b.downloaders.end(),
                                       a.downloaders.begin(), a.downloaders.end()) &&
                         std::includes(b.domains.begin(), b.domains.end(), a.domains.begin(),
                                       a.domains.end());
        EXPECT_FALSE(sub) << "seed " << seed;
      }
    }
  }
}

TEST(Property, IdsAreDenseAndKeysUnique) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = generate_synthetic_stream(random_spec(seed));
    const auto run = run_offline(s.records, EngineConfig{});
    std::set<LockstepKey> seen;
    for (std::size_t i = 0; i < run.locksteps_final.size(); ++i) {
      EXPECT_EQ(run.locksteps_final[i].lockstep_id, i + 1);
      EXPECT_TRUE(seen.insert(key_of(run.locksteps_final[i])).second);
    }
  }
}

TEST(Property, ParallelSupplementationMatchesSerial) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto s = generate_synthetic_stream(random_spec(seed));
    EngineConfig par;
    par.supplement_parallelism = 4;
    const auto a = run_offline(s.records, EngineConfig{});
    const auto b = run_offline(s.records, par);
    ASSERT_EQ(a.locksteps_final.size(), b.locksteps_final.size());
    for (std::size_t i = 0; i < a.locksteps_final.size(); ++i) {
      EXPECT_EQ(key_of(a.locksteps_final[i]), key_of(b.locksteps_final[i]));
      EXPECT_EQ(a.locksteps_final[i].star_ids, b.locksteps_final[i].star_ids);
    }
  }
}

TEST(Property, PlantedBicliquesWithoutNoiseMatchTheOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.windows = 6;
    spec.downloader_universe = 10;
    spec.domain_universe = 10;
    spec.noise_events_per_window = 0;
    spec.planted = {{3, 3, {0, 3}, 0}, {3, 4, {1, 4}, 0}};
    const auto s = generate_synthetic_stream(spec);
    Engine e{EngineConfig{}};
    e.process_batch(s.records, std::nullopt, true);
    const auto oracle = enumerate_locksteps_bruteforce(e.events().events(), e.config().window);
    for (const auto& b : oracle.maximal_bicliques) {
      bool found = false;
      for (const auto& ls : e.current()) found |= contained_in(b, ls.downloaders, ls.domains);
      EXPECT_TRUE(found) << "seed " << seed;
    }
  }
}

}  // namespace
}  // namespace lockstep
