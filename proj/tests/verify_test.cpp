#include <gtest/gtest.h>

#include "lockstep/lockstep_detection.hpp"
#include "lockstep/pipeline.hpp"
#include "test_util.hpp"

namespace lockstep {
namespace {

using testing::kDay;

struct Verified {
  Engine engine{EngineConfig{}};
  Lockstep ls;

  Verified() {
    std::vector<RawRecord> r;
    testing::add_block(r, {"a", "b", "c"}, {"x.com", "y.com"}, 10);
    testing::add_block(r, {"a", "b", "c"}, {"z.com"}, 3 * kDay + 10);
    engine.process_batch(r, std::nullopt, true);
    if (engine.current().size() != 1) throw std::logic_error("fixture has no lockstep");
    ls = engine.current()[0];
  }

  VerifyResult check(const Lockstep& l) const {
    return verify_lockstep(l, engine.stars(), engine.events(), engine.config().window);
  }
};

TEST(VerifyLockstep, AcceptsDetectedLockstep) {
  Verified v;
  const auto r = v.check(v.ls);
  EXPECT_TRUE(r.ok) << r.violation << ": " << r.detail;
  EXPECT_TRUE(r.violation.empty());
}

TEST(VerifyLockstep, UnknownStarIsProvenance) {
  Verified v;
  auto l = v.ls;
  l.star_ids.push_back(99);
  EXPECT_EQ(v.check(l).violation, "provenance");
  l.star_ids.clear();
  EXPECT_EQ(v.check(l).violation, "provenance");
}

TEST(VerifyLockstep, TooFewDownloadersIsEq3) {
  Verified v;
  auto l = v.ls;
  l.downloaders.pop_back();
  EXPECT_EQ(v.check(l).violation, "eq3");
}

TEST(VerifyLockstep, ForeignDomainIsEq5) {
  Verified v;
  auto l = v.ls;
  l.domains.push_back("w.com");
  EXPECT_EQ(v.check(l).violation, "eq5");
}

TEST(VerifyLockstep, DroppedStarBreaksSeparation) {
  Verified v;
  auto l = v.ls;
  l.star_ids.pop_back();
  l.domains = {"x.com", "y.com"};
  EXPECT_EQ(v.check(l).violation, "eq3");
  l.domains.push_back("z.com");
  EXPECT_EQ(v.check(l).violation, "eq5");
}

TEST(VerifyLockstep, DownloaderWithoutEdgesIsEq4) {
  Verified v;
  auto l = v.ls;
  l.downloaders.push_back("zz");
  l.alpha = 9.0 / 12.0;
  EXPECT_EQ(v.check(l).violation, "eq4");
}

TEST(VerifyLockstep, WrongAlphaIsReported) {
  Verified v;
  auto l = v.ls;
  l.alpha = 0.9;
  EXPECT_EQ(v.check(l).violation, "alpha");
}

TEST(VerifyLockstep, SingleWindowStarsFailEq8) {
  Engine e{EngineConfig{}};
  std::vector<RawRecord> r;
  testing::add_block(r, {"a", "b", "c"}, {"x.com", "y.com", "z.com"}, 10);
  e.process_batch(r, std::nullopt, true);
  EXPECT_TRUE(e.current().empty());
  Lockstep l;
  l.downloaders = {"a", "b", "c"};
  l.domains = {"x.com", "y.com", "z.com"};
  l.star_ids = {1, 2, 3};
  EXPECT_EQ(verify_lockstep(l, e.stars(), e.events(), e.config().window).violation, "eq8");
}

TEST(VerifyLockstep, EventsOutsideANarrowerWindowAreEq5) {
  Verified v;
  WindowConfig narrow = v.engine.config().window;
  narrow.window_length = 3;
  EXPECT_EQ(verify_lockstep(v.ls, v.engine.stars(), v.engine.events(), narrow).violation, "eq5");
}

}  // namespace
}  // namespace lockstep
