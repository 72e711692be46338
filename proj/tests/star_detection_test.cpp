#include <gtest/gtest.h>

#include "lockstep/star_detection.hpp"
#include "test_util.hpp"

namespace lockstep {
namespace {

using testing::kDay;
using testing::rec;

struct Loaded {
  EventTable events;
  StarTable stars;
};

void load(Loaded& l, const std::vector<RawRecord>& records) {
  ingest_batch(records, PublicSuffixRules{}, Whitelist{}, l.events);
}

std::vector<Star> detect(Loaded& l, const Window& w) {
  return detect_stars(l.events.range(w.start, w.end), w, l.stars);
}

TEST(DetectStars, GroupsByCenterAndNeedsTwoLeaves) {
  Loaded l;
  load(l, {rec("d1", "D.com", 0), rec("d2", "D.com", 3600), rec("d3", "E.com", 0)});
  const Window w{0, 0, 3 * kDay};
  const auto stars = detect(l, w);
  ASSERT_EQ(stars.size(), 1u);
  const auto& sym = l.stars.symbols();
  EXPECT_EQ(sym.name(stars[0].center), "d.com");
  EXPECT_EQ(testing::names(stars[0].leaves, sym), (std::vector<std::string>{"d1", "d2"}));
  EXPECT_EQ(stars[0].star_id, 1u);
  EXPECT_EQ(stars[0].first_edge_time, 0);
  EXPECT_EQ(stars[0].last_edge_time, 3600);
  EXPECT_EQ(stars[0].event_ids, (std::vector<EventId>{1, 3}));
}

TEST(DetectStars, ReprocessingAWindowYieldsNothing) {
  Loaded l;
  load(l, {rec("d1", "d.com", 0), rec("d2", "d.com", 1)});
  const Window w{0, 0, 3 * kDay};
  EXPECT_EQ(detect(l, w).size(), 1u);
  EXPECT_TRUE(detect(l, w).empty());
  EXPECT_EQ(l.stars.size(), 1u);
}

TEST(DetectStars, ThreeDownloadersOnOneDomainIsOneStar) {
  Loaded l;
  load(l, {rec("a", "x.com", 0), rec("b", "x.com", 0), rec("c", "x.com", 0)});
  const auto stars = detect(l, Window{0, 0, 3 * kDay});
  ASSERT_EQ(stars.size(), 1u);
  EXPECT_EQ(stars[0].leaves.size(), 3u);
}

TEST(DetectStars, DuplicateEdgesCollapse) {
  Loaded l;
  load(l, {rec("a", "x.com", 0), rec("a", "x.com", 5), rec("b", "x.com", 9)});
  const auto stars = detect(l, Window{0, 0, 3 * kDay});
  ASSERT_EQ(stars.size(), 1u);
  EXPECT_EQ(stars[0].leaves.size(), 2u);
  EXPECT_EQ(stars[0].event_ids.size(), 3u);
}

TEST(DetectStars, DomDlrOrientationCentersOnDownloaders) {
  Loaded l;
  l.stars = StarTable(StarOrientation::DomDlr);
  load(l, {rec("a", "x.com", 0), rec("a", "y.com", 1), rec("b", "x.com", 2)});
  const auto stars = detect(l, Window{0, 0, 3 * kDay});
  ASSERT_EQ(stars.size(), 1u);
  EXPECT_EQ(l.stars.symbols().name(stars[0].center), "a");
}

TEST(DetectStars, SameLeafSetInLaterWindowIsNotNew) {
  Loaded l;
  load(l, {rec("a", "x.com", 0), rec("b", "x.com", 1), rec("a", "x.com", 3 * kDay),
           rec("b", "x.com", 3 * kDay + 1), rec("c", "x.com", 6 * kDay),
           rec("a", "x.com", 6 * kDay + 1)});
  EXPECT_EQ(detect(l, Window{0, 0, 3 * kDay}).size(), 1u);
  EXPECT_TRUE(detect(l, Window{1, 3 * kDay, 6 * kDay}).empty());
  EXPECT_EQ(detect(l, Window{2, 6 * kDay, 9 * kDay}).size(), 1u);
}

TEST(DetectStars, RejectsEventsOutsideTheWindow) {
  Loaded l;
  load(l, {rec("a", "x.com", 0), rec("b", "x.com", 5 * kDay)});
  auto all = l.events.range(0, 10 * kDay);
  EXPECT_THROW(detect_stars(all, Window{0, 0, 3 * kDay}, l.stars), std::invalid_argument);
}

TEST(DetectStars, EmptyWindow) {
  Loaded l;
  EXPECT_TRUE(detect(l, Window{0, 0, 3 * kDay}).empty());
}

TEST(DetectStars, OutputIsInCenterNameOrder) {
  Loaded l;
  load(l, {rec("a", "zz.com", 0), rec("b", "zz.com", 0), rec("a", "aa.com", 1),
           rec("b", "aa.com", 1)});
  const auto stars = detect(l, Window{0, 0, 3 * kDay});
  ASSERT_EQ(stars.size(), 2u);
  EXPECT_EQ(l.stars.symbols().name(stars[0].center), "aa.com");
  EXPECT_EQ(stars[0].star_id, 1u);
}

TEST(WindowSchedule, NineDaysGiveThreeWindows) {
  WindowConfig cfg;
  const auto ws = window_schedule(0, 9 * kDay - 1, 0, cfg);
  ASSERT_EQ(ws.size(), 3u);
  EXPECT_EQ(ws[2].start, 6 * kDay);
  EXPECT_EQ(ws[2].end, 9 * kDay);
}

TEST(WindowSchedule, OverlappingWindows) {
  WindowConfig cfg;
  cfg.window_length = 3 * kDay;
  cfg.slide = kDay;
  const auto ws = window_schedule(0, 4 * kDay - 1, 0, cfg);
  ASSERT_EQ(ws.size(), 4u);
  for (std::int64_t k = 0; k < 4; ++k) {
    EXPECT_EQ(ws[static_cast<std::size_t>(k)].start, k * kDay);
    EXPECT_EQ(ws[static_cast<std::size_t>(k)].end, (k + 3) * kDay);
  }
}

TEST(WindowSchedule, SingleEventOneWindow) {
  WindowConfig cfg;
  const auto origin = schedule_origin(5 * kDay + 17, cfg);
  EXPECT_EQ(origin, 3 * kDay);
  const auto ws = window_schedule(5 * kDay + 17, 5 * kDay + 17, origin, cfg);
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(ws[0].index, 0);
}

TEST(WindowConfig, Validation) {
  WindowConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha_min = 0.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.alpha_min = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.level_cut = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(StarTable, RejectsDuplicateKeys) {
  testing::StarFixture f;
  f.add("c", {"x", "y"});
  Star dup = f.stars[0];
  EXPECT_THROW(f.table.insert(dup), std::logic_error);
}

TEST(StarTable, LeafIndex) {
  testing::StarFixture f;
  testing::fill_fig3(f);
  const auto d = *f.table.symbols().find("dlr_D");
  const auto ids = f.table.stars_with_leaf(d);
  EXPECT_EQ(std::vector<StarId>(ids.begin(), ids.end()), (std::vector<StarId>{2, 3}));
}

TEST(Orientation, RoundTrip) {
  EXPECT_EQ(parse_orientation(to_string(StarOrientation::DlrDom)), StarOrientation::DlrDom);
  EXPECT_EQ(parse_orientation(to_string(StarOrientation::DomDlr)), StarOrientation::DomDlr);
  EXPECT_THROW(parse_orientation("sideways"), std::invalid_argument);
}

}  // namespace
}  // namespace lockstep
