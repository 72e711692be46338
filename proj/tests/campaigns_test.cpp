#include <gtest/gtest.h>

#include <sstream>

#include "lockstep/campaigns.hpp"
#include "lockstep/pipeline.hpp"
#include "test_util.hpp"

namespace lockstep {
namespace {

using testing::kDay;
using testing::StarFixture;

Lockstep lockstep_over(StarFixture& f, const std::vector<std::int64_t>& windows) {
  Lockstep ls;
  ls.lockstep_id = 4;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    ls.star_ids.push_back(f.add("D" + std::to_string(i), {"a", "b", "c"}, windows[i]));
  }
  return ls;
}

std::vector<std::vector<std::int64_t>> segments(const std::vector<std::int64_t>& windows) {
  StarFixture f;
  const auto ls = lockstep_over(f, windows);
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& c : segment_campaigns(ls, f.table, WindowConfig{})) out.push_back(c.window_indices);
  return out;
}

using W = std::vector<std::vector<std::int64_t>>;

TEST(SegmentCampaigns, GapTable) {
  struct Case {
    std::vector<std::int64_t> windows;
    W expected;
  };
  const std::vector<Case> cases = {
      {{0, 1, 2, 7, 8}, {{0, 1, 2}, {7, 8}}},
      {{0, 1, 2, 3}, {{0, 1, 2, 3}}},
      {{0, 3}, {{0}, {3}}},
      {{0, 2}, {{0, 2}}},
      {{8, 0, 1}, {{0, 1}, {8}}},
      {{0, 0, 1}, {{0, 1}}},
  };
  for (const auto& c : cases) EXPECT_EQ(segments(c.windows), c.expected);
}

TEST(SegmentCampaigns, IdsAndTimes) {
  StarFixture f;
  const auto ls = lockstep_over(f, {0, 1, 2, 7, 8});
  const auto cs = segment_campaigns(ls, f.table, WindowConfig{});
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0].campaign_id, 1u);
  EXPECT_EQ(cs[1].campaign_id, 2u);
  EXPECT_EQ(cs[0].lockstep_id, 4u);
  EXPECT_EQ(cs[0].start_time, 0);
  EXPECT_EQ(cs[0].end_time, 2 * 3 * kDay + 1);
  EXPECT_EQ(cs[1].start_time, 7 * 3 * kDay);
  EXPECT_EQ(cs[1].end_time, 8 * 3 * kDay + 1);
}

TEST(SegmentCampaigns, GapScalesWithN) {
  StarFixture f;
  const auto ls = lockstep_over(f, {0, 1, 2, 7, 8});
  WindowConfig cfg;
  cfg.campaign_gap_n = 6;
  EXPECT_EQ(segment_campaigns(ls, f.table, cfg).size(), 1u);
  cfg.campaign_gap_n = 1;
  EXPECT_EQ(segment_campaigns(ls, f.table, cfg).size(), 5u);
}

TEST(SegmentCampaigns, PartitionReproducesWindowSequence) {
  for (const auto& windows : std::vector<std::vector<std::int64_t>>{
           {0, 1, 5, 6, 9, 20}, {3, 4}, {0, 4, 8, 12}, {1, 2, 3, 4, 5, 6, 7}}) {
    std::vector<std::int64_t> joined;
    const auto segs = segments(windows);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (std::size_t j = 1; j < segs[i].size(); ++j) EXPECT_LT(segs[i][j] - segs[i][j - 1], 3);
      if (i > 0) {
        EXPECT_GE(segs[i].front() - segs[i - 1].back(), 3);
      }
      joined.insert(joined.end(), segs[i].begin(), segs[i].end());
    }
    EXPECT_EQ(joined, windows);
  }
}

TEST(SplitAtGaps, Ranges) {
  const std::vector<Timestamp> starts = {0, 1, 2, 7, 8};
  using R = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(split_at_gaps(starts, 3), (R{{0, 2}, {3, 4}}));
  EXPECT_EQ(split_at_gaps(starts, 5), (R{{0, 2}, {3, 4}}));
  EXPECT_EQ(split_at_gaps(starts, 6), (R{{0, 4}}));
  EXPECT_TRUE(split_at_gaps(std::vector<Timestamp>{}, 3).empty());
}

GroundTruthRecord gt(double r_mal, double r_pup, bool benign = false) {
  return {"b", r_mal, r_pup, benign, std::nullopt, false};
}

TEST(ClassifyBinary, ThresholdTable) {
  struct Case {
    GroundTruthRecord rec;
    BinaryClass expected;
  };
  const std::vector<Case> cases = {
      {gt(0.5, 0.05), BinaryClass::Malware},
      {gt(0.5, 0.4), BinaryClass::Pup},
      {gt(0.0, 0.0, true), BinaryClass::Benign},
      {gt(0.0, 0.0), BinaryClass::Unknown},
      {gt(0.30, 0.10), BinaryClass::Malware},
      {gt(0.30, 0.11), BinaryClass::Pup},
      {gt(0.29, 0.0), BinaryClass::Unknown},
      {gt(0.29, 0.9), BinaryClass::Unknown},
      {gt(0.9, 0.0, true), BinaryClass::Malware},
      {gt(0.9, 0.5, true), BinaryClass::Pup},
      {gt(0.2, 0.5, true), BinaryClass::Benign},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(classify_binary(c.rec), c.expected) << c.rec.r_mal << " " << c.rec.r_pup;
  }
}

TEST(LabelDownloader, PrecedenceTable) {
  using B = BinaryClass;
  struct Case {
    std::vector<BinaryClass> payloads;
    DownloaderLabel expected;
  };
  const std::vector<Case> cases = {
      {{B::Malware, B::Benign}, DownloaderLabel::MD},
      {{B::Pup, B::Benign}, DownloaderLabel::PD},
      {{B::Unknown, B::Unknown}, DownloaderLabel::UD},
      {{B::Benign, B::Unknown}, DownloaderLabel::BD},
      {{B::Unknown, B::Pup, B::Malware}, DownloaderLabel::MD},
      {{}, DownloaderLabel::UD},
  };
  for (const auto& c : cases) EXPECT_EQ(label_downloader(c.payloads), c.expected);
}

TEST(LabelLockstep, PrecedenceTable) {
  using D = DownloaderLabel;
  struct Case {
    std::vector<DownloaderLabel> members;
    LockstepLabel expected;
  };
  const std::vector<Case> cases = {
      {{D::MD, D::BD, D::UD}, LockstepLabel::MDL},
      {{D::PD, D::UD}, LockstepLabel::PDL},
      {{D::UD, D::UD, D::UD}, LockstepLabel::UDL},
      {{D::BD, D::UD, D::UD}, LockstepLabel::BDL},
      {{D::BD, D::PD, D::UD}, LockstepLabel::PDL},
  };
  for (const auto& c : cases) EXPECT_EQ(label_lockstep(c.members), c.expected);
}

TEST(LabelLockstep, AddingMalwareOnlyMovesTowardMdl) {
  using B = BinaryClass;
  const std::vector<std::vector<B>> base = {{B::Pup}, {B::Benign}, {B::Unknown}};
  auto label_of = [](const std::vector<std::vector<B>>& members) {
    std::vector<DownloaderLabel> labels;
    for (const auto& m : members) labels.push_back(label_downloader(m));
    return label_lockstep(labels);
  };
  EXPECT_EQ(label_of(base), LockstepLabel::PDL);
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto with = base;
    with[i].push_back(B::Malware);
    EXPECT_EQ(label_of(with), LockstepLabel::MDL);
  }
}

TEST(AttributeRepPub, MajorityTable) {
  using S = std::optional<std::string>;
  struct Case {
    std::vector<S> signers;
    std::string expected;
  };
  const std::vector<Case> cases = {
      {{S("P"), S("P"), S("Q"), S(), S()}, "P"},
      {{S("P"), S("Q")}, "MIXED"},
      {{S(), S(), S()}, "UNKNOWN"},
      {{}, "UNKNOWN"},
      {{S("P"), S("P"), S("Q"), S("Q")}, "MIXED"},
      {{S("Q"), S(), S(), S(), S()}, "Q"},
      {{S("P"), S("Q"), S("R")}, "MIXED"},
  };
  for (const auto& c : cases) EXPECT_EQ(attribute_rep_pub(c.signers), c.expected);
}

TEST(AttributeRepPub, UnsignedDownloadersDoNotMatter) {
  using S = std::optional<std::string>;
  const std::vector<S> a = {S("P"), S("P"), S("Q")};
  const std::vector<S> b = {S(), S("P"), S(), S("P"), S("Q"), S()};
  EXPECT_EQ(attribute_rep_pub(a), attribute_rep_pub(b));
}

TEST(GroundTruth, ParseAndLookups) {
  std::istringstream in(
      "# id\tr_mal\tr_pup\tbenign\tpublisher\tvalid\n"
      "m1\t0.5\t0.05\t0\tEvil Corp\t1\n"
      "p1\t0.5\t0.4\tfalse\t-\tfalse\n"
      "b1\t0\t0\ttrue\tGood Inc\t0\n"
      "u1\t0.1\t0\tfalse\n");
  const auto truth = GroundTruth::parse(in);
  EXPECT_EQ(truth.size(), 4u);
  EXPECT_EQ(truth.classify("m1"), BinaryClass::Malware);
  EXPECT_EQ(truth.classify("p1"), BinaryClass::Pup);
  EXPECT_EQ(truth.classify("b1"), BinaryClass::Benign);
  EXPECT_EQ(truth.classify("u1"), BinaryClass::Unknown);
  EXPECT_EQ(truth.classify("missing"), BinaryClass::Unknown);
  EXPECT_EQ(truth.valid_signer("m1"), "Evil Corp");
  EXPECT_EQ(truth.valid_signer("p1"), std::nullopt);
  EXPECT_EQ(truth.valid_signer("b1"), std::nullopt);
}

TEST(GroundTruth, RejectsBadLines) {
  for (const char* text : {"x\t1.5\t0\n", "x\tabc\t0\n", "x\n", "x\t0.1\t0\tmaybe\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(GroundTruth::parse(in), std::invalid_argument) << text;
  }
}

TEST(BuildReport, LabelsFromLockstepPayloads) {
  // d1 delivers malware from a lockstep domain; d2 only outside it.
  std::vector<RawRecord> r;
  testing::add_block(r, {"d1", "d2", "d3"}, {"x.com", "y.com"}, 10, "plain");
  testing::add_block(r, {"d1", "d2", "d3"}, {"z.com"}, 3 * kDay + 1000, "plain");
  r.push_back(testing::rec("d1", "x.com", 500, "bad"));
  r.push_back(testing::rec("d2", "other.com", 600, "bad"));
  Engine e{EngineConfig{}};
  e.process_batch(r, std::nullopt, true);
  ASSERT_EQ(e.current().size(), 1u);

  GroundTruth truth({{"bad", 0.9, 0.0, false, std::nullopt, false},
                     {"plain", 0.0, 0.0, true, std::nullopt, false},
                     {"d1", 0, 0, false, "P", true},
                     {"d2", 0, 0, false, "P", true},
                     {"d3", 0, 0, false, "Q", false}});
  const auto report = build_report(e.current()[0], e.stars(), e.events(), truth, e.config().window);
  EXPECT_EQ(report.label, LockstepLabel::MDL);
  EXPECT_EQ(report.downloader_labels.at("d1"), DownloaderLabel::MD);
  EXPECT_EQ(report.downloader_labels.at("d2"), DownloaderLabel::BD);
  EXPECT_EQ(report.downloader_labels.at("d3"), DownloaderLabel::BD);
  EXPECT_EQ(report.rep_pub, "P");
  ASSERT_EQ(report.campaigns.size(), 1u);
  EXPECT_EQ(report.campaigns[0].window_indices, (std::vector<std::int64_t>{0, 1}));
}

TEST(BuildReport, MissingGroundTruthGivesUnknowns) {
  std::vector<RawRecord> r;
  testing::add_block(r, {"d1", "d2", "d3"}, {"x.com", "y.com"}, 10);
  testing::add_block(r, {"d1", "d2", "d3"}, {"z.com"}, 3 * kDay + 10);
  Engine e{EngineConfig{}};
  e.process_batch(r, std::nullopt, true);
  ASSERT_EQ(e.current().size(), 1u);
  const auto report =
      build_report(e.current()[0], e.stars(), e.events(), GroundTruth{}, e.config().window);
  EXPECT_EQ(report.label, LockstepLabel::UDL);
  EXPECT_EQ(report.rep_pub, "UNKNOWN");
}

}  // namespace
}  // namespace lockstep
