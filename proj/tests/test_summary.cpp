#include <gtest/gtest.h>

#include "golden.hpp"
#include "skintone/summary.hpp"

using namespace skintone;
using namespace skintone::stats;

namespace {

AnalysisRecord record(const std::string& model, int fst, const std::string& gender = "Woman") {
  static const char* labels[] = {"I", "II", "III", "IV", "V", "VI"};
  AnalysisRecord r;
  r.model = model;
  r.prompt = "someone";
  r.gender = gender;
  r.race = "White";
  r.fst = {"FST", fst, labels[fst - 1], 0.0, 0.0};
  r.mst = {"MST", fst + 2, std::to_string(fst + 2), 0.0, 0.0};
  r.perla = {"PERLA", 12 - fst, std::to_string(12 - fst), 0.0, 0.0};
  r.age = 20.0 + fst;
  return r;
}

}  // namespace

TEST(Summary, SingleRecord) {
  const std::vector<AnalysisRecord> rs{record("GPT", 3)};
  const auto g = summarize(rs, {"model"}, {"age", "mst", "perla", "fst", "gender", "race"});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].n, 1u);
  EXPECT_EQ(g[0].metric("age").mean, 23.0);
  EXPECT_EQ(g[0].metric("age").sd, 0.0);
  EXPECT_EQ(g[0].metric("mst").mean, 5.0);
  EXPECT_EQ(g[0].metric("perla").median, 9.0);
  EXPECT_EQ(g[0].metric("fst").median_label, "III");
  EXPECT_EQ(g[0].metric("gender").percent_of("Woman"), 100.0);
}

TEST(Summary, FstFloorMedianAndDistribution) {
  const std::vector<AnalysisRecord> rs{record("GPT", 2), record("GPT", 2), record("GPT", 3), record("GPT", 4)};
  const auto g = summarize(rs, {"model"}, {"fst"});
  const auto& f = g[0].metric("fst");
  EXPECT_EQ(f.kind, MetricKind::ordinal);
  EXPECT_EQ(f.median_label, "II");
  ASSERT_EQ(f.distribution.size(), 3u);
  EXPECT_EQ(f.percent_of("II"), 50.0);
  EXPECT_EQ(f.percent_of("III"), 25.0);
  EXPECT_EQ(f.percent_of("IV"), 25.0);
  EXPECT_EQ(f.distribution[0].label, "II");
  EXPECT_EQ(f.distribution[2].label, "IV");
}

TEST(Summary, MeanAndSampleSd) {
  const std::vector<AnalysisRecord> rs{record("GPT", 1), record("GPT", 2), record("GPT", 3), record("GPT", 6)};
  const auto& a = summarize(rs, {}, {"age"})[0].metric("age");
  EXPECT_DOUBLE_EQ(a.mean, 23.0);
  EXPECT_NEAR(a.sd, std::sqrt((4.0 + 1.0 + 0.0 + 9.0) / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(a.median, 22.5);
}

TEST(Summary, MissingAgeIsExcluded) {
  std::vector<AnalysisRecord> rs{record("GPT", 1), record("GPT", 3)};
  rs[0].age.reset();
  const auto& a = summarize(rs, {}, {"age"})[0].metric("age");
  EXPECT_EQ(a.n, 1u);
  EXPECT_EQ(a.mean, 23.0);
}

TEST(Summary, GroupsInKeyOrder) {
  const std::vector<AnalysisRecord> rs{record("NanoBanana", 1), record("GPT", 2), record("NanoBanana", 3)};
  const auto g = summarize(rs, {"model"}, {"fst"});
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].key, std::vector<std::string>{"GPT"});
  EXPECT_EQ(g[1].key, std::vector<std::string>{"NanoBanana"});
  EXPECT_EQ(g[1].n, 2u);
}

TEST(Summary, GoldenGenderComposition) {
  const auto rs = golden::records();
  const auto g = summarize(rs, {"model", "prompt"}, {"gender"});
  ASSERT_EQ(g.size(), 8u);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t p = 0; p < 4; ++p) {
      const auto& gs = g[m * 4 + p];
      EXPECT_EQ(gs.key, (std::vector<std::string>{golden::kModels[m], golden::kPrompts[p]}));
      // Independent count straight from the records.
      std::size_t men = 0;
      for (const auto& r : rs) men += r.model == golden::kModels[m] && r.prompt == golden::kPrompts[p] && r.gender == "Man";
      EXPECT_EQ(gs.metric("gender").count_of("Man"), men);
      EXPECT_EQ(int(men), golden::kMen[m][p]);
      EXPECT_EQ(gs.metric("gender").count_of("Woman"), 400 - men);
    }
  }
}

TEST(Summary, PercentagesSumToHundred) {
  const auto rs = golden::records();
  for (const auto& g : summarize(rs, {"model", "prompt"}, {"fst", "gender", "race"})) {
    for (const auto& [name, m] : g.metrics) {
      double sum = 0.0;
      for (const auto& c : m.distribution) sum += c.percent;
      EXPECT_NEAR(sum, 100.0, 0.1) << name;
    }
  }
}

TEST(Summary, UnknownFieldThrows) {
  const std::vector<AnalysisRecord> rs{record("GPT", 1)};
  EXPECT_THROW(summarize(rs, {"model"}, {"height"}), Error);
  EXPECT_THROW(summarize(rs, {"colour"}, {"age"}), Error);
  EXPECT_THROW(summarize(std::vector<AnalysisRecord>{}, {"colour"}, {"age"}), Error);
}

TEST(Summary, EmptyInputGivesNoGroups) {
  EXPECT_TRUE(summarize(std::vector<AnalysisRecord>{}, {"model"}, {"age"}).empty());
}
