#include "linlayout/error.hpp"
#include "linlayout/plan_json.hpp"
#include "linlayout/text_format.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace linlayout;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConversionPlan small_shuffle() {
  auto a = read_layout_file(std::string(LINLAYOUT_SAMPLES) + "/shuffle_a.layout");
  auto b = read_layout_file(std::string(LINLAYOUT_SAMPLES) + "/shuffle_b.layout");
  return plan_convert(a.at(0).layout, b.at(0).layout, 32);
}

} // namespace

TEST(PlanJson, RoundTripsEveryKind) {
  std::mt19937_64 rng(8);
  std::map<PlanKind, int> seen;
  for (int iter = 0; iter < 120; ++iter) {
    int d = 2 + static_cast<int>(rng() % 7);
    std::vector<int> dims = lltest::random_split(rng, d, 2);
    lltest::HwSplit sa = lltest::random_split_hw(rng, d, 1);
    lltest::HwSplit sb = sa;
    if (iter % 3 == 0)
      sb = lltest::random_split_hw(rng, d, 1);
    lltest::LayoutPair pr = lltest::random_pair(rng, dims, sa, sb, iter % 3, iter % 3 != 0, false);
    ConversionPlan p = plan_convert(pr.a, iter % 7 == 0 ? pr.a : pr.b, 16);
    ++seen[p.kind];
    std::string text = plan_to_json(p);
    ConversionPlan q = plan_from_json(text);
    EXPECT_EQ(plan_to_json(q), text);
    EXPECT_EQ(q.a, p.a);
    EXPECT_EQ(q.b, p.b);
    EXPECT_TRUE(sim_convert(q).correct);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(PlanJson, ShuffleGolden) {
  EXPECT_EQ(plan_to_json(small_shuffle()) + "\n",
            slurp(std::string(LINLAYOUT_SAMPLES) + "/shuffle.plan.json"));
}

TEST(PlanJson, RejectsBadDocuments) {
  std::string good = plan_to_json(small_shuffle());
  EXPECT_THROW(plan_from_json("{"), Error);
  EXPECT_THROW(plan_from_json(R"({"schema":"other/1"})"), Error);
  std::string bad = good;
  bad.replace(bad.find("warp_shuffle"), 12, "teleport");
  EXPECT_THROW(plan_from_json(bad), Error);
  bad = good;
  bad.replace(bad.find("\"stats\""), 7, "\"statz\"");
  EXPECT_THROW(plan_from_json(bad), Error);
}

TEST(PlanJson, SimReport) {
  SimReport r;
  r.correct = false;
  r.mismatch_count = 1;
  r.mismatches.push_back({1, 2, 3, 4, -1});
  std::string j = sim_report_to_json(r, -1);
  EXPECT_NE(j.find(R"("correct":false)"), std::string::npos);
  EXPECT_NE(j.find(R"({"warp":1,"thread":2,"reg":3,"expected":4,"got":-1})"), std::string::npos);
}

TEST(PlanJson, PropagationNamesLayouts) {
  OpGraph g = read_graph_file(std::string(LINLAYOUT_SAMPLES) + "/conflict.graph");
  std::string j = propagation_to_json(g, propagate(g), -1);
  EXPECT_NE(j.find(R"({"id":"%2","op":"add","layout":"row_major"})"), std::string::npos);
  EXPECT_NE(j.find(R"("from":"col_major","to":"row_major")"), std::string::npos);
}
