#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "cnp/adversaries.hpp"
#include "cnp/errors.hpp"

namespace {

cnp::LossSchedule parse(const std::string& text) {
  std::istringstream in(text);
  return cnp::parse_schedule(in);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const cnp::ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(LossTable, ValidatesShapeAndRange) {
  EXPECT_THROW(cnp::LossTable(2, {0.1, 0.2, 0.3}), cnp::InvalidInput);
  EXPECT_THROW(cnp::LossTable(2, {0.1, 1.2}), cnp::InvalidInput);
  EXPECT_THROW(cnp::LossTable(0, {}), cnp::InvalidInput);
  const cnp::LossTable t(2, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(t.horizon(), 2u);
  EXPECT_EQ(t.at(1, 0), 0.3);
}

TEST(Schedules, LinkFailureSegments) {
  const auto s = cnp::experiment2_schedule(8, 1200);
  const std::vector<double> start(s.mean_losses_at(0).begin(), s.mean_losses_at(0).end());
  EXPECT_EQ(start, (std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.3, 0.3, 0.3, 0.3}));
  EXPECT_EQ(s.mean_losses_at(299)[0], 0.1);
  EXPECT_EQ(s.mean_losses_at(300)[0], 0.9);
  EXPECT_EQ(s.mean_losses_at(399)[2], 0.1);
  EXPECT_EQ(s.mean_losses_at(400)[2], 0.9);
  EXPECT_EQ(s.mean_losses_at(1199)[1], 0.1);
  EXPECT_THROW(cnp::experiment2_schedule(7, 1200), cnp::InvalidInput);
}

TEST(Schedules, LinkImprovementSegments) {
  const auto s = cnp::experiment3_schedule(8, 1000);
  EXPECT_EQ(s.mean_losses_at(0)[0], 0.9);
  EXPECT_EQ(s.mean_losses_at(0)[5], 0.7);
  EXPECT_EQ(s.mean_losses_at(249)[0], 0.9);
  EXPECT_EQ(s.mean_losses_at(250)[0], 0.1);
  EXPECT_THROW(cnp::experiment3_schedule(4, 1000), cnp::InvalidInput);
}

TEST(Schedules, StationaryInstanceRespectsGap) {
  cnp::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto s = cnp::experiment1_schedule(8, 4, 100, 0.05, rng);
    std::vector<double> rewards;
    for (double l : s.mean_losses_at(0)) rewards.push_back(1.0 - l);
    std::sort(rewards.begin(), rewards.end(), std::greater<>());
    EXPECT_GE(rewards[3] - rewards[4], 0.05 - 1e-12);
  }
}

TEST(Schedules, StationaryInstancesDifferAcrossSeeds) {
  cnp::Rng a(1), b(2), c(1);
  const auto sa = cnp::experiment1_schedule(8, 4, 100, 0.0, a);
  const auto sb = cnp::experiment1_schedule(8, 4, 100, 0.0, b);
  const auto sc = cnp::experiment1_schedule(8, 4, 100, 0.0, c);
  EXPECT_NE(sa.mean_losses_at(0)[0], sb.mean_losses_at(0)[0]);
  EXPECT_EQ(sa.mean_losses_at(0)[0], sc.mean_losses_at(0)[0]);
}

TEST(Schedules, SegmentsMustBeOrdered) {
  EXPECT_THROW(cnp::LossSchedule(cnp::ScheduleKind::piecewise_bernoulli, 2, 10,
                                 {{0, {0.1, 0.2}}, {5, {0.1, 0.2}}, {5, {0.3, 0.3}}}),
               cnp::InvalidInput);
  EXPECT_THROW(cnp::LossSchedule(cnp::ScheduleKind::bernoulli, 2, 10, {{1, {0.1, 0.2}}}),
               cnp::InvalidInput);
  EXPECT_THROW(cnp::LossSchedule(cnp::ScheduleKind::bernoulli, 2, 10, {{0, {0.1, 1.2}}}),
               cnp::InvalidInput);
}

TEST(ParseSchedule, TwoByTwo) {
  const auto s = parse("0,1\n1,0\n");
  ASSERT_EQ(s.kind(), cnp::ScheduleKind::file);
  EXPECT_EQ(s.arms(), 2u);
  EXPECT_EQ(s.horizon(), 2u);
  const auto t = cnp::materialize(s, 0);
  EXPECT_EQ(t.at(0, 0), 0.0);
  EXPECT_EQ(t.at(0, 1), 1.0);
  EXPECT_EQ(t.at(1, 0), 1.0);
  EXPECT_EQ(t.at(1, 1), 0.0);
}

TEST(ParseSchedule, ToleratesSpacesAndTrailingNewlines) {
  const auto s = parse(" 0.25 , 0.5\r\n0.75,1\n\n");
  EXPECT_EQ(s.horizon(), 2u);
  EXPECT_EQ(s.mean_losses_at(1)[0], 0.75);
}

TEST(ParseSchedule, ErrorsNameTheLine) {
  EXPECT_EQ(parse_error_line("0.5,1.5\n"), 1u);
  EXPECT_EQ(parse_error_line("0,1\n0,1\nx,0\n"), 3u);
  EXPECT_EQ(parse_error_line("0,1\n0\n"), 2u);
  EXPECT_EQ(parse_error_line("0,1\n\n0,1\n"), 2u);
  EXPECT_EQ(parse_error_line(""), 1u);
  EXPECT_EQ(parse_error_line("0,-0.1\n"), 1u);
}

TEST(ParseSchedule, MissingFile) {
  EXPECT_THROW(cnp::load_schedule_file("/nonexistent/losses.csv"), cnp::InvalidInput);
}

TEST(ParseSchedule, LoadsFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "cnp_losses_test.csv";
  {
    std::ofstream out(path);
    out << "0.1,0.2,0.3\n0.4,0.5,0.6\n";
  }
  const auto s = cnp::load_schedule_file(path);
  EXPECT_EQ(s.arms(), 3u);
  EXPECT_EQ(s.mean_losses_at(1)[2], 0.6);
  std::filesystem::remove(path);
}

TEST(Materialize, DeterministicAndBinary) {
  const auto s = cnp::experiment2_schedule(8, 1200);
  const auto a = cnp::materialize(s, 5);
  const auto b = cnp::materialize(s, 5);
  const auto c = cnp::materialize(s, 6);
  bool differs = false;
  for (cnp::Round t = 0; t < 1200; ++t) {
    for (cnp::ArmIndex i = 0; i < 8; ++i) {
      ASSERT_EQ(a.at(t, i), b.at(t, i));
      ASSERT_TRUE(a.at(t, i) == 0.0 || a.at(t, i) == 1.0);
      differs = differs || a.at(t, i) != c.at(t, i);
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Materialize, EmpiricalMeansFollowSegments) {
  const cnp::Round horizon = 120000;
  const auto table = cnp::materialize(cnp::experiment2_schedule(8, horizon), 11);
  double before = 0.0, after = 0.0;
  for (cnp::Round t = 0; t < horizon / 4; ++t) before += table.at(t, 0);
  for (cnp::Round t = horizon / 4; t < horizon; ++t) after += table.at(t, 0);
  EXPECT_NEAR(before / (horizon / 4), 0.1, 0.006);
  EXPECT_NEAR(after / (horizon - horizon / 4), 0.9, 0.004);
}

TEST(Materialize, ArmsHaveIndependentStreams) {
  const auto narrow = cnp::materialize(
      cnp::LossSchedule(cnp::ScheduleKind::bernoulli, 2, 500, {{0, {0.5, 0.5}}}), 8);
  const auto wide = cnp::materialize(
      cnp::LossSchedule(cnp::ScheduleKind::bernoulli, 3, 500, {{0, {0.5, 0.5, 0.5}}}), 8);
  for (cnp::Round t = 0; t < 500; ++t) {
    EXPECT_EQ(narrow.at(t, 0), wide.at(t, 0));
    EXPECT_EQ(narrow.at(t, 1), wide.at(t, 1));
  }
}

}  // namespace
