#include <gtest/gtest.h>

#include <memory>
#include <string>
#include <vector>

#include "cnp/engine.hpp"
#include "cnp/errors.hpp"

namespace {

using cnp::PlayerAction;
using cnp::RoundOutcome;

class FixedArm : public cnp::Strategy {
 public:
  explicit FixedArm(cnp::ArmIndex arm) : arm_(arm) {}
  PlayerAction act(cnp::Round) override { return PlayerAction::pick(arm_); }
  void observe(cnp::Round, const RoundOutcome&) override {}

 private:
  cnp::ArmIndex arm_;
};

class Faulty : public cnp::Strategy {
 public:
  PlayerAction act(cnp::Round t) override {
    if (t == 3) throw cnp::ProtocolViolation("broken");
    return PlayerAction::quiet();
  }
  void observe(cnp::Round, const RoundOutcome&) override {}
};

TEST(ResolveRound, SharedArmCollides) {
  const std::vector<PlayerAction> actions{PlayerAction::pick(3), PlayerAction::pick(3),
                                          PlayerAction::pick(1)};
  const std::vector<double> losses{0.1, 0.2, 0.3, 0.4};
  const auto out = cnp::resolve_round(actions, losses);
  EXPECT_TRUE(out[0].is_collision());
  EXPECT_TRUE(out[1].is_collision());
  EXPECT_EQ(out[0].charged(), 1.0);
  EXPECT_TRUE(out[2].is_observed());
  EXPECT_EQ(out[2].loss, 0.2);
}

TEST(ResolveRound, QuietIsChargedButHarmless) {
  const std::vector<PlayerAction> actions{PlayerAction::quiet(), PlayerAction::quiet(),
                                          PlayerAction::pick(0)};
  const auto out = cnp::resolve_round(actions, std::vector<double>{0.25, 0.5});
  EXPECT_EQ(out[0].kind, RoundOutcome::Kind::quiet_charged);
  EXPECT_EQ(out[1].charged(), 1.0);
  EXPECT_TRUE(out[2].is_observed());
  EXPECT_EQ(out[2].charged(), 0.25);
}

TEST(ResolveRound, DistinctPickersObserveTheirArms) {
  const std::vector<double> losses{0.1, 0.2, 0.3, 0.4};
  std::vector<PlayerAction> actions;
  for (cnp::ArmIndex a = 0; a < 4; ++a) actions.push_back(PlayerAction::pick(a));
  const auto out = cnp::resolve_round(actions, losses);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_TRUE(out[k].is_observed());
    EXPECT_EQ(out[k].loss, losses[k]);
  }
}

TEST(ResolveRound, RejectsOutOfRangeArm) {
  const std::vector<PlayerAction> actions{PlayerAction::pick(2)};
  EXPECT_THROW(cnp::resolve_round(actions, std::vector<double>{0.1, 0.2}), cnp::InvalidInput);
}

TEST(BenchmarkBestK, Examples) {
  EXPECT_EQ(cnp::benchmark_best_k(std::vector<double>{3, 1, 2, 5}, 2), 3.0);
  EXPECT_EQ(cnp::benchmark_best_k(std::vector<double>{2.5, 2.5, 2.5}, 2), 5.0);
  EXPECT_EQ(cnp::benchmark_best_k(std::vector<double>{3, 1, 2, 5}, 4), 11.0);
  EXPECT_THROW(cnp::benchmark_best_k(std::vector<double>{1}, 2), cnp::InvalidInput);
}

TEST(RegretRecorder, SamplesStrideAndHorizon) {
  cnp::RegretRecorder rec(2, 1, 25, 10);
  const std::vector<double> losses{0.2, 0.6};
  const std::vector<RoundOutcome> outcomes{RoundOutcome::observed(0.6)};
  for (cnp::Round t = 0; t < 25; ++t) rec.record_round(t, losses, outcomes);
  const auto trace = std::move(rec).finish();
  ASSERT_EQ(trace.points.size(), 3u);
  EXPECT_EQ(trace.points[0].t, 10u);
  EXPECT_EQ(trace.points[2].t, 25u);
  EXPECT_NEAR(trace.points[2].charged_loss, 15.0, 1e-12);
  EXPECT_NEAR(trace.points[2].benchmark_loss, 5.0, 1e-12);
  EXPECT_NEAR(trace.final_regret(), 10.0, 1e-12);
}

TEST(RunGame, SingleRoundSinglePlayer) {
  std::vector<std::unique_ptr<cnp::Strategy>> players;
  players.push_back(std::make_unique<FixedArm>(0));
  const cnp::LossTable losses(2, {0.2, 0.7});
  const auto trace = cnp::run_game(players, losses, 1);
  ASSERT_EQ(trace.points.size(), 1u);
  EXPECT_EQ(trace.final_regret(), 0.0);
}

TEST(RunGame, ChargesAreConserved) {
  std::vector<std::unique_ptr<cnp::Strategy>> players;
  players.push_back(std::make_unique<FixedArm>(1));
  players.push_back(std::make_unique<FixedArm>(1));
  players.push_back(std::make_unique<FixedArm>(2));
  std::vector<double> rows;
  for (int t = 0; t < 50; ++t) rows.insert(rows.end(), {0.0, 0.5, 0.25});
  const auto trace = cnp::run_game(players, cnp::LossTable(3, rows), 7);
  EXPECT_EQ(trace.totals.collisions, 100u);
  EXPECT_EQ(trace.totals.quiet_rounds, 0u);
  EXPECT_NEAR(trace.totals.observed_loss, 12.5, 1e-12);
  const auto& last = trace.points.back();
  EXPECT_NEAR(last.charged_loss, trace.totals.collisions + trace.totals.quiet_rounds +
                                     trace.totals.observed_loss, 1e-9);
  EXPECT_NEAR(last.benchmark_loss, 0.0 + 12.5 + 25.0, 1e-12);
}

TEST(RunGame, WrapsProtocolViolations) {
  std::vector<std::unique_ptr<cnp::Strategy>> players;
  players.push_back(std::make_unique<FixedArm>(0));
  players.push_back(std::make_unique<Faulty>());
  const cnp::LossTable losses(3, std::vector<double>(3 * 10, 0.5));
  try {
    cnp::run_game(players, losses, 1);
    FAIL() << "expected a protocol violation";
  } catch (const cnp::ProtocolViolation& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("player 1"), std::string::npos) << what;
    EXPECT_NE(what.find("round 4"), std::string::npos) << what;
  }
}

TEST(GameConfig, TheoremDefaults) {
  const auto c = cnp::GameConfig::theorem_defaults(8, 4, 240000);
  EXPECT_EQ(c.block_size, 245u);
  EXPECT_NEAR(c.eta, 0.0163, 5e-5);
  EXPECT_EQ(c.rank_rounds, 135u);
  EXPECT_NO_THROW(c.validate());
}

TEST(GameConfig, BlockSizeNeverBelowCoordinationLength) {
  const auto c = cnp::GameConfig::theorem_defaults(50, 10, 100);
  EXPECT_EQ(c.block_size, 9u * 50u + 1u);
}

TEST(GameConfig, ValidateRejectsBadParameters) {
  auto c = cnp::GameConfig::theorem_defaults(8, 4, 1000);
  auto bad = c;
  bad.players = 8;
  EXPECT_THROW(bad.validate(), cnp::InvalidInput);
  bad = c;
  bad.block_size = 24;
  EXPECT_THROW(bad.validate(), cnp::InvalidInput);
  bad = c;
  bad.eta = 0.0;
  EXPECT_THROW(bad.validate(), cnp::InvalidInput);
  bad = c;
  bad.rank_rounds = 1001;
  EXPECT_THROW(bad.validate(), cnp::InvalidInput);
  bad = c;
  bad.horizon = 8;
  EXPECT_THROW(bad.validate(), cnp::InvalidInput);
}

}  // namespace
