#include "cnp/baseline_mc.hpp"

#include <algorithm>
#include <numeric>

#include "cnp/errors.hpp"

namespace cnp {

namespace {

constexpr std::uint64_t kPlayerStream = 0x6d632d706c6179ULL;  // "mc-play"

}  // namespace

MusicalChairsPlayer::MusicalChairsPlayer(std::size_t arms, std::size_t players,
                                         Round learn_rounds, std::uint64_t seed)
    : players_(players),
      learn_rounds_(learn_rounds),
      rng_(seed),
      phase_(Phase::learn),
      reward_sums_(arms, 0.0),
      counts_(arms, 0),
      estimates_(arms, 0.0) {
  if (players_ == 0 || players_ > arms) throw InvalidInput("need 1 <= K <= N");
  if (learn_rounds_ == 0) finish_learning();
}

PlayerAction MusicalChairsPlayer::act(Round /*t*/) {
  switch (phase_) {
    case Phase::learn:
      last_ = static_cast<ArmIndex>(uniform_index(rng_, reward_sums_.size()));
      break;
    case Phase::chairs:
      last_ = top_[static_cast<std::size_t>(uniform_index(rng_, top_.size()))];
      break;
    case Phase::fixed:
      last_ = *owned_;
      break;
  }
  return PlayerAction::pick(last_);
}

void MusicalChairsPlayer::observe(Round t, const RoundOutcome& outcome) {
  switch (phase_) {
    case Phase::learn:
      if (outcome.is_observed()) {
        reward_sums_[last_] += 1.0 - outcome.loss;
        ++counts_[last_];
      }
      if (t + 1 >= learn_rounds_) finish_learning();
      break;
    case Phase::chairs:
      if (!outcome.is_collision()) {
        owned_ = last_;
        phase_ = Phase::fixed;
      }
      break;
    case Phase::fixed:
      break;
  }
}

void MusicalChairsPlayer::finish_learning() {
  for (std::size_t i = 0; i < estimates_.size(); ++i) {
    estimates_[i] = counts_[i] > 0 ? reward_sums_[i] / static_cast<double>(counts_[i]) : 0.0;
  }
  std::vector<ArmIndex> order(estimates_.size());
  std::iota(order.begin(), order.end(), ArmIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ArmIndex a, ArmIndex b) { return estimates_[a] > estimates_[b]; });
  top_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(players_));
  phase_ = Phase::chairs;
}

std::vector<std::unique_ptr<Strategy>> make_mc_players(std::size_t arms, std::size_t players,
                                                       Round learn_rounds, std::uint64_t seed) {
  std::vector<std::unique_ptr<Strategy>> out;
  out.reserve(players);
  for (std::size_t k = 0; k < players; ++k) {
    out.push_back(std::make_unique<MusicalChairsPlayer>(
        arms, players, learn_rounds, derive_seed(seed, {kPlayerStream, k})));
  }
  return out;
}

}  // namespace cnp
