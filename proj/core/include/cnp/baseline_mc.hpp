#pragma once

// Musical Chairs baseline for stationary rewards: explore uniformly for T_0
// rounds, estimate mean rewards, then grab one of the estimated top-K arms at
// the first collision-free round and hold it forever.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cnp/engine.hpp"
#include "cnp/random.hpp"
#include "cnp/types.hpp"

namespace cnp {

class MusicalChairsPlayer : public Strategy {
 public:
  enum class Phase { learn, chairs, fixed };

  MusicalChairsPlayer(std::size_t arms, std::size_t players, Round learn_rounds,
                      std::uint64_t seed);

  PlayerAction act(Round t) override;
  void observe(Round t, const RoundOutcome& outcome) override;

  Phase phase() const noexcept { return phase_; }
  std::optional<ArmIndex> owned() const noexcept { return owned_; }
  // Mean reward estimates, frozen at the end of the learning phase. Arms never
  // observed while learning are estimated at 0.
  const std::vector<double>& estimated_rewards() const noexcept { return estimates_; }
  // Estimated top-K, ties broken toward the lower arm index.
  const std::vector<ArmIndex>& top_arms() const noexcept { return top_; }
  const std::vector<std::uint64_t>& observation_counts() const noexcept { return counts_; }

 private:
  void finish_learning();

  std::size_t players_;
  Round learn_rounds_;
  Rng rng_;
  Phase phase_;
  ArmIndex last_ = 0;
  std::optional<ArmIndex> owned_;
  std::vector<double> reward_sums_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> estimates_;
  std::vector<ArmIndex> top_;
};

std::vector<std::unique_ptr<Strategy>> make_mc_players(std::size_t arms, std::size_t players,
                                                       Round learn_rounds, std::uint64_t seed);

}  // namespace cnp
