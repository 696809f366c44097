#pragma once

// Coordinate & Play player state machines. Ranks are 0-based here: rank 0 is
// the coordinator, ranks 1..K-1 are followers, and ranking runs on arms
// 0..K-1.
//
// Each block of tau rounds opens with K-1 sub-blocks of N rounds. In the
// sub-block owned by follower r the coordinator sits on the arm it wants r to
// take while r sweeps arms 0, 1, ..., N-1 until it collides; after that
// collision the coordinator returns to its own arm. The rest of the block is
// the Play phase, where every player sits on a distinct arm.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cnp/engine.hpp"
#include "cnp/metaplayer.hpp"
#include "cnp/random.hpp"
#include "cnp/types.hpp"

namespace cnp {

enum class CoordinationVariant {
  quiet,       // followers stay quiet outside their own sub-block
  quiet_free,  // followers park on arm 0 instead
};

struct BlockPhase {
  bool play = false;
  std::size_t owner = 0;  // follower rank owning the sub-block (coordinate phase only)
  Round step = 0;         // round within the sub-block
};

class BlockSchedule {
 public:
  // Throws InvalidInput unless tau > (K-1)N.
  BlockSchedule(std::size_t arms, std::size_t players, Round tau);

  std::size_t arms() const noexcept { return arms_; }
  std::size_t players() const noexcept { return players_; }
  Round tau() const noexcept { return tau_; }
  Round coordinate_len() const noexcept { return (players_ - 1) * arms_; }
  Round play_len() const noexcept { return tau_ - coordinate_len(); }

  BlockPhase phase(Round round_in_block) const noexcept;

 private:
  std::size_t arms_;
  std::size_t players_;
  Round tau_;
};

// Musical chairs on arms 0..K-1: pick uniformly until the first round without
// a collision, then keep that arm, which is the rank.
class Ranking {
 public:
  explicit Ranking(std::size_t players);

  PlayerAction act(Rng& rng);
  void observe(const RoundOutcome& outcome);

  std::optional<std::size_t> rank() const noexcept { return rank_; }

 private:
  std::size_t players_;
  ArmIndex last_ = 0;
  std::optional<std::size_t> rank_;
};

class Coordinator {
 public:
  Coordinator(BlockSchedule schedule, EstimatorState estimator,
              CoordinationVariant variant = CoordinationVariant::quiet);

  // Samples this block's meta-arm and a uniform order for it.
  void begin_block(Rng& rng);
  // Uses a given meta-arm; position r is the arm for the follower of rank r.
  void begin_block(MetaArm meta);

  PlayerAction act(Round round_in_block);
  void observe(Round round_in_block, const RoundOutcome& outcome);

  // Feeds K * (accumulated / tau) / Pr[own arm in I] for the own arm into the
  // estimator and returns the estimate vector that was applied.
  std::vector<double> end_block();

  const MetaArm& meta_arm() const;
  const EstimatorState& estimator() const noexcept { return estimator_; }
  std::span<const double> accumulated() const noexcept { return accumulated_; }
  bool collision_seen() const noexcept { return collision_seen_; }

 private:
  BlockSchedule schedule_;
  EstimatorState estimator_;
  CoordinationVariant variant_;
  std::optional<MetaArm> meta_;
  std::vector<double> accumulated_;
  bool collision_seen_ = false;
  ArmIndex last_pick_ = 0;
};

class Follower {
 public:
  Follower(BlockSchedule schedule, std::size_t rank,
           CoordinationVariant variant = CoordinationVariant::quiet);

  void begin_block();

  // Throws ProtocolViolation if asked to play the Play phase without having
  // found its arm (lock_failed()).
  PlayerAction act(Round round_in_block);
  void observe(Round round_in_block, const RoundOutcome& outcome);

  std::size_t rank() const noexcept { return rank_; }
  std::optional<ArmIndex> assigned() const noexcept { return assigned_; }
  // The own sub-block ended without identifying an arm.
  bool lock_failed() const noexcept { return failed_; }

 private:
  BlockSchedule schedule_;
  std::size_t rank_;
  CoordinationVariant variant_;
  std::optional<ArmIndex> assigned_;
  bool saw_parking_collision_ = false;
  bool failed_ = false;
};

// A complete player: ranking for T_R rounds, then floor((T - T_R) / tau)
// blocks as coordinator or follower, then uniform random picks for the
// leftover rounds. A player that fails to rank plays uniformly at random for
// the rest of the game; a follower that fails to find its arm plays uniformly
// at random for that block's Play phase.
class CpPlayer : public Strategy {
 public:
  CpPlayer(const GameConfig& config, CoordinationVariant variant, std::uint64_t seed);

  PlayerAction act(Round t) override;
  void observe(Round t, const RoundOutcome& outcome) override;

  std::optional<std::size_t> rank() const noexcept { return ranking_.rank(); }
  bool is_coordinator() const noexcept { return coordinator_.has_value(); }
  const Coordinator* coordinator() const noexcept {
    return coordinator_ ? &*coordinator_ : nullptr;
  }
  std::uint64_t protocol_faults() const noexcept { return faults_; }

 private:
  struct Slot {
    bool in_block;
    Round round_in_block;
  };
  Slot locate(Round t) const noexcept;
  void assume_role();
  PlayerAction random_pick();

  GameConfig config_;
  CoordinationVariant variant_;
  Rng rng_;
  BlockSchedule schedule_;
  Round blocks_;
  Ranking ranking_;
  bool role_assigned_ = false;
  std::optional<Coordinator> coordinator_;
  std::optional<Follower> follower_;
  std::uint64_t faults_ = 0;
};

// K players sharing `config`, each with its own sub-stream of config.seed.
std::vector<std::unique_ptr<Strategy>> make_cp_players(const GameConfig& config,
                                                       CoordinationVariant variant);

}  // namespace cnp
