#include "cnp/protocol.hpp"

#include <string>

#include "cnp/errors.hpp"

namespace cnp {

namespace {

constexpr std::uint64_t kPlayerStream = 0x706c61796572ULL;  // "player"
constexpr ArmIndex kParkingArm = 0;

}  // namespace

BlockSchedule::BlockSchedule(std::size_t arms, std::size_t players, Round tau)
    : arms_(arms), players_(players), tau_(tau) {
  if (players_ == 0 || arms_ == 0) throw InvalidInput("block schedule needs arms and players");
  if (!(tau_ > (players_ - 1) * arms_)) {
    throw InvalidInput("block size " + std::to_string(tau_) + " leaves no Play phase");
  }
}

BlockPhase BlockSchedule::phase(Round round_in_block) const noexcept {
  if (round_in_block >= coordinate_len()) return {true, 0, 0};
  return {false, static_cast<std::size_t>(round_in_block / arms_) + 1, round_in_block % arms_};
}

Ranking::Ranking(std::size_t players) : players_(players) {
  if (players_ == 0) throw InvalidInput("ranking needs at least one player");
}

PlayerAction Ranking::act(Rng& rng) {
  if (!rank_) last_ = static_cast<ArmIndex>(uniform_index(rng, players_));
  return PlayerAction::pick(last_);
}

void Ranking::observe(const RoundOutcome& outcome) {
  if (!rank_ && !outcome.is_collision()) rank_ = last_;
}

Coordinator::Coordinator(BlockSchedule schedule, EstimatorState estimator,
                         CoordinationVariant variant)
    : schedule_(schedule),
      estimator_(std::move(estimator)),
      variant_(variant),
      accumulated_(schedule.arms(), 0.0) {
  if (estimator_.arms() != schedule_.arms() || estimator_.players() != schedule_.players()) {
    throw InvalidInput("estimator and block schedule disagree on N or K");
  }
}

void Coordinator::begin_block(Rng& rng) { begin_block(draw_meta_arm(estimator_, rng)); }

void Coordinator::begin_block(MetaArm meta) {
  if (meta.size() != schedule_.players()) throw InvalidInput("meta-arm must have K members");
  for (ArmIndex a : meta.order()) {
    if (a >= schedule_.arms()) throw InvalidInput("meta-arm member out of range");
  }
  meta_ = std::move(meta);
  std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
  collision_seen_ = false;
}

const MetaArm& Coordinator::meta_arm() const {
  if (!meta_) throw ProtocolViolation("coordinator has no meta-arm; block not started");
  return *meta_;
}

PlayerAction Coordinator::act(Round round_in_block) {
  const MetaArm& meta = meta_arm();
  const BlockPhase phase = schedule_.phase(round_in_block);
  if (phase.play) {
    last_pick_ = meta.own();
  } else {
    if (phase.step == 0) collision_seen_ = false;
    last_pick_ = collision_seen_ ? meta.own() : meta.at(phase.owner);
  }
  return PlayerAction::pick(last_pick_);
}

void Coordinator::observe(Round round_in_block, const RoundOutcome& outcome) {
  const BlockPhase phase = schedule_.phase(round_in_block);
  if (outcome.is_observed()) {
    accumulated_[last_pick_] += outcome.loss;
    return;
  }
  if (phase.play || !outcome.is_collision() || collision_seen_) return;
  // Parked followers make arm 0 collide regardless of the owner's sweep, so
  // a coordinator assigning arm 0 in the quiet-free variant holds it for the
  // whole sub-block; leaving early would let the sweeping follower run into
  // the coordinator's own arm instead.
  const bool holds_parking_arm = variant_ == CoordinationVariant::quiet_free &&
                                 meta_arm().at(phase.owner) == kParkingArm;
  if (!holds_parking_arm) collision_seen_ = true;
}

std::vector<double> Coordinator::end_block() {
  const MetaArm& meta = meta_arm();
  const ArmIndex own = meta.own();
  const double block_average = accumulated_[own] / static_cast<double>(schedule_.tau());
  std::vector<double> estimates = estimate_round_loss(estimator_, meta, {own, block_average});
  estimator_.apply(estimates);
  meta_.reset();
  std::fill(accumulated_.begin(), accumulated_.end(), 0.0);
  collision_seen_ = false;
  return estimates;
}

Follower::Follower(BlockSchedule schedule, std::size_t rank, CoordinationVariant variant)
    : schedule_(schedule), rank_(rank), variant_(variant) {
  if (rank_ == 0 || rank_ >= schedule_.players()) {
    throw InvalidInput("follower rank must lie in [1, K-1]");
  }
}

void Follower::begin_block() {
  assigned_.reset();
  saw_parking_collision_ = false;
  failed_ = false;
}

PlayerAction Follower::act(Round round_in_block) {
  const BlockPhase phase = schedule_.phase(round_in_block);
  if (phase.play) {
    if (!assigned_) {
      throw ProtocolViolation("follower " + std::to_string(rank_) +
                              " reached the Play phase without an assigned arm");
    }
    return PlayerAction::pick(*assigned_);
  }
  if (phase.owner != rank_) {
    return variant_ == CoordinationVariant::quiet ? PlayerAction::quiet()
                                                  : PlayerAction::pick(kParkingArm);
  }
  if (assigned_) return PlayerAction::pick(*assigned_);
  return PlayerAction::pick(static_cast<ArmIndex>(phase.step));
}

void Follower::observe(Round round_in_block, const RoundOutcome& outcome) {
  const BlockPhase phase = schedule_.phase(round_in_block);
  if (phase.play || phase.owner != rank_ || assigned_) return;

  const auto swept = static_cast<ArmIndex>(phase.step);
  if (outcome.is_collision()) {
    if (variant_ == CoordinationVariant::quiet_free && swept == kParkingArm) {
      saw_parking_collision_ = true;
    } else {
      assigned_ = swept;
    }
  }
  const bool sweep_done = phase.step + 1 == schedule_.arms();
  if (sweep_done && !assigned_) {
    if (saw_parking_collision_) {
      assigned_ = kParkingArm;
    } else {
      failed_ = true;
    }
  }
}

CpPlayer::CpPlayer(const GameConfig& config, CoordinationVariant variant, std::uint64_t seed)
    : config_(config),
      variant_(variant),
      rng_(seed),
      schedule_(config.arms, config.players, config.block_size),
      blocks_(0),
      ranking_(config.players) {
  config_.validate();
  blocks_ = (config_.horizon - config_.rank_rounds) / config_.block_size;
}

CpPlayer::Slot CpPlayer::locate(Round t) const noexcept {
  if (t < config_.rank_rounds) return {false, 0};
  const Round offset = t - config_.rank_rounds;
  if (offset / config_.block_size >= blocks_) return {false, 0};
  return {true, offset % config_.block_size};
}

void CpPlayer::assume_role() {
  role_assigned_ = true;
  const auto rank = ranking_.rank();
  if (!rank) return;
  if (*rank == 0) {
    coordinator_.emplace(schedule_, EstimatorState(config_.arms, config_.players, config_.eta),
                         variant_);
  } else {
    follower_.emplace(schedule_, *rank, variant_);
  }
}

PlayerAction CpPlayer::random_pick() {
  return PlayerAction::pick(static_cast<ArmIndex>(uniform_index(rng_, config_.arms)));
}

PlayerAction CpPlayer::act(Round t) {
  if (t < config_.rank_rounds) return ranking_.act(rng_);
  if (!role_assigned_) assume_role();

  const Slot slot = locate(t);
  if (!slot.in_block) return random_pick();
  if (coordinator_) {
    if (slot.round_in_block == 0) coordinator_->begin_block(rng_);
    return coordinator_->act(slot.round_in_block);
  }
  if (follower_) {
    if (slot.round_in_block == 0) follower_->begin_block();
    if (follower_->lock_failed() && slot.round_in_block >= schedule_.coordinate_len()) {
      if (slot.round_in_block == schedule_.coordinate_len()) ++faults_;
      return random_pick();
    }
    return follower_->act(slot.round_in_block);
  }
  return random_pick();
}

void CpPlayer::observe(Round t, const RoundOutcome& outcome) {
  if (t < config_.rank_rounds) {
    ranking_.observe(outcome);
    return;
  }
  const Slot slot = locate(t);
  if (!slot.in_block) return;
  if (coordinator_) {
    coordinator_->observe(slot.round_in_block, outcome);
    if (slot.round_in_block + 1 == config_.block_size) coordinator_->end_block();
  } else if (follower_) {
    follower_->observe(slot.round_in_block, outcome);
  }
}

std::vector<std::unique_ptr<Strategy>> make_cp_players(const GameConfig& config,
                                                       CoordinationVariant variant) {
  config.validate();
  std::vector<std::unique_ptr<Strategy>> players;
  players.reserve(config.players);
  for (std::size_t k = 0; k < config.players; ++k) {
    players.push_back(
        std::make_unique<CpPlayer>(config, variant, derive_seed(config.seed, {kPlayerStream, k})));
  }
  return players;
}

}  // namespace cnp
