#pragma once

// Simultaneous-play game loop: collision resolution, loss charging and
// regret accounting against the K best distinct arms.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cnp/adversaries.hpp"
#include "cnp/types.hpp"

namespace cnp {

class PlayerAction {
 public:
  static constexpr PlayerAction quiet() noexcept { return PlayerAction(kQuiet); }
  static constexpr PlayerAction pick(ArmIndex arm) noexcept { return PlayerAction(arm); }

  constexpr bool is_quiet() const noexcept { return arm_ == kQuiet; }
  constexpr ArmIndex arm() const noexcept { return arm_; }

  friend constexpr bool operator==(PlayerAction, PlayerAction) = default;

 private:
  static constexpr ArmIndex kQuiet = static_cast<ArmIndex>(-1);
  constexpr explicit PlayerAction(ArmIndex arm) noexcept : arm_(arm) {}
  ArmIndex arm_;
};

struct RoundOutcome {
  enum class Kind { collision, observed, quiet_charged };

  Kind kind = Kind::quiet_charged;
  double loss = 0.0;  // meaningful for observed only; a colliding player learns nothing else

  static constexpr RoundOutcome collision() noexcept { return {Kind::collision, 0.0}; }
  static constexpr RoundOutcome observed(double loss) noexcept { return {Kind::observed, loss}; }
  static constexpr RoundOutcome quiet_charged() noexcept { return {Kind::quiet_charged, 0.0}; }

  constexpr double charged() const noexcept { return kind == Kind::observed ? loss : 1.0; }
  constexpr bool is_collision() const noexcept { return kind == Kind::collision; }
  constexpr bool is_observed() const noexcept { return kind == Kind::observed; }
};

// A sole picker observes its arm's loss; every picker of a shared arm gets a
// collision (charged 1); quiet players are charged 1 and collide with nobody.
// Throws InvalidInput on an arm index outside the loss vector.
void resolve_round(std::span<const PlayerAction> actions, std::span<const double> losses,
                   std::span<RoundOutcome> outcomes);
std::vector<RoundOutcome> resolve_round(std::span<const PlayerAction> actions,
                                        std::span<const double> losses);

// Cumulative loss of the best K distinct arms: the K smallest entries.
double benchmark_best_k(std::span<const double> cumulative_losses, std::size_t k);

struct TracePoint {
  Round t;  // rounds played so far, 1..T
  double charged_loss;
  double benchmark_loss;
  double online_regret;
};

struct RoundTotals {
  std::uint64_t collisions = 0;     // player-rounds charged for a collision
  std::uint64_t quiet_rounds = 0;   // player-rounds charged for staying quiet
  double observed_loss = 0.0;       // sum of losses of sole pickers
};

struct RegretTrace {
  std::vector<TracePoint> points;
  RoundTotals totals;

  // R_T: regret at the last recorded round (always t = T).
  double final_regret() const noexcept { return points.empty() ? 0.0 : points.back().online_regret; }
};

// Tracks cumulative charged loss against the anytime best-K benchmark and
// samples a trace point every `record_every` rounds plus at the horizon.
class RegretRecorder {
 public:
  RegretRecorder(std::size_t arms, std::size_t players, Round horizon, Round record_every);

  void record_round(Round t, std::span<const double> losses,
                    std::span<const RoundOutcome> outcomes);
  // Variant for the idealized metaplayer, which has no collisions.
  void record_round(Round t, std::span<const double> losses, double charged);

  RegretTrace finish() &&;

 private:
  void maybe_record(Round t);

  std::size_t players_;
  Round horizon_;
  Round record_every_;
  double charged_ = 0.0;
  std::vector<double> cumulative_;
  RegretTrace trace_;
};

// One player's decision procedure. The engine is the only channel between
// players: each one sees nothing but its own RoundOutcome.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual PlayerAction act(Round t) = 0;
  virtual void observe(Round t, const RoundOutcome& outcome) = 0;
};

// Parameters of a Coordinate & Play game.
struct GameConfig {
  std::size_t arms = 0;     // N
  std::size_t players = 0;  // K
  Round horizon = 0;        // T
  Round block_size = 0;     // tau
  double eta = 0.0;
  Round rank_rounds = 0;    // T_R
  std::uint64_t seed = 0;
  Round record_every = 100;

  // Block size max(round((K^2 N T / ln N)^(1/3)), (K-1)N + 1), learning rate
  // sqrt(ln N / ((T / tau) N)) and ranking length ceil(K e ln T).
  static Round theorem_block_size(std::size_t arms, std::size_t players, Round horizon);
  static double theorem_eta(std::size_t arms, Round horizon, Round block_size);
  static Round theorem_rank_rounds(std::size_t players, Round horizon);
  static GameConfig theorem_defaults(std::size_t arms, std::size_t players, Round horizon,
                                     std::uint64_t seed = 0);

  // K < N < T, tau > (K-1)N, eta > 0, T_R < T, record_every >= 1.
  void validate() const;
};

// Plays every round of `losses` with the given players. Throws
// ProtocolViolation (annotated with round and player) if a strategy does.
RegretTrace run_game(std::span<const std::unique_ptr<Strategy>> players, const LossTable& losses,
                     Round record_every);

}  // namespace cnp
