#include "cnp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "cnp/errors.hpp"

namespace cnp {

void resolve_round(std::span<const PlayerAction> actions, std::span<const double> losses,
                   std::span<RoundOutcome> outcomes) {
  if (outcomes.size() != actions.size()) throw InvalidInput("outcome buffer has wrong size");
  for (const PlayerAction& a : actions) {
    if (!a.is_quiet() && a.arm() >= losses.size()) {
      throw InvalidInput("arm index " + std::to_string(a.arm()) + " out of range");
    }
  }
  // K is small, so a quadratic scan beats any per-round allocation.
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const PlayerAction a = actions[k];
    if (a.is_quiet()) {
      outcomes[k] = RoundOutcome::quiet_charged();
      continue;
    }
    bool shared = false;
    for (std::size_t m = 0; m < actions.size() && !shared; ++m) {
      shared = m != k && actions[m] == a;
    }
    outcomes[k] = shared ? RoundOutcome::collision() : RoundOutcome::observed(losses[a.arm()]);
  }
}

std::vector<RoundOutcome> resolve_round(std::span<const PlayerAction> actions,
                                        std::span<const double> losses) {
  std::vector<RoundOutcome> outcomes(actions.size());
  resolve_round(actions, losses, outcomes);
  return outcomes;
}

double benchmark_best_k(std::span<const double> cumulative_losses, std::size_t k) {
  if (k > cumulative_losses.size()) throw InvalidInput("benchmark size exceeds arm count");
  std::vector<double> sorted(cumulative_losses.begin(), cumulative_losses.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k));
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
}

RegretRecorder::RegretRecorder(std::size_t arms, std::size_t players, Round horizon,
                               Round record_every)
    : players_(players),
      horizon_(horizon),
      record_every_(record_every),
      cumulative_(arms, 0.0) {
  if (record_every_ == 0) throw InvalidInput("record stride must be at least 1");
  if (players_ > arms) throw InvalidInput("more players than arms");
  trace_.points.reserve(static_cast<std::size_t>(horizon_ / record_every_) + 1);
}

void RegretRecorder::record_round(Round t, std::span<const double> losses,
                                  std::span<const RoundOutcome> outcomes) {
  for (const RoundOutcome& o : outcomes) {
    switch (o.kind) {
      case RoundOutcome::Kind::collision:
        ++trace_.totals.collisions;
        break;
      case RoundOutcome::Kind::quiet_charged:
        ++trace_.totals.quiet_rounds;
        break;
      case RoundOutcome::Kind::observed:
        trace_.totals.observed_loss += o.loss;
        break;
    }
    charged_ += o.charged();
  }
  for (std::size_t i = 0; i < cumulative_.size(); ++i) cumulative_[i] += losses[i];
  maybe_record(t);
}

void RegretRecorder::record_round(Round t, std::span<const double> losses, double charged) {
  trace_.totals.observed_loss += charged;
  charged_ += charged;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) cumulative_[i] += losses[i];
  maybe_record(t);
}

void RegretRecorder::maybe_record(Round t) {
  const Round played = t + 1;
  if (played % record_every_ != 0 && played != horizon_) return;
  const double benchmark = benchmark_best_k(cumulative_, players_);
  trace_.points.push_back({played, charged_, benchmark, charged_ - benchmark});
}

RegretTrace RegretRecorder::finish() && { return std::move(trace_); }

Round GameConfig::theorem_block_size(std::size_t arms, std::size_t players, Round horizon) {
  const double k = static_cast<double>(players);
  const double n = static_cast<double>(arms);
  const double raw = std::cbrt(k * k * n * static_cast<double>(horizon) / std::log(n));
  const auto rounded = static_cast<Round>(std::llround(raw));
  const Round minimum = static_cast<Round>((players - 1) * arms + 1);
  return std::max(rounded, minimum);
}

double GameConfig::theorem_eta(std::size_t arms, Round horizon, Round block_size) {
  const double n = static_cast<double>(arms);
  const double blocks = static_cast<double>(horizon) / static_cast<double>(block_size);
  return std::sqrt(std::log(n) / (blocks * n));
}

Round GameConfig::theorem_rank_rounds(std::size_t players, Round horizon) {
  return static_cast<Round>(std::ceil(static_cast<double>(players) * std::numbers::e *
                                      std::log(static_cast<double>(horizon))));
}

GameConfig GameConfig::theorem_defaults(std::size_t arms, std::size_t players, Round horizon,
                                        std::uint64_t seed) {
  GameConfig config;
  config.arms = arms;
  config.players = players;
  config.horizon = horizon;
  config.block_size = theorem_block_size(arms, players, horizon);
  config.eta = theorem_eta(arms, horizon, config.block_size);
  config.rank_rounds = theorem_rank_rounds(players, horizon);
  config.seed = seed;
  return config;
}

void GameConfig::validate() const {
  if (players == 0) throw InvalidInput("need at least one player");
  if (!(players < arms)) throw InvalidInput("need fewer players than arms (K < N)");
  if (!(arms < horizon)) throw InvalidInput("need a horizon longer than the arm count (N < T)");
  if (!(block_size > (players - 1) * arms)) {
    throw InvalidInput("block size " + std::to_string(block_size) +
                       " leaves no Play phase; need tau > (K-1)N = " +
                       std::to_string((players - 1) * arms));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("learning rate must be positive");
  if (rank_rounds > horizon) throw InvalidInput("ranking phase longer than the horizon");
  if (record_every == 0) throw InvalidInput("record stride must be at least 1");
}

RegretTrace run_game(std::span<const std::unique_ptr<Strategy>> players, const LossTable& losses,
                     Round record_every) {
  const std::size_t k = players.size();
  if (k == 0) throw InvalidInput("no players");
  RegretRecorder recorder(losses.arms(), k, losses.horizon(), record_every);
  std::vector<PlayerAction> actions(k, PlayerAction::quiet());
  std::vector<RoundOutcome> outcomes(k);

  std::size_t current = 0;
  Round t = 0;
  try {
    for (; t < losses.horizon(); ++t) {
      for (current = 0; current < k; ++current) actions[current] = players[current]->act(t);
      const auto row = losses.row(t);
      resolve_round(actions, row, outcomes);
      for (current = 0; current < k; ++current) players[current]->observe(t, outcomes[current]);
      recorder.record_round(t, row, outcomes);
    }
  } catch (const ProtocolViolation& e) {
    throw ProtocolViolation("player " + std::to_string(current) + " at round " +
                            std::to_string(t + 1) + ": " + e.what());
  }
  return std::move(recorder).finish();
}

}  // namespace cnp
