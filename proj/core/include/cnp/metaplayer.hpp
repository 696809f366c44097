#pragma once

// EXP3 over meta-arms (sets of K distinct arms). The per-arm cumulative loss
// estimates induce Pr[I] proportional to exp(-eta sum_{i in I} L_i), which the
// kdpp module samples and marginalizes exactly.

#include <cstdint>
#include <span>
#include <vector>

#include "cnp/adversaries.hpp"
#include "cnp/engine.hpp"
#include "cnp/kdpp.hpp"
#include "cnp/random.hpp"
#include "cnp/types.hpp"

namespace cnp {

// K distinct arms in play order. Position 0 is the coordinator's (or the
// idealized observer's) own arm; position r goes to the player of rank r.
class MetaArm {
 public:
  explicit MetaArm(std::vector<ArmIndex> order);

  std::size_t size() const noexcept { return order_.size(); }
  ArmIndex at(std::size_t position) const noexcept { return order_[position]; }
  ArmIndex own() const noexcept { return order_.front(); }
  std::span<const ArmIndex> order() const noexcept { return order_; }

  std::vector<ArmIndex> members() const;  // ascending
  bool contains(ArmIndex arm) const noexcept;

 private:
  std::vector<ArmIndex> order_;
};

struct MetaFeedback {
  ArmIndex observed_arm;
  double observed_value;  // a round loss, or a block-average loss, in [0, 1]
};

class EstimatorState {
 public:
  EstimatorState(std::size_t arms, std::size_t players, double eta);

  std::size_t arms() const noexcept { return cumulative_.size(); }
  std::size_t players() const noexcept { return players_; }
  double eta() const noexcept { return eta_; }
  std::uint64_t updates() const noexcept { return updates_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  kdpp::WeightVector weights() const { return kdpp::stabilize(cumulative_, eta_); }
  double marginal(ArmIndex arm) const;

  // cumulative += estimates; one more update on the counter.
  void apply(std::span<const double> estimates);

 private:
  std::size_t players_;
  double eta_;
  std::uint64_t updates_ = 0;
  std::vector<double> cumulative_;
};

// Members drawn from the exponential-weights K-subset distribution, then put
// in uniformly random order, so position 0 is uniform over the members.
MetaArm draw_meta_arm(const EstimatorState& state, Rng& rng);

// Importance-weighted estimate: K * value / Pr[arm in I] at the observed arm
// and 0 elsewhere. The factor K undoes the 1/K chance that this member was the
// observed one, making the estimate unbiased.
std::vector<double> estimate_round_loss(const EstimatorState& state, const MetaArm& meta,
                                        const MetaFeedback& feedback);

EstimatorState apply_estimates(EstimatorState state, std::span<const double> estimates);

struct MetaplayerConfig {
  std::size_t players = 0;
  double eta = 0.0;
  Round record_every = 100;

  // sqrt(ln N / (T N)), the rate behind the 2K sqrt(T N ln N) guarantee.
  static double lemma_eta(std::size_t arms, Round horizon);
};

// Full-communication idealization: every round the K sampled arms are all
// played (no collisions) and only the arm at position 0 is observed. The trace
// is the meta-regret against the best K distinct arms.
RegretTrace run_idealized_metaplayer(const MetaplayerConfig& config, const LossTable& losses,
                                     Rng& rng);

}  // namespace cnp
