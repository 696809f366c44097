#include "cnp/metaplayer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cnp/errors.hpp"

namespace cnp {

MetaArm::MetaArm(std::vector<ArmIndex> order) : order_(std::move(order)) {
  if (order_.empty()) throw InvalidInput("meta-arm has no members");
  std::vector<ArmIndex> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("meta-arm members must be distinct");
  }
}

std::vector<ArmIndex> MetaArm::members() const {
  std::vector<ArmIndex> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

bool MetaArm::contains(ArmIndex arm) const noexcept {
  return std::find(order_.begin(), order_.end(), arm) != order_.end();
}

EstimatorState::EstimatorState(std::size_t arms, std::size_t players, double eta)
    : players_(players), eta_(eta), cumulative_(arms, 0.0) {
  if (arms == 0) throw InvalidInput("estimator needs at least one arm");
  if (players == 0 || players > arms) throw InvalidInput("need 1 <= K <= N");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("learning rate must be positive");
}

double EstimatorState::marginal(ArmIndex arm) const {
  return kdpp::marginal_inclusion(weights(), players_, arm);
}

void EstimatorState::apply(std::span<const double> estimates) {
  if (estimates.size() != cumulative_.size()) throw InvalidInput("estimate vector has wrong size");
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!(estimates[i] >= 0.0) || !std::isfinite(estimates[i])) {
      throw InvalidInput("loss estimates must be finite and nonnegative");
    }
  }
  for (std::size_t i = 0; i < estimates.size(); ++i) cumulative_[i] += estimates[i];
  ++updates_;
}

MetaArm draw_meta_arm(const EstimatorState& state, Rng& rng) {
  std::vector<ArmIndex> order = kdpp::sample_k_subset(state.weights(), state.players(), rng);
  shuffle(std::span<ArmIndex>(order), rng);
  return MetaArm(std::move(order));
}

std::vector<double> estimate_round_loss(const EstimatorState& state, const MetaArm& meta,
                                        const MetaFeedback& feedback) {
  if (!meta.contains(feedback.observed_arm)) {
    throw InvalidInput("observed arm " + std::to_string(feedback.observed_arm) +
                       " is not in the meta-arm");
  }
  if (!(feedback.observed_value >= 0.0 && feedback.observed_value <= 1.0)) {
    throw InvalidInput("observed loss outside [0, 1]");
  }
  const double marginal = state.marginal(feedback.observed_arm);
  if (!(marginal > 0.0)) throw NumericalInstability("observed arm has zero inclusion probability");

  std::vector<double> estimates(state.arms(), 0.0);
  estimates[feedback.observed_arm] =
      static_cast<double>(state.players()) * feedback.observed_value / marginal;
  return estimates;
}

EstimatorState apply_estimates(EstimatorState state, std::span<const double> estimates) {
  state.apply(estimates);
  return state;
}

double MetaplayerConfig::lemma_eta(std::size_t arms, Round horizon) {
  const double n = static_cast<double>(arms);
  return std::sqrt(std::log(n) / (static_cast<double>(horizon) * n));
}

RegretTrace run_idealized_metaplayer(const MetaplayerConfig& config, const LossTable& losses,
                                     Rng& rng) {
  EstimatorState state(losses.arms(), config.players, config.eta);
  RegretRecorder recorder(losses.arms(), config.players, losses.horizon(), config.record_every);

  for (Round t = 0; t < losses.horizon(); ++t) {
    const MetaArm meta = draw_meta_arm(state, rng);
    const auto row = losses.row(t);
    double charged = 0.0;
    for (ArmIndex arm : meta.order()) charged += row[arm];

    const ArmIndex observed = meta.own();
    state.apply(estimate_round_loss(state, meta, {observed, row[observed]}));
    recorder.record_round(t, row, charged);
  }
  return std::move(recorder).finish();
}

}  // namespace cnp
