#pragma once

// Oblivious loss sequences. A schedule is a piecewise-constant table of mean
// losses (or an exact file-provided table); materialize() turns it into the
// full T x N loss table before any player acts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cnp/random.hpp"
#include "cnp/types.hpp"

namespace cnp {

// Row-major T x N table of per-round arm losses in [0, 1].
class LossTable {
 public:
  LossTable(std::size_t arms, std::vector<double> row_major);

  std::size_t arms() const noexcept { return arms_; }
  Round horizon() const noexcept { return horizon_; }

  std::span<const double> row(Round t) const noexcept {
    return {losses_.data() + t * arms_, arms_};
  }
  double at(Round t, ArmIndex i) const noexcept { return losses_[t * arms_ + i]; }

 private:
  std::size_t arms_;
  Round horizon_;
  std::vector<double> losses_;
};

enum class ScheduleKind { bernoulli, piecewise_bernoulli, file };

struct MeanSegment {
  Round start;                      // first round (0-based) the means apply to
  std::vector<double> mean_losses;  // one per arm
};

class LossSchedule {
 public:
  // Bernoulli kinds. Segments must start at 0, be strictly increasing and
  // begin before the horizon.
  LossSchedule(ScheduleKind kind, std::size_t arms, Round horizon,
               std::vector<MeanSegment> segments);
  // File kind: exact losses.
  explicit LossSchedule(LossTable fixed);

  ScheduleKind kind() const noexcept { return kind_; }
  std::size_t arms() const noexcept { return arms_; }
  Round horizon() const noexcept { return horizon_; }
  const std::vector<MeanSegment>& segments() const noexcept { return segments_; }
  const std::optional<LossTable>& fixed_table() const noexcept { return fixed_; }

  // Mean loss vector in force at round t (Bernoulli kinds), or the exact
  // losses of round t (file kind).
  std::span<const double> mean_losses_at(Round t) const;

 private:
  ScheduleKind kind_;
  std::size_t arms_;
  Round horizon_;
  std::vector<MeanSegment> segments_;
  std::optional<LossTable> fixed_;
};

// Stationary Bernoulli instance: N mean rewards uniform in [0, 1], redrawn
// until the K-th and (K+1)-th best rewards are at least `gap` apart.
// Mean losses are 1 - reward.
LossSchedule experiment1_schedule(std::size_t arms, std::size_t players, Round horizon,
                                  double gap, Rng& rng);

// Link failures: arms 0-3 at mean loss 0.1 and arms 4-7 at 0.3; arm 0 jumps
// to 0.9 at floor(T/4), arm 2 at floor(T/3). Requires 8 arms.
LossSchedule experiment2_schedule(std::size_t arms, Round horizon);

// Link improvement: arm 0 at 0.9, the rest at 0.7; arm 0 drops to 0.1 at
// floor(T/4). Requires 8 arms.
LossSchedule experiment3_schedule(std::size_t arms, Round horizon);

// Comma-separated losses, one round per line, no header. Throws ParseError
// naming the 1-based line on malformed rows, ragged rows, values outside
// [0, 1] or an empty input.
LossSchedule parse_schedule(std::istream& in);
LossSchedule load_schedule_file(const std::filesystem::path& path);

// Draws every Bernoulli loss up front. Each arm has its own sub-stream of
// `seed`, so adding arms never perturbs the draws of existing ones.
LossTable materialize(const LossSchedule& schedule, std::uint64_t seed);

}  // namespace cnp
