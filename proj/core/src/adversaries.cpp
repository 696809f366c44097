#include "cnp/adversaries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <string>
#include <string_view>

#include "cnp/errors.hpp"

namespace cnp {

namespace {

void check_unit_interval(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput(std::string(what) + " " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

LossTable::LossTable(std::size_t arms, std::vector<double> row_major)
    : arms_(arms), horizon_(0), losses_(std::move(row_major)) {
  if (arms_ == 0) throw InvalidInput("loss table needs at least one arm");
  if (losses_.size() % arms_ != 0) throw InvalidInput("loss table is not rectangular");
  check_unit_interval(losses_, "loss");
  horizon_ = losses_.size() / arms_;
}

LossSchedule::LossSchedule(ScheduleKind kind, std::size_t arms, Round horizon,
                           std::vector<MeanSegment> segments)
    : kind_(kind), arms_(arms), horizon_(horizon), segments_(std::move(segments)) {
  if (kind_ == ScheduleKind::file) throw InvalidInput("file schedules are built from a LossTable");
  if (arms_ == 0 || horizon_ == 0) throw InvalidInput("schedule needs arms and a horizon");
  if (segments_.empty() || segments_.front().start != 0) {
    throw InvalidInput("schedule segments must start at round 0");
  }
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    const MeanSegment& seg = segments_[s];
    if (seg.mean_losses.size() != arms_) throw InvalidInput("segment has wrong arm count");
    check_unit_interval(seg.mean_losses, "mean loss");
    if (seg.start >= horizon_) throw InvalidInput("segment starts after the horizon");
    if (s > 0 && seg.start <= segments_[s - 1].start) {
      throw InvalidInput("segments must be strictly increasing");
    }
  }
}

LossSchedule::LossSchedule(LossTable fixed)
    : kind_(ScheduleKind::file),
      arms_(fixed.arms()),
      horizon_(fixed.horizon()),
      fixed_(std::move(fixed)) {
  if (horizon_ == 0) throw InvalidInput("empty loss table");
}

std::span<const double> LossSchedule::mean_losses_at(Round t) const {
  if (fixed_) return fixed_->row(t);
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](Round r, const MeanSegment& seg) { return r < seg.start; });
  return std::prev(it)->mean_losses;
}

LossSchedule experiment1_schedule(std::size_t arms, std::size_t players, Round horizon,
                                  double gap, Rng& rng) {
  if (!(players < arms)) throw InvalidInput("experiment 1 needs fewer players than arms");
  if (!(gap >= 0.0 && gap < 1.0)) throw InvalidInput("gap must lie in [0, 1)");

  std::vector<double> rewards(arms);
  std::vector<double> sorted(arms);
  for (;;) {
    for (double& r : rewards) r = uniform01(rng);
    sorted = rewards;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted[players - 1] - sorted[players] >= gap) break;
  }
  std::vector<double> mean_losses(arms);
  std::transform(rewards.begin(), rewards.end(), mean_losses.begin(),
                 [](double r) { return 1.0 - r; });
  return LossSchedule(ScheduleKind::bernoulli, arms, horizon, {{0, std::move(mean_losses)}});
}

LossSchedule experiment2_schedule(std::size_t arms, Round horizon) {
  if (arms != 8) throw InvalidInput("experiment 2 is defined for 8 arms");
  std::vector<double> initial{0.1, 0.1, 0.1, 0.1, 0.3, 0.3, 0.3, 0.3};
  std::vector<double> first_failure = initial;
  first_failure[0] = 0.9;
  std::vector<double> second_failure = first_failure;
  second_failure[2] = 0.9;
  return LossSchedule(ScheduleKind::piecewise_bernoulli, arms, horizon,
                      {{0, std::move(initial)},
                       {horizon / 4, std::move(first_failure)},
                       {horizon / 3, std::move(second_failure)}});
}

LossSchedule experiment3_schedule(std::size_t arms, Round horizon) {
  if (arms != 8) throw InvalidInput("experiment 3 is defined for 8 arms");
  std::vector<double> initial(8, 0.7);
  initial[0] = 0.9;
  std::vector<double> improved = initial;
  improved[0] = 0.1;
  return LossSchedule(ScheduleKind::piecewise_bernoulli, arms, horizon,
                      {{0, std::move(initial)}, {horizon / 4, std::move(improved)}});
}

LossSchedule parse_schedule(std::istream& in) {
  std::vector<double> values;
  std::size_t arms = 0;
  std::size_t line_no = 0;
  std::string line;
  std::size_t blank_run_start = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) {
      if (blank_run_start == 0) blank_run_start = line_no;
      continue;
    }
    // Blank lines are tolerated only at the end of the file.
    if (blank_run_start != 0) throw ParseError(blank_run_start, "empty row");

    std::size_t fields = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = row.find(',', pos);
      const std::string_view field =
          trim(row.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      double v = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
        throw ParseError(line_no, "field " + std::to_string(fields + 1) + " is not a number: '" +
                                      std::string(field) + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ParseError(line_no, "value " + std::string(field) + " outside [0, 1]");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (arms == 0) {
      arms = fields;
    } else if (fields != arms) {
      throw ParseError(line_no, "expected " + std::to_string(arms) + " columns, found " +
                                    std::to_string(fields));
    }
  }
  if (values.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "no loss rows");
  return LossSchedule(LossTable(arms, std::move(values)));
}

LossSchedule load_schedule_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open loss file " + path.string());
  return parse_schedule(in);
}

LossTable materialize(const LossSchedule& schedule, std::uint64_t seed) {
  if (schedule.fixed_table()) return *schedule.fixed_table();

  const std::size_t arms = schedule.arms();
  const Round horizon = schedule.horizon();
  const auto& segments = schedule.segments();
  std::vector<double> losses(static_cast<std::size_t>(horizon) * arms);
  for (std::size_t i = 0; i < arms; ++i) {
    Rng rng(derive_seed(seed, {i}));
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const Round end = s + 1 < segments.size() ? segments[s + 1].start : horizon;
      const double p = segments[s].mean_losses[i];
      for (Round t = segments[s].start; t < end; ++t) {
        losses[t * arms + i] = bernoulli(rng, p) ? 1.0 : 0.0;
      }
    }
  }
  return LossTable(arms, std::move(losses));
}

}  // namespace cnp
