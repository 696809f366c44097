#pragma once

// Seeded multi-run experiments over the three synthetic scenarios or a loss
// file, with per-run traces, cross-run aggregates and horizon sweeps.
//
// Output files (all CSV with a single header row):
//   <algo>_run<i>.csv     t,charged_loss,benchmark_loss,online_regret
//   <algo>_aggregate.csv  t,mean_regret,std_regret
//   <algo>_sweep.csv      T,mean_final_regret,std_final_regret
//   summary.json          resolved parameters, their sources, final regrets and fits

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnp/adversaries.hpp"
#include "cnp/engine.hpp"
#include "cnp/types.hpp"

namespace cnp {

enum class Scenario { exp1, exp2, exp3, file };
enum class Algorithm { cp, cp_quietfree, mc, idealized };

std::string_view to_string(Scenario s) noexcept;
std::string_view to_string(Algorithm a) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

struct ParameterOverrides {
  std::optional<Round> block_size;
  std::optional<double> eta;
  std::optional<Round> rank_rounds;
};

struct ExperimentSpec {
  Scenario scenario = Scenario::exp1;
  std::vector<Algorithm> algorithms{Algorithm::cp, Algorithm::mc};
  std::size_t arms = 8;
  std::size_t players = 4;
  Round horizon = 240000;
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  ParameterOverrides overrides;
  Round mc_learn_rounds = 3000;
  double gap = 0.05;  // minimum reward gap for the stationary scenario
  std::filesystem::path loss_file;
  Round record_every = 100;
  std::filesystem::path out_dir;  // empty: keep results in memory only
  std::vector<Round> t_grid;      // horizons for sweep_accumulated_regret
  std::size_t workers = 1;

  // Throws InvalidInput on an inconsistent spec.
  void validate() const;
};

// Reads the loss file (file scenario) and copies its shape into arms and
// horizon. Throws InvalidInput if explicit values disagree with the file.
ExperimentSpec with_loss_file_shape(ExperimentSpec spec, bool arms_explicit, bool horizon_explicit);

enum class ParameterSource { theorem, override_value };
std::string_view to_string(ParameterSource s) noexcept;

struct ResolvedParameters {
  GameConfig game;  // seed left at 0; each run gets its own
  ParameterSource block_size_source = ParameterSource::theorem;
  ParameterSource eta_source = ParameterSource::theorem;
  ParameterSource rank_rounds_source = ParameterSource::theorem;
  double idealized_eta = 0.0;  // learning rate of the idealized metaplayer
  ParameterSource idealized_eta_source = ParameterSource::theorem;
};

// Explicit override first, otherwise the theoretical formula for `horizon`.
ResolvedParameters resolve_parameters(const ExperimentSpec& spec, Round horizon);

// Seed of run `run`; depends only on (base, run).
std::uint64_t run_seed(std::uint64_t base, std::size_t run) noexcept;

// The oblivious loss table faced by every algorithm in run `run`.
LossTable build_losses(const ExperimentSpec& spec, Round horizon, std::size_t run);

RegretTrace run_single(const ExperimentSpec& spec, Algorithm algorithm, Round horizon,
                       std::size_t run);

struct AggregatePoint {
  Round t;
  double mean_regret;
  double std_regret;  // population standard deviation across runs
};

// Per-t mean and standard deviation of online regret. Throws InvalidInput if
// the traces do not share the same t grid.
std::vector<AggregatePoint> aggregate_traces(std::span<const RegretTrace> traces);

struct LineFit {
  double slope;
  double intercept;
};

// Least-squares line through (log x, log y). Empty if fewer than two distinct
// x values or any y is not positive.
std::optional<LineFit> fit_loglog(std::span<const double> xs, std::span<const double> ys);

// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

void write_trace_csv(std::ostream& out, const RegretTrace& trace);
void write_aggregate_csv(std::ostream& out, std::span<const AggregatePoint> points);

struct AlgorithmResult {
  Algorithm algorithm;
  std::vector<RegretTrace> traces;  // index = run
  std::vector<AggregatePoint> aggregate;
  double mean_final_regret = 0.0;
  double std_final_regret = 0.0;
};

struct ExperimentResult {
  ResolvedParameters parameters;
  std::vector<AlgorithmResult> algorithms;
};

// Runs every algorithm for spec.runs seeds and, if spec.out_dir is set, writes
// the raw traces, aggregates and summary.json there.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SweepPoint {
  Round horizon;
  double mean_final_regret;
  double std_final_regret;
  ResolvedParameters parameters;
};

struct SweepSeries {
  Algorithm algorithm;
  std::vector<SweepPoint> points;
  std::optional<LineFit> fit;  // log mean R_T against log T
};

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

// Runs every horizon of spec.t_grid (ascending) and fits the loglog slope.
std::vector<SweepSeries> sweep_accumulated_regret(const ExperimentSpec& spec);

// Calls fn(0..count-1) on up to `workers` threads. Exceptions are rethrown
// on the calling thread.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cnp
