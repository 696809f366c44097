#include "cnp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "cnp/baseline_mc.hpp"
#include "cnp/errors.hpp"
#include "cnp/metaplayer.hpp"
#include "cnp/protocol.hpp"

namespace cnp {

namespace {

constexpr std::uint64_t kRunStream = 0x72756eULL;            // "run"
constexpr std::uint64_t kScheduleStream = 0x736368656455ULL;  // "schedU"
constexpr std::uint64_t kLossStream = 0x6c6f7373ULL;          // "loss"
constexpr std::uint64_t kPlayerStream = 0x706c6179ULL;        // "play"
constexpr std::uint64_t kIdealizedStream = 0x6964656cULL;     // "idel"

using nlohmann::json;

LossSchedule build_schedule(const ExperimentSpec& spec, Round horizon, std::uint64_t seed) {
  switch (spec.scenario) {
    case Scenario::exp1: {
      Rng rng(derive_seed(seed, {kScheduleStream}));
      return experiment1_schedule(spec.arms, spec.players, horizon, spec.gap, rng);
    }
    case Scenario::exp2:
      return experiment2_schedule(spec.arms, horizon);
    case Scenario::exp3:
      return experiment3_schedule(spec.arms, horizon);
    case Scenario::file:
      break;
  }
  const LossSchedule full = load_schedule_file(spec.loss_file);
  const LossTable& table = *full.fixed_table();
  if (horizon > table.horizon()) {
    throw InvalidInput("horizon " + std::to_string(horizon) + " exceeds the " +
                       std::to_string(table.horizon()) + " rows of the loss file");
  }
  std::vector<double> prefix;
  prefix.reserve(static_cast<std::size_t>(horizon) * table.arms());
  for (Round t = 0; t < horizon; ++t) {
    const auto row = table.row(t);
    prefix.insert(prefix.end(), row.begin(), row.end());
  }
  return LossSchedule(LossTable(table.arms(), std::move(prefix)));
}

struct Stats {
  double mean;
  double std;
};

Stats population_stats(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

json parameters_json(const ResolvedParameters& p) {
  auto entry = [](auto value, ParameterSource source) {
    return json{{"value", value}, {"source", to_string(source)}};
  };
  return json{{"block_size", entry(p.game.block_size, p.block_size_source)},
              {"eta", entry(p.game.eta, p.eta_source)},
              {"rank_rounds", entry(p.game.rank_rounds, p.rank_rounds_source)},
              {"idealized_eta", entry(p.idealized_eta, p.idealized_eta_source)}};
}

json spec_json(const ExperimentSpec& spec) {
  json algos = json::array();
  for (Algorithm a : spec.algorithms) algos.push_back(to_string(a));
  return json{{"scenario", to_string(spec.scenario)},
              {"algorithms", algos},
              {"arms", spec.arms},
              {"players", spec.players},
              {"horizon", spec.horizon},
              {"runs", spec.runs},
              {"seed", spec.seed},
              {"mc_learn_rounds", spec.mc_learn_rounds},
              {"gap", spec.gap},
              {"loss_file", spec.loss_file.string()},
              {"record_every", spec.record_every},
              {"t_grid", spec.t_grid}};
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".cnp_write_probe";
  {
    std::ofstream out(probe);
    if (ec || !out) throw InvalidInput("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::string run_file_name(Algorithm a, std::size_t run) {
  std::string index = std::to_string(run);
  if (index.size() < 3) index.insert(0, 3 - index.size(), '0');
  return std::string(to_string(a)) + "_run" + index + ".csv";
}

std::vector<double> final_regrets(std::span<const RegretTrace> traces) {
  std::vector<double> finals;
  finals.reserve(traces.size());
  for (const RegretTrace& tr : traces) finals.push_back(tr.final_regret());
  return finals;
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::exp1: return "exp1";
    case Scenario::exp2: return "exp2";
    case Scenario::exp3: return "exp3";
    case Scenario::file: return "file";
  }
  return "?";
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::cp: return "cp";
    case Algorithm::cp_quietfree: return "cp-quietfree";
    case Algorithm::mc: return "mc";
    case Algorithm::idealized: return "idealized";
  }
  return "?";
}

std::string_view to_string(ParameterSource s) noexcept {
  return s == ParameterSource::theorem ? "theorem" : "override";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  for (Scenario s : {Scenario::exp1, Scenario::exp2, Scenario::exp3, Scenario::file}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (Algorithm a : {Algorithm::cp, Algorithm::cp_quietfree, Algorithm::mc, Algorithm::idealized}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (runs == 0) throw InvalidInput("need at least one run");
  if (workers == 0) throw InvalidInput("need at least one worker");
  if (algorithms.empty()) throw InvalidInput("no algorithms selected");
  if (record_every == 0) throw InvalidInput("record stride must be at least 1");
  if (players == 0 || !(players < arms)) throw InvalidInput("need 1 <= K < N");
  if (!(horizon > arms)) throw InvalidInput("need N < T");
  if ((scenario == Scenario::exp2 || scenario == Scenario::exp3) && arms != 8) {
    throw InvalidInput(std::string(to_string(scenario)) + " is defined for 8 arms");
  }
  if (scenario == Scenario::file && loss_file.empty()) throw InvalidInput("file scenario needs --loss-file");
  if (!(gap >= 0.0 && gap < 1.0)) throw InvalidInput("gap must lie in [0, 1)");
  if (overrides.block_size && !(*overrides.block_size > (players - 1) * arms)) {
    throw InvalidInput("block size must exceed (K-1)N = " + std::to_string((players - 1) * arms));
  }
  if (overrides.eta && (!(*overrides.eta > 0.0) || !std::isfinite(*overrides.eta))) {
    throw InvalidInput("eta must be positive");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > arms)) throw InvalidInput("every sweep horizon must exceed N");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw InvalidInput("sweep grid must be ascending");
  }
}

ExperimentSpec with_loss_file_shape(ExperimentSpec spec, bool arms_explicit,
                                    bool horizon_explicit) {
  if (spec.scenario != Scenario::file) return spec;
  if (spec.loss_file.empty()) throw InvalidInput("file scenario needs --loss-file");
  const LossSchedule schedule = load_schedule_file(spec.loss_file);
  if (arms_explicit && spec.arms != schedule.arms()) {
    throw InvalidInput("--arms " + std::to_string(spec.arms) + " disagrees with the " +
                       std::to_string(schedule.arms()) + " columns of the loss file");
  }
  if (horizon_explicit && spec.horizon > schedule.horizon()) {
    throw InvalidInput("--horizon exceeds the rows of the loss file");
  }
  spec.arms = schedule.arms();
  if (!horizon_explicit) spec.horizon = schedule.horizon();
  return spec;
}

ResolvedParameters resolve_parameters(const ExperimentSpec& spec, Round horizon) {
  ResolvedParameters p;
  p.game = GameConfig::theorem_defaults(spec.arms, spec.players, horizon);
  p.game.record_every = spec.record_every;
  if (spec.overrides.block_size) {
    p.game.block_size = *spec.overrides.block_size;
    p.game.eta = GameConfig::theorem_eta(spec.arms, horizon, p.game.block_size);
    p.block_size_source = ParameterSource::override_value;
  }
  if (spec.overrides.eta) {
    p.game.eta = *spec.overrides.eta;
    p.eta_source = ParameterSource::override_value;
  }
  if (spec.overrides.rank_rounds) {
    p.game.rank_rounds = *spec.overrides.rank_rounds;
    p.rank_rounds_source = ParameterSource::override_value;
  }
  p.idealized_eta = spec.overrides.eta ? *spec.overrides.eta
                                       : MetaplayerConfig::lemma_eta(spec.arms, horizon);
  p.idealized_eta_source = spec.overrides.eta ? ParameterSource::override_value
                                              : ParameterSource::theorem;
  p.game.validate();
  return p;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t run) noexcept {
  return derive_seed(base, {kRunStream, run});
}

LossTable build_losses(const ExperimentSpec& spec, Round horizon, std::size_t run) {
  const std::uint64_t seed = run_seed(spec.seed, run);
  return materialize(build_schedule(spec, horizon, seed), derive_seed(seed, {kLossStream}));
}

RegretTrace run_single(const ExperimentSpec& spec, Algorithm algorithm, Round horizon,
                       std::size_t run) {
  const ResolvedParameters params = resolve_parameters(spec, horizon);
  const LossTable losses = build_losses(spec, horizon, run);
  const std::uint64_t seed = run_seed(spec.seed, run);

  switch (algorithm) {
    case Algorithm::cp:
    case Algorithm::cp_quietfree: {
      GameConfig config = params.game;
      config.seed = derive_seed(seed, {kPlayerStream});
      const auto variant = algorithm == Algorithm::cp ? CoordinationVariant::quiet
                                                      : CoordinationVariant::quiet_free;
      const auto players = make_cp_players(config, variant);
      return run_game(players, losses, spec.record_every);
    }
    case Algorithm::mc: {
      const auto players = make_mc_players(spec.arms, spec.players, spec.mc_learn_rounds,
                                           derive_seed(seed, {kPlayerStream}));
      return run_game(players, losses, spec.record_every);
    }
    case Algorithm::idealized: {
      Rng rng(derive_seed(seed, {kIdealizedStream}));
      return run_idealized_metaplayer({spec.players, params.idealized_eta, spec.record_every},
                                      losses, rng);
    }
  }
  throw InvalidInput("unknown algorithm");
}

std::vector<AggregatePoint> aggregate_traces(std::span<const RegretTrace> traces) {
  if (traces.empty()) throw InvalidInput("nothing to aggregate");
  const std::size_t length = traces.front().points.size();
  std::vector<AggregatePoint> out;
  out.reserve(length);
  std::vector<double> column(traces.size());
  for (std::size_t j = 0; j < length; ++j) {
    const Round t = traces.front().points[j].t;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const auto& pts = traces[r].points;
      if (pts.size() != length || pts[j].t != t) throw InvalidInput("traces have different t grids");
      column[r] = pts[j].online_regret;
    }
    const Stats s = population_stats(column);
    out.push_back({t, s.mean, s.std});
  }
  return out;
}

std::optional<LineFit> fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return std::nullopt;
  std::vector<double> lx(xs.size());
  std::vector<double> ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) return std::nullopt;
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  const double slope = sxy / sxx;
  return LineFit{slope, my - slope * mx};
}

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << "t,charged_loss,benchmark_loss,online_regret\n";
  for (const TracePoint& p : trace.points) {
    out << p.t << ',' << format_number(p.charged_loss) << ',' << format_number(p.benchmark_loss)
        << ',' << format_number(p.online_regret) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregatePoint> points) {
  out << "t,mean_regret,std_regret\n";
  for (const AggregatePoint& p : points) {
    out << p.t << ',' << format_number(p.mean_regret) << ',' << format_number(p.std_regret)
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "T,mean_final_regret,std_final_regret\n";
  for (const SweepPoint& p : points) {
    out << p.horizon << ',' << format_number(p.mean_final_regret) << ','
        << format_number(p.std_final_regret) << '\n';
  }
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  if (!spec.out_dir.empty()) ensure_writable(spec.out_dir);

  ExperimentResult result;
  result.parameters = resolve_parameters(spec, spec.horizon);

  for (Algorithm algorithm : spec.algorithms) {
    AlgorithmResult ar{algorithm, std::vector<RegretTrace>(spec.runs), {}, 0.0, 0.0};
    parallel_for(spec.runs, spec.workers, [&](std::size_t run) {
      ar.traces[run] = run_single(spec, algorithm, spec.horizon, run);
    });
    ar.aggregate = aggregate_traces(ar.traces);
    const Stats s = population_stats(final_regrets(ar.traces));
    ar.mean_final_regret = s.mean;
    ar.std_final_regret = s.std;
    result.algorithms.push_back(std::move(ar));
  }

  if (!spec.out_dir.empty()) {
    json algos = json::array();
    for (const AlgorithmResult& ar : result.algorithms) {
      json files = json::array();
      for (std::size_t run = 0; run < ar.traces.size(); ++run) {
        const std::string name = run_file_name(ar.algorithm, run);
        auto out = open_output(spec.out_dir / name);
        write_trace_csv(out, ar.traces[run]);
        files.push_back(name);
      }
      const std::string aggregate_name = std::string(to_string(ar.algorithm)) + "_aggregate.csv";
      auto out = open_output(spec.out_dir / aggregate_name);
      write_aggregate_csv(out, ar.aggregate);

      json runs = json::array();
      for (std::size_t run = 0; run < ar.traces.size(); ++run) {
        const RegretTrace& tr = ar.traces[run];
        runs.push_back({{"run", run},
                        {"seed", run_seed(spec.seed, run)},
                        {"final_regret", tr.final_regret()},
                        {"collisions", tr.totals.collisions},
                        {"quiet_rounds", tr.totals.quiet_rounds}});
      }
      algos.push_back({{"algorithm", to_string(ar.algorithm)},
                       {"mean_final_regret", ar.mean_final_regret},
                       {"std_final_regret", ar.std_final_regret},
                       {"aggregate_file", aggregate_name},
                       {"trace_files", files},
                       {"runs", runs}});
    }
    json summary{{"spec", spec_json(spec)},
                 {"parameters", parameters_json(result.parameters)},
                 {"results", algos}};
    auto out = open_output(spec.out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  return result;
}

std::vector<SweepSeries> sweep_accumulated_regret(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.t_grid.empty()) throw InvalidInput("sweep needs a nonempty --t-grid");
  if (!spec.out_dir.empty()) ensure_writable(spec.out_dir);

  std::vector<SweepSeries> series;
  for (Algorithm algorithm : spec.algorithms) {
    SweepSeries s{algorithm, {}, std::nullopt};
    for (Round horizon : spec.t_grid) {
      std::vector<double> finals(spec.runs);
      parallel_for(spec.runs, spec.workers, [&](std::size_t run) {
        finals[run] = run_single(spec, algorithm, horizon, run).final_regret();
      });
      const Stats st = population_stats(finals);
      s.points.push_back({horizon, st.mean, st.std, resolve_parameters(spec, horizon)});
    }
    std::vector<double> xs, ys;
    for (const SweepPoint& p : s.points) {
      xs.push_back(static_cast<double>(p.horizon));
      ys.push_back(p.mean_final_regret);
    }
    s.fit = fit_loglog(xs, ys);
    series.push_back(std::move(s));
  }

  if (!spec.out_dir.empty()) {
    json out_series = json::array();
    for (const SweepSeries& s : series) {
      const std::string name = std::string(to_string(s.algorithm)) + "_sweep.csv";
      auto out = open_output(spec.out_dir / name);
      write_sweep_csv(out, s.points);
      json points = json::array();
      for (const SweepPoint& p : s.points) {
        points.push_back({{"T", p.horizon},
                          {"mean_final_regret", p.mean_final_regret},
                          {"std_final_regret", p.std_final_regret},
                          {"parameters", parameters_json(p.parameters)}});
      }
      json entry{{"algorithm", to_string(s.algorithm)}, {"sweep_file", name}, {"points", points}};
      entry["slope"] = s.fit ? json(s.fit->slope) : json(nullptr);
      entry["intercept"] = s.fit ? json(s.fit->intercept) : json(nullptr);
      out_series.push_back(entry);
    }
    json summary{{"spec", spec_json(spec)}, {"sweeps", out_series}};
    auto out = open_output(spec.out_dir / "sweep_summary.json");
    out << summary.dump(2) << '\n';
  }
  return series;
}

}  // namespace cnp
