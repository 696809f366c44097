// cnp_sim: seeded multi-run Coordinate & Play experiments.
//
//   cnp_sim --scenario exp2 --algo cp,mc --horizon 60000 --out results/exp2
//   cnp_sim --scenario exp1 --algo cp --t-grid 10000,20000,40000,80000 --out results/sweep
//
// Every flag can also be given in a key=value file passed with --config.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cnp/errors.hpp"
#include "cnp/experiment.hpp"

namespace {

void print_parameters(const cnp::ResolvedParameters& p) {
  std::printf("  tau = %llu (%s)\n", static_cast<unsigned long long>(p.game.block_size),
              std::string(cnp::to_string(p.block_size_source)).c_str());
  std::printf("  eta = %.6g (%s)\n", p.game.eta, std::string(cnp::to_string(p.eta_source)).c_str());
  std::printf("  T_R = %llu (%s)\n", static_cast<unsigned long long>(p.game.rank_rounds),
              std::string(cnp::to_string(p.rank_rounds_source)).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-player adversarial bandit simulations"};
  app.set_config("--config", "", "key=value file mirroring the command line flags");

  cnp::ExperimentSpec spec;
  std::string scenario = "exp1";
  std::vector<std::string> algos{"cp", "mc"};
  std::string loss_file;
  std::string out_dir;
  cnp::Round block_size = 0;
  double eta = 0.0;
  cnp::Round rank_rounds = 0;

  app.add_option("--scenario", scenario, "exp1 | exp2 | exp3 | file")
      ->check(CLI::IsMember({"exp1", "exp2", "exp3", "file"}))
      ->capture_default_str();
  app.add_option("--algo", algos, "cp, cp-quietfree, mc, idealized (repeat or comma separate)")
      ->delimiter(',')
      ->check(CLI::IsMember({"cp", "cp-quietfree", "mc", "idealized"}))
      ->capture_default_str();
  auto* arms_opt = app.add_option("--arms", spec.arms, "N")->capture_default_str();
  app.add_option("--players", spec.players, "K")->capture_default_str();
  auto* horizon_opt = app.add_option("--horizon", spec.horizon, "T")->capture_default_str();
  app.add_option("--runs", spec.runs)->capture_default_str();
  app.add_option("--seed", spec.seed, "base seed")->capture_default_str();
  auto* tau_opt = app.add_option("--block-size", block_size, "tau (default from the theorem)");
  auto* eta_opt = app.add_option("--eta", eta, "learning rate (default from the theorem)");
  auto* rank_opt = app.add_option("--rank-rounds", rank_rounds, "T_R (default ceil(K e ln T))");
  app.add_option("--mc-learn-rounds", spec.mc_learn_rounds, "T_0 of Musical Chairs")
      ->capture_default_str();
  app.add_option("--gap", spec.gap, "reward gap of the exp1 instances")->capture_default_str();
  app.add_option("--loss-file", loss_file, "CSV of losses, one round per line");
  app.add_option("--record-every", spec.record_every, "trace stride")->capture_default_str();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--t-grid", spec.t_grid, "horizons for an accumulated-regret sweep")
      ->delimiter(',');
  app.add_option("--workers", spec.workers, "concurrent runs")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    spec.scenario = *cnp::parse_scenario(scenario);
    spec.algorithms.clear();
    for (const std::string& a : algos) spec.algorithms.push_back(*cnp::parse_algorithm(a));
    spec.loss_file = loss_file;
    spec.out_dir = out_dir;
    if (tau_opt->count() > 0) spec.overrides.block_size = block_size;
    if (eta_opt->count() > 0) spec.overrides.eta = eta;
    if (rank_opt->count() > 0) spec.overrides.rank_rounds = rank_rounds;
    spec = cnp::with_loss_file_shape(spec, arms_opt->count() > 0, horizon_opt->count() > 0);

    if (!spec.t_grid.empty()) {
      const auto series = cnp::sweep_accumulated_regret(spec);
      for (const auto& s : series) {
        std::printf("%s\n", std::string(cnp::to_string(s.algorithm)).c_str());
        for (const auto& p : s.points) {
          std::printf("  T=%llu  R_T = %.2f +- %.2f\n", static_cast<unsigned long long>(p.horizon),
                      p.mean_final_regret, p.std_final_regret);
        }
        if (s.fit) {
          std::printf("  loglog slope %.4f, intercept %.4f\n", s.fit->slope, s.fit->intercept);
        } else {
          std::printf("  loglog slope absent (fewer than two horizons)\n");
        }
      }
      return 0;
    }

    const cnp::ExperimentResult result = cnp::run_experiment(spec);
    std::printf("%s, N=%zu K=%zu T=%llu, %zu runs\n", std::string(cnp::to_string(spec.scenario)).c_str(),
                spec.arms, spec.players, static_cast<unsigned long long>(spec.horizon), spec.runs);
    print_parameters(result.parameters);
    for (const auto& ar : result.algorithms) {
      std::printf("%-13s R_T = %.2f +- %.2f\n", std::string(cnp::to_string(ar.algorithm)).c_str(),
                  ar.mean_final_regret, ar.std_final_regret);
    }
  } catch (const std::exception& e) {
    std::cerr << "cnp_sim: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
