// Command-line front end: simulate, solve-lp, bound, gen-graph.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sideobs/bounds.hpp"
#include "sideobs/config.hpp"
#include "sideobs/export.hpp"
#include "sideobs/harness.hpp"
#include "sideobs/json_io.hpp"

namespace fs = std::filesystem;
using namespace sideobs;

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::size_t jobs,
                 bool full_traces) {
  const Experiment exp(load_config(config_path));
  const auto result = exp.run(jobs, full_traces);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_csv(result.curves, dir / "regret.csv");
  write_svg(result.curves, dir / "regret.svg", fs::path(config_path).stem().string());
  if (full_traces) {
    detail::write_text(dir / "traces.csv", render_traces_csv(exp.config().policies, result.traces));
  }
  for (const auto& c : result.curves) {
    std::cout << c.policy << " final regret " << c.final_mean() << '\n';
  }
  return 0;
}

int cmd_solve_lp(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto s = build_scenario(cfg);
  const auto lp = solve_observability_lp(s.graph, s.activation, cfg.epsilon);
  std::cout << lp_solution_to_json(lp).dump(2) << '\n';
  return 0;
}

int cmd_bound(const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto s = build_scenario(cfg);
  const Environment env(s.graph, s.activation, build_means(cfg, s.graph.num_base_arms()), s.reward);
  const auto lp = solve_observability_lp(s.graph, s.activation, cfg.epsilon);
  const auto in = BoundInputs::from_environment(env, cfg.horizon, &lp);
  Json out;
  out["horizon"] = cfg.horizon;
  out["ucb-lp-a"] = bound_report_to_json(ucb_lp_a_bound(in));
  out["ucb-e"] = bound_report_to_json(ucb_e_bound(in));
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_gen_ba(std::size_t nodes, std::size_t attach, std::uint64_t seed, const std::string& out) {
  const auto g = generate_ba(nodes, attach, seed);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + out);
  f << graph_to_json(g).dump(2) << '\n';
  if (!f) throw Error(Errc::IoError, "write failed: " + out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandits with side-observations"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", out_file;
  std::size_t jobs = 1, nodes = 0, attach = 3;
  std::uint64_t seed = 0;
  bool full_traces = false;

  auto* sim = app.add_subcommand("simulate", "run an experiment and write regret.csv / regret.svg");
  sim->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out-dir", out_dir, "output directory");
  sim->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--full-traces", full_traces, "also write per-trial traces.csv");

  auto* lp = app.add_subcommand("solve-lp", "print the observability LP solution");
  lp->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* bound = app.add_subcommand("bound", "print regret upper bounds for a config");
  bound->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-graph", "generate a graph");
  auto* ba = gen->add_subcommand("ba", "preferential-attachment graph");
  gen->require_subcommand(1);
  ba->add_option("--nodes", nodes, "node count")->required();
  ba->add_option("--attach", attach, "edges per new node");
  ba->add_option("--seed", seed, "RNG seed");
  ba->add_option("--out", out_file, "output JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config, out_dir, jobs, full_traces);
    if (lp->parsed()) return cmd_solve_lp(config);
    if (bound->parsed()) return cmd_bound(config);
    if (ba->parsed()) return cmd_gen_ba(nodes, attach, seed, out_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
