// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lp_oracle.hpp"
#include "sideobs/bounds.hpp"
#include "sideobs/config.hpp"
#include "sideobs/export.hpp"
#include "sideobs/harness.hpp"
#include "sideobs/ledger.hpp"
#include "sideobs/schedule.hpp"

using namespace sideobs;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(SIDEOBS_SOURCE_DIR) / "configs";

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const AggregateCurve& curve_of(const ExperimentResult& r, const std::string& id) {
  for (const auto& c : r.curves) {
    if (c.policy == id) return c;
  }
  throw Error(Errc::InvalidParams, "no curve for " + id);
}

Verdict ac1_lp_oracle() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst_rel = 0.0, worst_violation = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng, 10);
    const auto p = build_lp(inst.graph, inst.act, kDefaultEpsilon);
    const auto s = solve(p, inst.graph, inst.act);
    const auto expect = oracle::vertex_minimum(p.program);
    if (!expect) {
      v.check(false, "oracle found no vertex on instance " + std::to_string(trial));
      continue;
    }
    worst_rel = std::max(worst_rel, std::abs(s.objective() - *expect) / std::abs(*expect));
    const auto& lp = p.program;
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
      double lhs = 0.0;
      for (std::size_t k = 0; k < lp.num_vars; ++k) lhs += lp.rows[r][k] * s.z()[k];
      worst_violation = std::max(worst_violation, lp.rhs[r] - lhs);
    }
    for (double z : s.z()) worst_violation = std::max(worst_violation, -z);
  }
  const double secs = seconds_since(start);
  v.check(worst_rel <= 1e-6, "objective rel error " + fmt(worst_rel));
  v.check(worst_violation <= 1e-9, "constraint violation " + fmt(worst_violation));
  v.check(secs < 10.0, "runtime " + fmt(secs) + " s");
  v.detail += (v.detail.empty() ? "" : " | ") + std::string("max rel err ") + fmt(worst_rel) +
              ", max violation " + fmt(std::max(0.0, worst_violation)) + ", " + fmt(secs) + " s";
  return v;
}

Verdict ac2_dominance() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  auto cfg = load_config(kConfigs / "dominance.json");
  std::string summary;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    cfg.seed = seed;
    const Experiment exp(cfg);
    const auto env = exp.environment();
    const auto in = BoundInputs::from_environment(*env, cfg.horizon, exp.lp());
    const double b1 = ucb_lp_a_bound(in).total;
    const double b2 = ucb_e_bound(in).total;
    const auto res = exp.run(jobs());
    const double lpa = curve_of(res, "ucb-lp-a").final_mean();
    const double e = curve_of(res, "ucb-e").final_mean();
    v.check(lpa <= b1, "seed " + std::to_string(seed) + ": ucb-lp-a " + fmt(lpa) + " > " + fmt(b1));
    v.check(e <= b2, "seed " + std::to_string(seed) + ": ucb-e " + fmt(e) + " > " + fmt(b2));
    summary += " s" + std::to_string(seed) + "(" + fmt(lpa) + "/" + fmt(b1) + ", " + fmt(e) + "/" +
               fmt(b2) + ")";
  }
  const double secs = seconds_since(start);
  v.check(secs < 120.0, "runtime " + fmt(secs) + " s");
  v.detail += (v.detail.empty() ? "" : " |") + summary + ", " + fmt(secs) + " s";
  return v;
}

Verdict ac3_elimination_schedule() {
  Verdict v;
  // Means are 0 or 1, so samples never vary.
  const std::vector<Edge> reward{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  std::vector<Edge> observe = reward;
  observe.push_back({0, 2});
  observe.push_back({3, 1});
  const Environment env(build_graph(4, 4, observe, reward), ActivationStructure({{0, 1, 2, 3}}, {1.0}, 4),
                        {1.0, 0.0, 0.0, 0.0}, RewardModel::identity());
  const std::uint64_t horizon = 100000;
  const auto lp = solve_observability_lp(env.graph(), env.activation());
  int ok_trials = 0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    bool ok = true;
    for (std::string_view id : {"ucb-lp-a", "ucb-e"}) {
      auto policy = make_policy(id, env, &lp, horizon);
      simulate(env, *policy, 5000, TrialSeeds::derive(99, id, trial));
      const auto& p = static_cast<const UcbLpA&>(*policy);
      for (std::size_t j = 1; j < 4; ++j) {
        const auto round = p.elimination_round(j, 0);
        const int bound = m_ja(env.gaps()[0][j], horizon);
        if (!round || *round > bound) {
          ok = false;
          v.check(false, std::string(id) + " trial " + std::to_string(trial) + " action " +
                             std::to_string(j) + " round " + (round ? std::to_string(*round) : "none") +
                             " > " + std::to_string(bound));
        }
      }
    }
    ok_trials += ok;
  }
  v.detail += (v.detail.empty() ? "" : " | ") + std::to_string(ok_trials) + "/20 trials";
  return v;
}

Verdict ac4_ba_social() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load_config(kConfigs / "ba50.json");
  const auto res = Experiment(cfg).run(jobs());
  const double secs = seconds_since(start);
  const double lpa = curve_of(res, "ucb-lp-a").final_mean();
  const double e = curve_of(res, "ucb-e").final_mean();
  const double n = curve_of(res, "ucb-n").final_mean();
  const double maxn = curve_of(res, "ucb-maxn").final_mean();
  v.check(lpa < e, "(a) ucb-lp-a " + fmt(lpa) + " >= ucb-e " + fmt(e));
  const std::uint64_t t80 = cfg.horizon * 4 / 5;
  std::string plateau;
  for (const char* id : {"ucb-lp-a", "ucb-e"}) {
    const auto& c = curve_of(res, id);
    const double tail = c.final_mean() - c.mean_at(t80);
    const double share = c.final_mean() > 0.0 ? tail / c.final_mean() : 0.0;
    v.check(share <= 0.05, std::string("(b) ") + id + " tail share " + fmt(share));
    plateau += std::string(" ") + id + " tail " + fmt(share);
  }
  v.check(maxn >= n, "(c) ucb-maxn " + fmt(maxn) + " < ucb-n " + fmt(n));
  v.check(secs < 300.0, "runtime " + fmt(secs) + " s");
  v.detail += (v.detail.empty() ? "" : " | ") + std::string("lp-a ") + fmt(lpa) + ", e " + fmt(e) +
              ", n " + fmt(n) + ", maxn " + fmt(maxn) + "," + plateau + ", " + fmt(secs) + " s";
  return v;
}

Verdict ac5_routing() {
  Verdict v;
  const auto cfg = load_config(kConfigs / "routing.json");
  const Experiment exp(cfg);
  const auto res = exp.run(jobs());
  const double lpa = curve_of(res, "ucb-lp-a").final_mean();
  const double e = curve_of(res, "ucb-e").final_mean();
  const double n = curve_of(res, "ucb-n").final_mean();
  const double ucb1 = curve_of(res, "ucb1").final_mean();
  v.check(lpa < e, "(a) ucb-lp-a " + fmt(lpa) + " >= ucb-e " + fmt(e));
  std::size_t same = 0;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    std::vector<std::size_t> a_n, a_maxn;
    exp.run_trial("ucb-n", trial, &a_n);
    exp.run_trial("ucb-maxn", trial, &a_maxn);
    same += a_n == a_maxn;
  }
  v.check(same == cfg.trials, "(b) identical traces in " + std::to_string(same) + " trials");
  v.check(ucb1 > n, "(c) ucb1 " + fmt(ucb1) + " <= ucb-n " + fmt(n));
  v.detail += (v.detail.empty() ? "" : " | ") + std::string("lp-a ") + fmt(lpa) + ", e " + fmt(e) +
              ", n " + fmt(n) + ", ucb1 " + fmt(ucb1) + ", identical traces " + std::to_string(same) +
              "/" + std::to_string(cfg.trials);
  return v;
}

Verdict ac6_invariants() {
  Verdict v;

  // Ledger: count equals the min rule and stitched means are unbiased.
  {
    const std::vector<Edge> e{{0, 0}, {0, 1}, {0, 2}};
    const std::vector<double> mu{0.2, 0.7, 0.45};
    const double target = 1.0 - (0.2 + 0.7 + 0.45) / 5.0;
    Rng rng(11);
    double grand = 0.0;
    bool min_rule = true;
    constexpr int reps = 10000;
    for (int r = 0; r < reps; ++r) {
      ObservationLedger ledger(build_graph(1, 3, e, e), RewardModel::path_delay(5.0));
      for (std::size_t i = 0; i < 3; ++i) {
        const int n = 50 + static_cast<int>(uniform_index(rng, 10 * (i + 1)));
        for (int k = 0; k < n; ++k) ledger.record(std::vector<Observation>{{i, bernoulli(rng, mu[i]) ? 1.0 : 0.0}});
      }
      min_rule &= ledger.count(0) ==
                  std::min({ledger.log_length(0), ledger.log_length(1), ledger.log_length(2)});
      grand += ledger.mean(0);
    }
    v.check(min_rule, "ledger count differs from min rule");
    v.check(std::abs(grand / reps - target) <= 0.01, "ledger bias " + fmt(grand / reps - target));
  }

  // Eliminate never empties the active set.
  {
    Rng rng(7);
    bool nonempty = true;
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t k = 1 + uniform_index(rng, 12);
      const std::uint64_t horizon = 16 + uniform_index(rng, 1'000'000);
      const int m = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(round_cap(horizon))));
      std::vector<double> means(k);
      std::vector<std::size_t> counts(k);
      IndexList active;
      for (std::size_t j = 0; j < k; ++j) {
        means[j] = uniform01(rng);
        counts[j] = 1 + uniform_index(rng, 5000);
        if (bernoulli(rng, 0.7)) active.push_back(j);
      }
      if (active.empty()) active.push_back(uniform_index(rng, k));
      nonempty &= !eliminate(m, active, means, counts, horizon).survivors.empty();
    }
    v.check(nonempty, "eliminate emptied an active set");
  }

  // Forced-sync draws follow z*_{.,a} / Z*_a within a 4.5-sigma binomial band.
  {
    const std::vector<Edge> reward{{0, 0}, {1, 1}};
    const std::vector<Edge> observe{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const auto g = build_graph(2, 2, observe, reward);
    const ActivationStructure act({{0, 1}}, {1.0}, 2);
    const auto problem = build_lp(g, act);
    const LpSolution lp(problem, {1.0, 3.0}, 0.0, g, act);
    UcbLpA policy(g, act, lp, 10000, RewardModel::identity());
    Rng rng(5);
    constexpr int n = 100000;
    int zeros = 0;
    bool synced = true;
    for (int t = 0; t < n; ++t) {
      zeros += policy.select(0, rng) == 0;
      synced &= policy.round_sync();
    }
    const double freq = static_cast<double>(zeros) / n;
    const double band = 4.5 * std::sqrt(0.25 * 0.75 / n);
    v.check(synced && std::abs(freq - 0.25) <= band, "forced-sync frequency " + fmt(freq));
  }

  // v_min >= 1 / Z*_max on every solved LP.
  {
    Rng rng(3);
    bool floor = true;
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = oracle::random_instance(rng, 16);
      const auto s = solve_observability_lp(inst.graph, inst.act);
      floor &= s.min_rate() >= 1.0 / s.max_set_total() - 1e-9;
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = generate_ba(40, 3, seed);
      const auto s = solve_observability_lp(g, uniform_partition(40, 3, 0.2, seed));
      floor &= s.min_rate() >= 1.0 / s.max_set_total() - 1e-9;
    }
    v.check(floor, "v_min below 1/Z_max");
  }

  // Repeated runs give byte-identical CSV.
  {
    const auto cfg = load_config(kConfigs / "smoke.json");
    const auto dir = fs::temp_directory_path() / "sideobs_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_csv(Experiment(cfg).run(jobs()).curves, dir / "a.csv");
    write_csv(Experiment(cfg).run(1).curves, dir / "b.csv");
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    v.check(slurp(dir / "a.csv") == slurp(dir / "b.csv"), "CSV differs between runs");
  }
  if (v.pass) v.detail = "ledger min rule and bias, eliminate non-empty, forced-sync frequency, v_min floor, CSV determinism";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    const char* title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "LP matches vertex enumeration", ac1_lp_oracle},
      {"AC2", "simulated regret below analytic bounds", ac2_dominance},
      {"AC3", "deterministic elimination schedule", ac3_elimination_schedule},
      {"AC4", "BA social network experiment", ac4_ba_social},
      {"AC5", "routing experiment", ac5_routing},
      {"AC6", "invariant suites", ac6_invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, c.title, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
