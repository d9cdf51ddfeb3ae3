#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sideobs/config.hpp"
#include "sideobs/env.hpp"
#include "sideobs/lp.hpp"
#include "sideobs/policy.hpp"
#include "sideobs/rng.hpp"

namespace sideobs {

// Independent random streams of one (policy, trial) run. Activation draws
// and base-arm samples depend only on the trial, so every policy faces the
// same sequence of activation sets; the policy's own stream also depends on
// its id, so adding a policy never shifts another's stream.
struct TrialSeeds {
  std::uint64_t activation;
  std::uint64_t reward;
  std::uint64_t policy;

  static TrialSeeds derive(std::uint64_t master, std::string_view policy_id, std::size_t trial) {
    return {stream_seed(master, "activation", trial), stream_seed(master, "reward", trial),
            stream_seed(master, policy_id, trial)};
  }
};

// Cumulative pseudo-regret after each step: cumulative[t-1] covers steps 1..t.
struct RegretTrace {
  std::vector<double> cumulative;

  double final() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  double at(std::uint64_t t) const { return t == 0 ? 0.0 : cumulative.at(t - 1); }
};

// Simulates `policy` for `horizon` steps. Optionally records the action trace.
inline RegretTrace simulate(const Environment& env, Policy& policy, std::uint64_t horizon,
                            const TrialSeeds& seeds, std::vector<std::size_t>* actions = nullptr) {
  Rng act_rng(seeds.activation);
  Rng reward_rng(seeds.reward);
  Rng policy_rng(seeds.policy);
  RegretTrace trace;
  trace.cumulative.reserve(horizon);
  if (actions) actions->reserve(horizon);
  std::vector<Observation> obs;
  double total = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::size_t a = env.draw_active_set(act_rng);
    const std::size_t j = policy.select(a, policy_rng);
    if (!env.activation().contains(a, j)) {
      throw Error(Errc::InvalidParams, std::string(policy.name()) + " chose action " +
                                           std::to_string(j) + " outside active set " +
                                           std::to_string(a));
    }
    const double reward = env.pull(j, reward_rng, obs);
    policy.update(a, j, obs, reward);
    total += env.regret_step(a, j);
    trace.cumulative.push_back(total);
    if (actions) actions->push_back(j);
  }
  return trace;
}

struct CurvePoint {
  std::uint64_t t;
  double mean;
  double ci_lo;
  double ci_hi;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct AggregateCurve {
  std::string policy;
  std::vector<CurvePoint> points;
  std::vector<double> final_regret;  // per trial, in trial order

  double final_mean() const { return points.empty() ? 0.0 : points.back().mean; }
  // Mean at checkpoint t; throws if t is not a checkpoint.
  double mean_at(std::uint64_t t) const {
    for (const auto& p : points) {
      if (p.t == t) return p.mean;
    }
    throw Error(Errc::InvalidParams, "no checkpoint at t = " + std::to_string(t));
  }
};

// stride, 2*stride, ..., with the horizon always last.
inline std::vector<std::uint64_t> checkpoints(std::uint64_t horizon, std::uint64_t stride) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = stride; t < horizon; t += stride) out.push_back(t);
  out.push_back(horizon);
  return out;
}

// Mean and normal-approximation 95% interval across trials at each checkpoint.
// values[trial][k] is trial's cumulative regret at checkpoint k.
inline std::vector<CurvePoint> aggregate(std::span<const std::vector<double>> values,
                                         std::span<const std::uint64_t> ts) {
  std::vector<CurvePoint> out;
  const auto n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double sum = 0.0;
    for (const auto& v : values) sum += v[k];
    const double mean = sum / n;
    double half = 0.0;
    if (values.size() > 1) {
      double ss = 0.0;
      for (const auto& v : values) ss += (v[k] - mean) * (v[k] - mean);
      half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    out.push_back({ts[k], mean, mean - half, mean + half});
  }
  return out;
}

struct ExperimentResult {
  std::vector<AggregateCurve> curves;
  // traces[policy][trial], only filled when requested.
  std::vector<std::vector<RegretTrace>> traces;
};

// A configured experiment with its scenario built and LP solved once.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)), scenario_(build_scenario(cfg_)) {
    if (std::find(cfg_.policies.begin(), cfg_.policies.end(), "ucb-lp-a") != cfg_.policies.end()) {
      lp_.emplace(solve_observability_lp(scenario_.graph, scenario_.activation, cfg_.epsilon));
    }
    if (!means_vary_by_trial(cfg_)) shared_env_ = std::make_shared<const Environment>(make_env(0));
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  const LpSolution* lp() const noexcept { return lp_ ? &*lp_ : nullptr; }

  std::shared_ptr<const Environment> environment(std::size_t trial = 0) const {
    return shared_env_ ? shared_env_ : std::make_shared<const Environment>(make_env(trial));
  }

  RegretTrace run_trial(std::string_view policy_id, std::size_t trial,
                        std::vector<std::size_t>* actions = nullptr) const {
    const auto env = environment(trial);
    auto policy = make_policy(policy_id, *env, lp(), cfg_.horizon, UcbLpA::Options{cfg_.strict_kb});
    return simulate(*env, *policy, cfg_.horizon, TrialSeeds::derive(cfg_.seed, policy_id, trial),
                    actions);
  }

  // Runs every (policy, trial) pair on up to `jobs` threads. Aggregation
  // reads results in (policy, trial) order, so output does not depend on
  // scheduling.
  ExperimentResult run(std::size_t jobs = 1, bool keep_traces = false) const {
    const std::size_t np = cfg_.policies.size();
    const std::size_t nt = cfg_.trials;
    const auto ts = checkpoints(cfg_.horizon, cfg_.stride());
    std::vector<std::vector<double>> values(np * nt);
    std::vector<RegretTrace> traces(keep_traces ? np * nt : 0);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t task = next++; task < np * nt; task = next++) {
        try {
          RegretTrace tr = run_trial(cfg_.policies[task / nt], task % nt);
          auto& v = values[task];
          v.reserve(ts.size());
          for (auto t : ts) v.push_back(tr.at(t));
          if (keep_traces) traces[task] = std::move(tr);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, np * nt));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult result;
    for (std::size_t p = 0; p < np; ++p) {
      std::span<const std::vector<double>> slice(values.data() + p * nt, nt);
      AggregateCurve curve{cfg_.policies[p], aggregate(slice, ts), {}};
      for (const auto& v : slice) curve.final_regret.push_back(v.back());
      result.curves.push_back(std::move(curve));
      if (keep_traces) {
        result.traces.emplace_back(std::make_move_iterator(traces.begin() + p * nt),
                                   std::make_move_iterator(traces.begin() + (p + 1) * nt));
      }
    }
    return result;
  }

 private:
  Environment make_env(std::size_t trial) const {
    return Environment(scenario_.graph, scenario_.activation,
                       build_means(cfg_, scenario_.graph.num_base_arms(), trial), scenario_.reward);
  }

  ExperimentConfig cfg_;
  Scenario scenario_;
  std::optional<LpSolution> lp_;
  std::shared_ptr<const Environment> shared_env_;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  return Experiment(cfg).run(jobs);
}

}  // namespace sideobs
