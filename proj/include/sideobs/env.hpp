#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/rng.hpp"

namespace sideobs {

// Known reward function f_j applied to the reward-set values of an action.
struct RewardModel {
  enum class Kind { Identity, PathDelay };

  Kind kind = Kind::Identity;
  double budget = 1.0;  // delay budget B, PathDelay only

  static RewardModel identity() { return {Kind::Identity, 1.0}; }
  static RewardModel path_delay(double budget) { return {Kind::PathDelay, budget}; }

  // Identity: the single value. PathDelay: 1 - sum / B.
  double evaluate(std::span<const double> values) const {
    if (kind == Kind::Identity) return values.front();
    double sum = 0.0;
    for (double x : values) sum += x;
    return 1.0 - sum / budget;
  }
};

struct Observation {
  std::size_t arm;
  double value;
};

// Ground-truth environment: Bernoulli base-arms, activation draws, reward
// functions and the true means used for pseudo-regret.
class Environment {
 public:
  Environment(SideObsGraph graph, ActivationStructure act, std::vector<double> base_means,
              RewardModel reward)
      : graph_(std::move(graph)), act_(std::move(act)), means_(std::move(base_means)), reward_(reward) {
    if (means_.size() != graph_.num_base_arms()) {
      throw Error(Errc::InvalidParams, "expected " + std::to_string(graph_.num_base_arms()) +
                                           " base-arm means, got " + std::to_string(means_.size()));
    }
    for (double mu : means_) {
      if (!(mu >= 0.0 && mu <= 1.0)) throw Error(Errc::InvalidParams, "base-arm mean outside [0,1]");
    }
    const std::size_t k = graph_.num_actions();
    if (reward_.kind == RewardModel::Kind::Identity) {
      for (std::size_t j = 0; j < k; ++j) {
        if (graph_.reward_set(j).size() != 1) {
          throw Error(Errc::InvalidParams,
                      "identity reward needs a single reward base-arm for action " + std::to_string(j));
        }
      }
    } else {
      if (!(reward_.budget > 0.0)) throw Error(Errc::InvalidParams, "delay budget must be positive");
      for (std::size_t j = 0; j < k; ++j) {
        if (static_cast<double>(graph_.reward_set(j).size()) > reward_.budget) {
          throw Error(Errc::InvalidParams, "path " + std::to_string(j) +
                                               " has more links than the delay budget allows");
        }
      }
    }

    action_means_.resize(k);
    std::vector<double> buf;
    for (std::size_t j = 0; j < k; ++j) {
      buf.clear();
      for (std::size_t i : graph_.reward_set(j)) buf.push_back(means_[i]);
      action_means_[j] = reward_.evaluate(buf);  // f is affine, so f(E[X]) = E[f(X)]
    }

    best_action_.resize(act_.size());
    best_mean_.resize(act_.size());
    for (std::size_t a = 0; a < act_.size(); ++a) {
      std::size_t best = act_.set(a).front();
      for (std::size_t j : act_.set(a)) {
        if (action_means_[j] > action_means_[best]) best = j;
      }
      best_action_[a] = best;
      best_mean_[a] = action_means_[best];
    }
  }

  const SideObsGraph& graph() const noexcept { return graph_; }
  const ActivationStructure& activation() const noexcept { return act_; }
  std::span<const double> base_means() const noexcept { return means_; }
  const RewardModel& reward_model() const noexcept { return reward_; }

  double action_mean(std::size_t j) const { return action_means_.at(j); }
  std::span<const double> action_means() const noexcept { return action_means_; }
  double best_mean(std::size_t a) const { return best_mean_.at(a); }
  // Lowest-index maximiser of the mean within K_a.
  std::size_t best_action(std::size_t a) const { return best_action_.at(a); }

  double gap(std::size_t j, std::size_t a) const { return best_mean_.at(a) - action_means_.at(j); }
  double regret_step(std::size_t a, std::size_t j) const { return gap(j, a); }

  // Gaps of every action of every set, indexed [set][position in K_a].
  std::vector<std::vector<double>> gaps() const {
    std::vector<std::vector<double>> out(act_.size());
    for (std::size_t a = 0; a < act_.size(); ++a) {
      for (std::size_t j : act_.set(a)) out[a].push_back(gap(j, a));
    }
    return out;
  }

  std::size_t draw_active_set(Rng& rng) const { return act_.draw(rng); }

  // Samples every base-arm of C_j into `out` (cleared first) and returns f_j.
  double pull(std::size_t j, Rng& rng, std::vector<Observation>& out) const {
    out.clear();
    for (std::size_t i : graph_.observe_set(j)) {
      out.push_back({i, bernoulli(rng, means_[i]) ? 1.0 : 0.0});
    }
    return reward_of(j, out);
  }

  // f_j evaluated on the reward-set entries of a full observation vector of C_j.
  double reward_of(std::size_t j, std::span<const Observation> obs) const {
    const auto f = graph_.reward_set(j);
    double sum = 0.0;
    for (const Observation& o : obs) {
      if (!detail::sorted_contains(f, o.arm)) continue;
      if (reward_.kind == RewardModel::Kind::Identity) return o.value;
      sum += o.value;
    }
    return 1.0 - sum / reward_.budget;
  }

 private:
  SideObsGraph graph_;
  ActivationStructure act_;
  std::vector<double> means_;
  RewardModel reward_;
  std::vector<double> action_means_;
  std::vector<std::size_t> best_action_;
  std::vector<double> best_mean_;
};

// Mean assignment used by the social experiments: `optimal_count` base-arms
// picked uniformly get `optimal_mu`, the rest are drawn from [lo, hi].
inline std::vector<double> assign_means(std::size_t num_arms, std::size_t optimal_count,
                                        double optimal_mu, double lo, double hi,
                                        std::uint64_t seed) {
  if (optimal_count > num_arms) {
    throw Error(Errc::InvalidParams, "more optimal arms than base-arms");
  }
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0) || !(optimal_mu >= 0.0 && optimal_mu <= 1.0)) {
    throw Error(Errc::InvalidParams, "means must lie in [0,1]");
  }
  Rng rng(seed);
  std::vector<std::size_t> order(num_arms);
  for (std::size_t k = 0; k < num_arms; ++k) order[k] = k;
  for (std::size_t k = num_arms; k > 1; --k) std::swap(order[k - 1], order[uniform_index(rng, k)]);
  std::vector<double> means(num_arms, 0.0);
  for (std::size_t k = 0; k < num_arms; ++k) {
    means[order[k]] = k < optimal_count ? optimal_mu : uniform_real(rng, lo, hi);
  }
  return means;
}

}  // namespace sideobs
