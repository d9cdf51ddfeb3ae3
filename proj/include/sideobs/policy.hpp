#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/env.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/ledger.hpp"
#include "sideobs/lp.hpp"
#include "sideobs/rng.hpp"
#include "sideobs/schedule.hpp"

namespace sideobs {

// A learner facing one activation set per step. select() picks an action of
// K_a; update() feeds back what pulling it revealed.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t select(std::size_t set, Rng& rng) = 0;
  virtual void update(std::size_t set, std::size_t action, std::span<const Observation> observations,
                      double reward) = 0;
};

namespace detail {

// Lowest-index argmax of `score` over `candidates`.
template <typename Score>
std::size_t argmax_over(std::span<const std::size_t> candidates, Score&& score) {
  std::size_t best = candidates.front();
  double best_score = score(best);
  for (std::size_t j : candidates.subspan(1)) {
    const double s = score(j);
    if (s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

inline void erase_sorted(IndexList& v, std::size_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

}  // namespace detail

// Record of one Eliminate call.
struct EliminationEvent {
  std::uint64_t step;            // 1-based time step at which the round closed
  std::size_t set;
  int round;                     // round that just ended
  bool synced;                   // closed by a forced-sync round
  std::uint64_t min_count;       // min T_j over the pre-elimination active set
  IndexList removed;
};

struct UcbLpAOptions {
  // Close forced-sync rounds on all of K_b instead of the surviving B_b.
  bool strict_kb = false;
};

// Arm-elimination UCB over activation sets with LP-guided forced-sync rounds.
//
// Each set keeps its own round m_a, active set B_a and deficit set. While
// the sync flag is down, a set's round ends once every active action holds
// n(m_a) stitched samples and that set eliminates alone. The flag goes up
// when 1/v_min <= 2 * 2^-m_a * R(B); from then on actions are drawn from the
// LP distribution z*_{.,a}/Z*_a over all of K_a, and every set waits until
// all sets have met their quotas before eliminating together.
//
// Constructed without an LP solution the policy never syncs, which is the
// UCB-E baseline.
class UcbLpA : public Policy {
 public:
  using Options = UcbLpAOptions;

  UcbLpA(const SideObsGraph& g, const ActivationStructure& act, const LpSolution& lp,
         std::uint64_t horizon, RewardModel reward, Options options = {})
      : UcbLpA(g, act, &lp, horizon, reward, options) {}

  std::string_view name() const override { return lp_ ? "ucb-lp-a" : "ucb-e"; }

  std::size_t select(std::size_t a, Rng& rng) override {
    ++step_;
    if (lp_ && !round_sync_ && forced_sync_due(lp_->min_rate(), delta_tilde(round_[a]), effective_pulls())) {
      round_sync_ = true;
    }
    if (round_[a] >= cap_) {
      return detail::argmax_over(std::span<const std::size_t>(active_[a]),
                                 [&](std::size_t j) { return ledger_.mean(j); });
    }
    if (active_[a].size() == 1) return active_[a].front();
    if (round_sync_) return sample_lp(a, rng);

    const IndexList& pool = deficit_[a].empty() ? active_[a] : deficit_[a];
    return detail::argmax_over(std::span<const std::size_t>(pool), [&](std::size_t j) {
      return -static_cast<double>(ledger_.count(j));
    });
  }

  void update(std::size_t, std::size_t, std::span<const Observation> observations, double) override {
    const auto affected = ledger_.record(observations);
    if (round_sync_) {
      close_sync_round();
    } else {
      for (std::size_t j : affected) {
        for (std::size_t b : sets_of_[j]) {
          if (round_[b] < cap_ && ledger_.count(j) >= n_of(round_[b], horizon_)) {
            detail::erase_sorted(deficit_[b], j);
          }
        }
      }
      for (std::size_t b = 0; b < act_.size(); ++b) settle(b);
    }
  }

  int round(std::size_t a) const { return round_.at(a); }
  double delta(std::size_t a) const { return delta_tilde(round_.at(a)); }
  const IndexList& active_set(std::size_t a) const { return active_.at(a); }
  const IndexList& deficit_set(std::size_t a) const { return deficit_.at(a); }
  bool round_sync() const noexcept { return round_sync_; }
  bool round_ended(std::size_t a) const { return ended_.at(a); }
  int round_limit() const noexcept { return cap_; }
  const ObservationLedger& ledger() const noexcept { return ledger_; }
  std::span<const EliminationEvent> events() const noexcept { return events_; }

  // Round in which `action` left B_a, if it has.
  std::optional<int> elimination_round(std::size_t action, std::size_t a) const {
    for (const auto& e : events_) {
      if (e.set == a && std::binary_search(e.removed.begin(), e.removed.end(), action)) return e.round;
    }
    return std::nullopt;
  }

  // R over the current active sets; cached between eliminations.
  double effective_pulls() {
    if (!r_valid_) {
      r_cache_ = compute_R(graph_, act_, active_);
      r_valid_ = true;
    }
    return r_cache_;
  }

 protected:
  UcbLpA(const SideObsGraph& g, const ActivationStructure& act, const LpSolution* lp,
         std::uint64_t horizon, RewardModel reward, Options options)
      : graph_(g),
        act_(act),
        lp_(lp),
        horizon_(horizon),
        options_(options),
        cap_(round_cap(horizon)),
        ledger_(g, reward),
        round_(act.size(), 0),
        ended_(act.size(), false),
        sets_of_(g.num_actions()) {
    if (cap_ < 1) throw Error(Errc::InvalidParams, "horizon must be at least 4");
    for (std::size_t a = 0; a < act.size(); ++a) {
      active_.emplace_back(act.set(a).begin(), act.set(a).end());
      deficit_.push_back(active_.back());
      for (std::size_t j : act.set(a)) sets_of_[j].push_back(a);
    }
    if (lp_) {
      cumulative_.resize(act.size());
      for (std::size_t a = 0; a < act.size(); ++a) {
        const auto dist = sampling_distribution(lp_->set_weights(a));
        double acc = 0.0;
        for (double p : dist) cumulative_[a].push_back(acc += p);
      }
    }
  }

 private:
  std::size_t sample_lp(std::size_t a, Rng& rng) const {
    const auto& cum = cumulative_[a];
    const auto members = act_.set(a);
    const double u = uniform01(rng) * cum.back();
    for (std::size_t k = 0; k < cum.size(); ++k) {
      // Zero-weight actions have an empty interval and are never returned.
      if (u < cum[k]) return members[k];
    }
    for (std::size_t k = cum.size(); k-- > 0;) {
      if (k == 0 || cum[k] > cum[k - 1]) return members[k];
    }
    return members.back();
  }

  bool quota_met(std::size_t b) const {
    if (round_[b] >= cap_) return true;
    const std::uint64_t need = n_of(round_[b], horizon_);
    auto met = [&](std::size_t j) { return ledger_.count(j) >= need; };
    if (options_.strict_kb) {
      auto all = act_.set(b);
      return std::all_of(all.begin(), all.end(), met);
    }
    return std::all_of(active_[b].begin(), active_[b].end(), met);
  }

  void close_sync_round() {
    bool all = true;
    for (std::size_t b = 0; b < act_.size(); ++b) {
      if (!ended_[b] && quota_met(b)) ended_[b] = true;
      all = all && ended_[b];
    }
    if (!all) return;
    round_sync_ = false;
    for (std::size_t b = 0; b < act_.size(); ++b) {
      ended_[b] = false;
      if (round_[b] < cap_) run_eliminate(b, true);
    }
    for (std::size_t b = 0; b < act_.size(); ++b) settle(b);
  }

  // Rebuilds deficit sets to the actions still short of their quota and
  // closes independent rounds whose deficit set is empty.
  void settle(std::size_t b) {
    while (round_[b] < cap_) {
      if (!deficit_[b].empty()) return;
      run_eliminate(b, false);
    }
  }

  void run_eliminate(std::size_t b, bool synced) {
    std::uint64_t min_count = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t j : active_[b]) min_count = std::min<std::uint64_t>(min_count, ledger_.count(j));

    const LedgerSnapshot snap = ledger_.snapshot();
    auto result = eliminate(round_[b], active_[b], snap.means, snap.counts, horizon_);
    EliminationEvent ev{step_, b, round_[b], synced, min_count, {}};
    std::set_difference(active_[b].begin(), active_[b].end(), result.survivors.begin(),
                        result.survivors.end(), std::back_inserter(ev.removed));
    if (!ev.removed.empty()) r_valid_ = false;
    events_.push_back(std::move(ev));

    active_[b] = std::move(result.survivors);
    round_[b] = result.next_round;
    deficit_[b].clear();
    if (round_[b] < cap_) {
      const std::uint64_t need = n_of(round_[b], horizon_);
      for (std::size_t j : active_[b]) {
        if (ledger_.count(j) < need) deficit_[b].push_back(j);
      }
    }
  }

  const SideObsGraph& graph_;
  const ActivationStructure& act_;
  const LpSolution* lp_;
  std::uint64_t horizon_;
  Options options_;
  int cap_;
  ObservationLedger ledger_;

  std::vector<int> round_;
  std::vector<IndexList> active_;
  std::vector<IndexList> deficit_;
  std::vector<bool> ended_;
  bool round_sync_ = false;
  std::vector<IndexList> sets_of_;
  std::vector<std::vector<double>> cumulative_;

  bool r_valid_ = false;
  double r_cache_ = 0.0;
  std::uint64_t step_ = 0;
  std::vector<EliminationEvent> events_;
};

// Per-set elimination UCB that still banks side-observations but never uses the LP.
class UcbE : public UcbLpA {
 public:
  UcbE(const SideObsGraph& g, const ActivationStructure& act, std::uint64_t horizon,
       RewardModel reward)
      : UcbLpA(g, act, nullptr, horizon, reward, Options{}) {}
};

// UCB index f + sqrt(2 ln t / T) over the active set; every unsampled
// active action is played first, lowest index first.
class UcbN : public Policy {
 public:
  UcbN(const SideObsGraph& g, const ActivationStructure& act, RewardModel reward)
      : graph_(g), act_(act), ledger_(g, reward) {}

  std::string_view name() const override { return "ucb-n"; }

  std::size_t select(std::size_t a, Rng&) override {
    ++step_;
    const auto members = act_.set(a);
    for (std::size_t j : members) {
      if (ledger_.count(j) == 0) return j;
    }
    return detail::argmax_over(members, [&](std::size_t j) { return index(j); });
  }

  void update(std::size_t, std::size_t, std::span<const Observation> observations, double) override {
    ledger_.record(observations);
  }

  double index(std::size_t j) const {
    return ledger_.mean(j) +
           std::sqrt(2.0 * std::log(static_cast<double>(step_)) / static_cast<double>(ledger_.count(j)));
  }

  const ObservationLedger& ledger() const noexcept { return ledger_; }

 protected:
  const SideObsGraph& graph_;
  const ActivationStructure& act_;
  ObservationLedger ledger_;
  std::uint64_t step_ = 0;
};

// UCB-N's target, then the empirically best action among those whose
// reward the target observes (itself included) that are currently active.
class UcbMaxN : public UcbN {
 public:
  using UcbN::UcbN;

  std::string_view name() const override { return "ucb-maxn"; }

  std::size_t select(std::size_t a, Rng& rng) override {
    const std::size_t target = UcbN::select(a, rng);
    if (ledger_.count(target) == 0) return target;
    const auto members = act_.set(a);
    candidates_.clear();
    for (std::size_t j : members) {
      if (j == target || graph_.reveals_reward_of(target, j)) candidates_.push_back(j);
    }
    return detail::argmax_over(std::span<const std::size_t>(candidates_),
                               [&](std::size_t j) { return ledger_.mean(j); });
  }

 private:
  IndexList candidates_;
};

// Classic UCB1 on the pulled action's own rewards; side-observations are discarded.
class Ucb1 : public Policy {
 public:
  Ucb1(const SideObsGraph& g, const ActivationStructure& act)
      : act_(act), count_(g.num_actions(), 0), sum_(g.num_actions(), 0.0) {}

  std::string_view name() const override { return "ucb1"; }

  std::size_t select(std::size_t a, Rng&) override {
    ++step_;
    const auto members = act_.set(a);
    for (std::size_t j : members) {
      if (count_[j] == 0) return j;
    }
    return detail::argmax_over(members, [&](std::size_t j) {
      const double n = static_cast<double>(count_[j]);
      return sum_[j] / n + std::sqrt(2.0 * std::log(static_cast<double>(step_)) / n);
    });
  }

  void update(std::size_t, std::size_t action, std::span<const Observation>, double reward) override {
    ++count_[action];
    sum_[action] += reward;
  }

  std::size_t count(std::size_t j) const { return count_.at(j); }

 private:
  const ActivationStructure& act_;
  std::vector<std::size_t> count_;
  std::vector<double> sum_;
  std::uint64_t step_ = 0;
};

// Always plays the true best action of the active set. Test fixture.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const Environment& env) : env_(env) {}
  std::string_view name() const override { return "oracle"; }
  std::size_t select(std::size_t a, Rng&) override { return env_.best_action(a); }
  void update(std::size_t, std::size_t, std::span<const Observation>, double) override {}

 private:
  const Environment& env_;
};

inline constexpr std::string_view kPolicyIds[] = {"ucb-lp-a", "ucb-e", "ucb-n", "ucb-maxn", "ucb1"};

inline bool is_known_policy(std::string_view id) {
  return id == "oracle" ||
         std::find(std::begin(kPolicyIds), std::end(kPolicyIds), id) != std::end(kPolicyIds);
}

// Builds a policy by config id. `lp` is only read by "ucb-lp-a".
inline std::unique_ptr<Policy> make_policy(std::string_view id, const Environment& env,
                                           const LpSolution* lp, std::uint64_t horizon,
                                           UcbLpA::Options options = {}) {
  const auto& g = env.graph();
  const auto& act = env.activation();
  if (id == "ucb-lp-a") {
    if (!lp) throw Error(Errc::InvalidParams, "ucb-lp-a needs an LP solution");
    return std::make_unique<UcbLpA>(g, act, *lp, horizon, env.reward_model(), options);
  }
  if (id == "ucb-e") return std::make_unique<UcbE>(g, act, horizon, env.reward_model());
  if (id == "ucb-n") return std::make_unique<UcbN>(g, act, env.reward_model());
  if (id == "ucb-maxn") return std::make_unique<UcbMaxN>(g, act, env.reward_model());
  if (id == "ucb1") return std::make_unique<Ucb1>(g, act);
  if (id == "oracle") return std::make_unique<OraclePolicy>(env);
  throw Error(Errc::InvalidConfig, "unknown policy '" + std::string(id) + "'");
}

}  // namespace sideobs
