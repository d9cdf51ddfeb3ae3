#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sideobs/env.hpp"
#include "sideobs/graph.hpp"

namespace sideobs {

struct LedgerSnapshot {
  std::vector<std::size_t> counts;  // T_j
  std::vector<double> means;        // fhat_j

  friend bool operator==(const LedgerSnapshot&, const LedgerSnapshot&) = default;
};

// Per-base-arm observation logs and the action samples stitched from them.
//
// The s-th sample of action j pairs the s-th logged value of every base-arm
// in F_j, so T_j = min over F_j of the log lengths and fhat_j is the mean of
// f_j over those tuples.
class ObservationLedger {
 public:
  ObservationLedger(const SideObsGraph& g, RewardModel reward)
      : reward_(reward),
        logs_(g.num_base_arms()),
        reward_sets_(g.num_actions()),
        users_(g.num_base_arms()),
        count_(g.num_actions(), 0),
        sum_(g.num_actions(), 0.0),
        stamp_(g.num_actions(), 0) {
    for (std::size_t j = 0; j < g.num_actions(); ++j) {
      auto f = g.reward_set(j);
      reward_sets_[j].assign(f.begin(), f.end());
      for (std::size_t i : f) users_[i].push_back(j);
    }
  }

  // Appends observations and advances every action whose tuples became
  // complete. Returns those actions; the view is valid until the next call.
  std::span<const std::size_t> record(std::span<const Observation> observations) {
    ++epoch_;
    affected_.clear();
    for (const Observation& o : observations) logs_.at(o.arm).push_back(o.value);
    for (const Observation& o : observations) {
      for (std::size_t j : users_[o.arm]) {
        if (stamp_[j] == epoch_) continue;
        stamp_[j] = epoch_;
        if (advance(j)) affected_.push_back(j);
      }
    }
    std::sort(affected_.begin(), affected_.end());
    return affected_;
  }

  std::size_t count(std::size_t j) const { return count_.at(j); }
  double mean(std::size_t j) const {
    return count_.at(j) == 0 ? 0.0 : sum_[j] / static_cast<double>(count_[j]);
  }
  std::size_t num_actions() const noexcept { return count_.size(); }
  std::size_t log_length(std::size_t arm) const { return logs_.at(arm).size(); }

  LedgerSnapshot snapshot() const {
    LedgerSnapshot s;
    s.counts = count_;
    s.means.resize(count_.size());
    for (std::size_t j = 0; j < count_.size(); ++j) s.means[j] = mean(j);
    return s;
  }

 private:
  bool advance(std::size_t j) {
    const auto& f = reward_sets_[j];
    std::size_t available = std::numeric_limits<std::size_t>::max();
    for (std::size_t i : f) available = std::min(available, logs_[i].size());
    if (available <= count_[j]) return false;

    tuple_.resize(f.size());
    for (std::size_t s = count_[j]; s < available; ++s) {
      for (std::size_t k = 0; k < f.size(); ++k) tuple_[k] = logs_[f[k]][s];
      sum_[j] += reward_.evaluate(tuple_);
    }
    count_[j] = available;
    return true;
  }

  RewardModel reward_;
  std::vector<std::vector<double>> logs_;
  std::vector<IndexList> reward_sets_;
  std::vector<IndexList> users_;  // users_[i] = { j : i in F_j }
  std::vector<std::size_t> count_;
  std::vector<double> sum_;
  std::vector<std::size_t> stamp_;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> affected_;
  std::vector<double> tuple_;
};

}  // namespace sideobs
