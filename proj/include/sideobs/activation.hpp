#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/rng.hpp"

namespace sideobs {

// The collection of activation sets K_1..K_A and the distribution p over them.
class ActivationStructure {
 public:
  // Validates against an action count. Sets are sorted and deduplicated.
  ActivationStructure(std::vector<IndexList> sets, std::vector<double> probs,
                      std::size_t num_actions)
      : sets_(std::move(sets)), probs_(std::move(probs)) {
    if (sets_.empty()) throw Error(Errc::InvalidActivation, "no activation sets");
    if (sets_.size() != probs_.size()) {
      throw Error(Errc::InvalidActivation, "sets and probabilities differ in length");
    }
    double total = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0)) throw Error(Errc::InvalidActivation, "probabilities must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(Errc::InvalidActivation, "probabilities sum to " + std::to_string(total));
    }
    std::vector<bool> seen(num_actions, false);
    for (std::size_t a = 0; a < sets_.size(); ++a) {
      auto& s = sets_[a];
      detail::sort_unique(s);
      if (s.empty()) throw Error(Errc::InvalidActivation, "set " + std::to_string(a) + " is empty");
      if (s.back() >= num_actions) {
        throw Error(Errc::IndexOutOfRange, "set " + std::to_string(a) + " names action " +
                                               std::to_string(s.back()));
      }
      for (std::size_t j : s) seen[j] = true;
    }
    for (std::size_t j = 0; j < num_actions; ++j) {
      if (!seen[j]) {
        throw Error(Errc::InvalidActivation,
                    "action " + std::to_string(j) + " belongs to no activation set");
      }
    }
    cumulative_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  }

  std::size_t size() const noexcept { return sets_.size(); }
  std::span<const std::size_t> set(std::size_t a) const { return sets_.at(a); }
  double prob(std::size_t a) const { return probs_.at(a); }
  const std::vector<IndexList>& sets() const noexcept { return sets_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  bool contains(std::size_t a, std::size_t action) const {
    return detail::sorted_contains(sets_.at(a), action);
  }

  // Draws a set index with probability p_a.
  std::size_t draw(Rng& rng) const {
    if (sets_.size() == 1) return 0;
    const double u = uniform01(rng) * cumulative_.back();
    for (std::size_t a = 0; a + 1 < cumulative_.size(); ++a) {
      if (u < cumulative_[a]) return a;
    }
    return cumulative_.size() - 1;
  }

 private:
  std::vector<IndexList> sets_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

// Splits the actions into `num_sets` equiprobable groups after a seeded
// shuffle. An overlap fraction copies that share of the actions (in shuffle
// order) into the following set as well.
inline ActivationStructure uniform_partition(std::size_t num_actions, std::size_t num_sets,
                                             double overlap, std::uint64_t seed) {
  if (num_sets == 0 || num_sets > num_actions) {
    throw Error(Errc::InvalidParams, "need 1 <= sets <= actions for a partition");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw Error(Errc::InvalidParams, "overlap must lie in [0, 1]");
  }
  IndexList order(num_actions);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = num_actions; k > 1; --k) {
    std::swap(order[k - 1], order[uniform_index(rng, k)]);
  }

  std::vector<IndexList> sets(num_sets);
  for (std::size_t k = 0; k < num_actions; ++k) sets[k % num_sets].push_back(order[k]);
  if (num_sets > 1) {
    const auto dup = static_cast<std::size_t>(std::floor(overlap * static_cast<double>(num_actions)));
    for (std::size_t k = 0; k < dup; ++k) sets[(k + 1) % num_sets].push_back(order[k]);
  }
  std::vector<double> probs(num_sets, 1.0 / static_cast<double>(num_sets));
  return ActivationStructure(std::move(sets), std::move(probs), num_actions);
}

}  // namespace sideobs
