#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"

namespace sideobs {

// Gap proxy of round m: 2^-m.
inline double delta_tilde(int m) { return std::ldexp(1.0, -m); }

// floor(log2(T) / 2): the number of elimination rounds a horizon supports.
// Rounds 0..round_cap(T)-1 are the valid ones.
inline int round_cap(std::uint64_t horizon) {
  if (horizon == 0) return 0;
  return (std::bit_width(horizon) - 1) / 2;
}

// Per-action sample quota of round m: ceil(2 ln(T d^2) / d^2), d = 2^-m.
inline std::uint64_t n_of(int m, std::uint64_t horizon) {
  if (m < 0 || m >= round_cap(horizon)) {
    throw Error(Errc::RoundOutOfRange, "round " + std::to_string(m) + " outside [0, " +
                                           std::to_string(round_cap(horizon)) + ")");
  }
  const double d2 = std::ldexp(1.0, -2 * m);
  return static_cast<std::uint64_t>(
      std::ceil(2.0 * std::log(static_cast<double>(horizon) * d2) / d2));
}

// Confidence half-width sqrt(ln(T d_m^2) / (2 k)); infinite with no samples.
inline double confidence_width(std::uint64_t samples, int m, std::uint64_t horizon) {
  if (samples == 0) return std::numeric_limits<double>::infinity();
  const double d = delta_tilde(m);
  return std::sqrt(std::log(static_cast<double>(horizon) * d * d) /
                   (2.0 * static_cast<double>(samples)));
}

// Effective number of pulls needed to give one sample to every action of
// the given per-set candidate lists, when each set picks uniformly among its
// candidates: sum over actions of P_dir / (P_dir + P_free).
inline double compute_R(const SideObsGraph& g, const ActivationStructure& act,
                        std::span<const IndexList> per_set) {
  const std::size_t k = g.num_actions();
  std::vector<double> direct(k, 0.0);
  std::vector<double> free_obs(k, 0.0);
  std::vector<bool> present(k, false);
  for (std::size_t a = 0; a < per_set.size(); ++a) {
    const IndexList& b = per_set[a];
    if (b.empty()) throw Error(Errc::EmptyInput, "set " + std::to_string(a) + " has no candidates");
    const double w = act.prob(a) / static_cast<double>(b.size());
    for (std::size_t i : b) {
      present[i] = true;
      direct[i] += w;
    }
  }
  for (std::size_t a = 0; a < per_set.size(); ++a) {
    const IndexList& b = per_set[a];
    const double w = act.prob(a) / static_cast<double>(b.size());
    for (std::size_t j : b) {
      for (std::size_t i = 0; i < k; ++i) {
        if (i != j && present[i] && g.reveals_reward_of(j, i)) free_obs[i] += w;
      }
    }
  }
  double r = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (present[i]) r += direct[i] / (direct[i] + free_obs[i]);
  }
  return r;
}

// Forced-sync test: sampling from the LP pays off once 1/v_min <= 2 * delta * R.
inline bool forced_sync_due(double min_rate, double delta, double effective_pulls) {
  return 1.0 / min_rate <= 2.0 * delta * effective_pulls;
}

struct EliminationResult {
  int next_round;
  IndexList survivors;
};

// Drops every j in `active` whose upper bound falls strictly below the best
// lower bound in `active`. The maximiser of the lower bound always survives.
inline EliminationResult eliminate(int m, std::span<const std::size_t> active,
                                   std::span<const double> means,
                                   std::span<const std::size_t> counts, std::uint64_t horizon) {
  if (active.empty()) throw Error(Errc::EmptyInput, "nothing to eliminate from");
  double best_lcb = -std::numeric_limits<double>::infinity();
  for (std::size_t i : active) {
    best_lcb = std::max(best_lcb, means[i] - confidence_width(counts[i], m, horizon));
  }
  EliminationResult out{m + 1, {}};
  for (std::size_t j : active) {
    const double ucb = means[j] + confidence_width(counts[j], m, horizon);
    if (!(ucb < best_lcb)) out.survivors.push_back(j);
  }
  return out;
}

}  // namespace sideobs
