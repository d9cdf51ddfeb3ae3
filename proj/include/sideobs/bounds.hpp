#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/env.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/lp.hpp"
#include "sideobs/schedule.hpp"

namespace sideobs {

// Marks an optimal action: it never leaves its set in the analysis.
inline constexpr int kNeverEliminated = std::numeric_limits<int>::max();

// Smallest m in 0..round_cap(T)-1 with 2^-m < gap / 2.
inline int m_ja(double gap, std::uint64_t horizon) {
  const int cap = round_cap(horizon);
  for (int m = 0; m < cap; ++m) {
    if (delta_tilde(m) < gap / 2.0) return m;
  }
  throw Error(Errc::AssumptionViolated, "gap " + std::to_string(gap) +
                                            " is not resolved by any round below " +
                                            std::to_string(cap));
}

// 2 ln(T d_m^2) / d_m^2: the sample count that closes round m.
inline double round_cost(int m, std::uint64_t horizon) {
  const double d2 = std::ldexp(1.0, -2 * m);
  return 2.0 * std::log(static_cast<double>(horizon) * d2) / d2;
}

struct BoundInputs {
  const SideObsGraph* graph = nullptr;
  const ActivationStructure* act = nullptr;
  std::vector<std::vector<double>> gaps;  // [set][position in K_a]
  std::uint64_t horizon = 0;
  const LpSolution* lp = nullptr;         // required by the UCB-LP-A bound only

  static BoundInputs from_environment(const Environment& env, std::uint64_t horizon,
                                      const LpSolution* lp = nullptr) {
    return BoundInputs{&env.graph(), &env.activation(), env.gaps(), horizon, lp};
  }
};

struct BoundTerm {
  std::size_t action;
  std::size_t set;
  double gap;
  int m_ja;
  double gamma;
  bool deferred;  // j in D_a: still active after the last forced-sync round
  double contribution;
};

struct BoundReport {
  double main_term = 0.0;
  double ok_term_cap = 0.0;
  double total = 0.0;
  int m_bar = -1;
  std::vector<BoundTerm> terms;
  std::vector<IndexList> deferred;  // D_a per set
};

namespace detail {

// Only an exact zero gap counts as optimal.
inline bool suboptimal(double gap) { return gap > 0.0; }

inline void check_assumption(const BoundInputs& in) {
  if (!in.graph || !in.act) throw Error(Errc::InvalidParams, "bound inputs need graph and activation");
  if (in.gaps.size() != in.act->size()) throw Error(Errc::InvalidParams, "gap table has wrong shape");
  const double floor = 2.0 / static_cast<double>(in.horizon);
  for (std::size_t a = 0; a < in.act->size(); ++a) {
    if (in.gaps[a].size() != in.act->set(a).size()) {
      throw Error(Errc::InvalidParams, "gap table has wrong shape");
    }
    for (double d : in.gaps[a]) {
      if (d < 0.0) throw Error(Errc::InvalidParams, "negative gap");
      if (suboptimal(d) && !(d > floor)) {
        throw Error(Errc::AssumptionViolated,
                    "gap " + std::to_string(d) + " not above 2/T = " + std::to_string(floor));
      }
    }
  }
}

// m_{j,a} for every (a, position); optimal actions get kNeverEliminated.
inline std::vector<std::vector<int>> rounds_of(const BoundInputs& in) {
  std::vector<std::vector<int>> out(in.gaps.size());
  for (std::size_t a = 0; a < in.gaps.size(); ++a) {
    for (double d : in.gaps[a]) out[a].push_back(suboptimal(d) ? m_ja(d, in.horizon) : kNeverEliminated);
  }
  return out;
}

// The O(K) part shared by both bounds; `gamma_plus` is added to each
// suboptimal action's gap coefficient (gamma + 1 for UCB-LP-A, 1 for UCB-E).
template <typename GammaPlus>
double constant_cap(const BoundInputs& in, GammaPlus&& gamma_plus) {
  double linear = 0.0;
  double max_gap = 0.0;
  double quad = 0.0;
  for (std::size_t a = 0; a < in.gaps.size(); ++a) {
    std::size_t suboptimal_count = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < in.gaps[a].size(); ++k) {
      const double d = in.gaps[a][k];
      if (!suboptimal(d)) continue;
      ++suboptimal_count;
      min_gap = std::min(min_gap, d);
      max_gap = std::max(max_gap, d);
      linear += gamma_plus(a, k) * d;
      quad += 32.0 / (d * d);
    }
    if (suboptimal_count > 0) {
      quad += 32.0 * static_cast<double>(suboptimal_count) / (3.0 * min_gap * min_gap);
    }
  }
  return linear + max_gap * quad;
}

}  // namespace detail

// Largest round m with 1/v_min <= 2 * 2^-m * R(G_m), where G_{m,a} keeps the
// actions of K_a not yet due for elimination by round m. -1 when no round
// qualifies, i.e. forced-sync never pays off.
inline int m_bar(const BoundInputs& in) {
  detail::check_assumption(in);
  if (!in.lp) throw Error(Errc::InvalidParams, "m_bar needs the LP solution");
  const auto rounds = detail::rounds_of(in);
  int best = -1;
  std::vector<IndexList> groups(in.act->size());
  for (int m = 0; m < round_cap(in.horizon); ++m) {
    for (std::size_t a = 0; a < in.act->size(); ++a) {
      groups[a].clear();
      const auto members = in.act->set(a);
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (rounds[a][k] >= m) groups[a].push_back(members[k]);
      }
    }
    if (forced_sync_due(in.lp->min_rate(), delta_tilde(m), compute_R(*in.graph, *in.act, groups))) best = m;
  }
  return best;
}

// UCB-LP-A bound with an explicit m_bar and gamma table ([set][position]).
inline BoundReport ucb_lp_a_bound_with(const BoundInputs& in, int mbar,
                                       const std::vector<std::vector<double>>& gamma) {
  detail::check_assumption(in);
  const auto rounds = detail::rounds_of(in);
  BoundReport rep;
  rep.m_bar = mbar;
  rep.deferred.resize(in.act->size());
  const double sync_cost = mbar >= 0 ? round_cost(mbar, in.horizon) : 0.0;

  for (std::size_t a = 0; a < in.act->size(); ++a) {
    const auto members = in.act->set(a);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double d = in.gaps[a][k];
      if (!detail::suboptimal(d)) continue;
      BoundTerm t{members[k], a, d, rounds[a][k], gamma[a][k], rounds[a][k] > mbar, 0.0};
      if (t.deferred) {
        // With no forced-sync round at all the gamma term drops out.
        const double sync_part = mbar >= 0 ? (t.gamma - 1.0) * sync_cost : 0.0;
        t.contribution = (sync_part + round_cost(t.m_ja, in.horizon)) * d;
        rep.deferred[a].push_back(members[k]);
      } else {
        t.contribution = t.gamma * sync_cost * d;
      }
      rep.main_term += t.contribution;
      rep.terms.push_back(t);
    }
  }
  rep.ok_term_cap = detail::constant_cap(in, [&](std::size_t a, std::size_t k) { return gamma[a][k] + 1.0; });
  rep.total = rep.main_term + rep.ok_term_cap;
  return rep;
}

inline BoundReport ucb_lp_a_bound(const BoundInputs& in) {
  if (!in.lp) throw Error(Errc::InvalidParams, "the UCB-LP-A bound needs the LP solution");
  return ucb_lp_a_bound_with(in, m_bar(in), gamma_of(*in.lp, *in.act));
}

inline BoundReport ucb_e_bound(const BoundInputs& in) {
  detail::check_assumption(in);
  const auto rounds = detail::rounds_of(in);
  BoundReport rep;
  rep.deferred.resize(in.act->size());
  for (std::size_t a = 0; a < in.act->size(); ++a) {
    const auto members = in.act->set(a);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double d = in.gaps[a][k];
      if (!detail::suboptimal(d)) continue;
      BoundTerm t{members[k], a, d, rounds[a][k], 1.0, true, round_cost(rounds[a][k], in.horizon) * d};
      rep.main_term += t.contribution;
      rep.terms.push_back(t);
      rep.deferred[a].push_back(members[k]);
    }
  }
  rep.ok_term_cap = detail::constant_cap(in, [](std::size_t, std::size_t) { return 1.0; });
  rep.total = rep.main_term + rep.ok_term_cap;
  return rep;
}

}  // namespace sideobs
