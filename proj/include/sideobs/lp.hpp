#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/simplex.hpp"

namespace sideobs {

inline constexpr double kDefaultEpsilon = 1e-5;
// LP weights below this are treated as exactly zero.
inline constexpr double kZeroClamp = 1e-12;

// One LP variable per (action, activation set) pair with the action in the set.
struct LpVar {
  std::size_t action;
  std::size_t set;
};

// The observability LP
//   min  sum_a p_a sum_{j in K_a} z_{j,a}
//   s.t. sum_a p_a sum_{j in K_a, j observes i} z_{j,a} >= 1   for every base-arm i
//        sum_{j in K_a} z_{j,a} >= epsilon                     for every set a
//        z >= 0
// Coverage rows come first (one per base-arm), then the per-set floor rows.
struct LpProblem {
  std::vector<LpVar> vars;
  // offsets[a] is the index of the first variable of set a; vars of set a
  // follow the order of K_a.
  std::vector<std::size_t> offsets;
  std::size_t num_base_arms = 0;
  std::size_t num_sets = 0;
  double epsilon = kDefaultEpsilon;
  LinearProgram program;
};

inline LpProblem build_lp(const SideObsGraph& g, const ActivationStructure& act,
                          double epsilon = kDefaultEpsilon) {
  if (!(epsilon > 0.0)) throw Error(Errc::InvalidParams, "epsilon must be positive");
  const std::size_t arms = g.num_base_arms();
  const std::size_t sets = act.size();

  LpProblem p;
  p.num_base_arms = arms;
  p.num_sets = sets;
  p.epsilon = epsilon;
  for (std::size_t a = 0; a < sets; ++a) {
    p.offsets.push_back(p.vars.size());
    for (std::size_t j : act.set(a)) {
      if (j >= g.num_actions()) {
        throw Error(Errc::IndexOutOfRange, "activation set names action " + std::to_string(j));
      }
      p.vars.push_back({j, a});
    }
  }
  p.offsets.push_back(p.vars.size());

  const std::size_t n = p.vars.size();
  LinearProgram& lp = p.program;
  lp.num_vars = n;
  lp.cost.resize(n);
  for (std::size_t v = 0; v < n; ++v) lp.cost[v] = act.prob(p.vars[v].set);

  for (std::size_t i = 0; i < arms; ++i) {
    std::vector<double> row(n, 0.0);
    bool any = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.observes(p.vars[v].action, i)) {
        row[v] = act.prob(p.vars[v].set);
        any = true;
      }
    }
    if (!any) {
      throw Error(Errc::StructuralInfeasible,
                  "base-arm " + std::to_string(i) + " is observed by no action of any set");
    }
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(1.0);
    lp.sense.push_back(RowSense::GreaterEqual);
  }
  for (std::size_t a = 0; a < sets; ++a) {
    std::vector<double> row(n, 0.0);
    for (std::size_t v = p.offsets[a]; v < p.offsets[a + 1]; ++v) row[v] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(epsilon);
    lp.sense.push_back(RowSense::GreaterEqual);
  }
  return p;
}

// Optimal weights and every quantity derived from them.
class LpSolution {
 public:
  LpSolution(const LpProblem& problem, std::vector<double> z, double objective,
             const SideObsGraph& g, const ActivationStructure& act)
      : vars_(problem.vars), offsets_(problem.offsets), z_(std::move(z)), objective_(objective) {
    for (double& w : z_) {
      if (w < kZeroClamp) w = 0.0;
    }
    const std::size_t sets = problem.num_sets;
    set_total_.assign(sets, 0.0);
    for (std::size_t v = 0; v < z_.size(); ++v) set_total_[vars_[v].set] += z_[v];
    max_total_ = *std::max_element(set_total_.begin(), set_total_.end());

    rate_.assign(problem.num_base_arms, 0.0);
    for (std::size_t v = 0; v < z_.size(); ++v) {
      if (z_[v] == 0.0) continue;
      const std::size_t a = vars_[v].set;
      const double share = act.prob(a) * z_[v] / set_total_[a];
      for (std::size_t i : g.observe_set(vars_[v].action)) rate_[i] += share;
    }
    min_rate_ = *std::min_element(rate_.begin(), rate_.end());

    gamma_.resize(z_.size());
    for (std::size_t v = 0; v < z_.size(); ++v) {
      const std::size_t a = vars_[v].set;
      gamma_[v] = act.prob(a) * z_[v] * max_total_ / set_total_[a];
    }
  }

  std::span<const LpVar> vars() const noexcept { return vars_; }
  std::span<const double> z() const noexcept { return z_; }
  double objective() const noexcept { return objective_; }

  // Z*_a, Z*_max, v_i and v_min.
  double set_total(std::size_t a) const { return set_total_.at(a); }
  std::span<const double> set_totals() const noexcept { return set_total_; }
  double max_set_total() const noexcept { return max_total_; }
  std::span<const double> rates() const noexcept { return rate_; }
  double min_rate() const noexcept { return min_rate_; }

  // Weights z*_{j,a} of set a, in K_a order.
  std::span<const double> set_weights(std::size_t a) const {
    return std::span<const double>(z_).subspan(offsets_.at(a), offsets_.at(a + 1) - offsets_[a]);
  }

  // gamma_{j,a} = p_a z*_{j,a} Z*_max / Z*_a, aligned with vars().
  std::span<const double> gamma() const noexcept { return gamma_; }
  std::span<const double> set_gamma(std::size_t a) const {
    return std::span<const double>(gamma_).subspan(offsets_.at(a), offsets_.at(a + 1) - offsets_[a]);
  }

  // z*_{j,a}, or 0 when j is not in K_a.
  double weight(std::size_t action, std::size_t set) const {
    for (std::size_t v = offsets_.at(set); v < offsets_.at(set + 1); ++v) {
      if (vars_[v].action == action) return z_[v];
    }
    return 0.0;
  }

 private:
  std::vector<LpVar> vars_;
  std::vector<std::size_t> offsets_;
  std::vector<double> z_;
  double objective_;
  std::vector<double> set_total_;
  double max_total_ = 0.0;
  std::vector<double> rate_;
  double min_rate_ = 0.0;
  std::vector<double> gamma_;
};

inline LpSolution solve(const LpProblem& problem, const SideObsGraph& g,
                        const ActivationStructure& act, double tol = 1e-9) {
  SimplexResult r;
  try {
    r = solve_simplex(problem.program, tol);
  } catch (const Error& e) {
    if (e.code() == Errc::Unbounded) {
      throw Error(Errc::Unbounded, std::string("internal error, observability LP: ") + e.what());
    }
    throw;
  }
  return LpSolution(problem, std::move(r.x), r.objective, g, act);
}

// Builds and solves in one go.
inline LpSolution solve_observability_lp(const SideObsGraph& g, const ActivationStructure& act,
                                         double epsilon = kDefaultEpsilon, double tol = 1e-9) {
  return solve(build_lp(g, act, epsilon), g, act, tol);
}

// gamma_{j,a} for every j in K_a, indexed [set][position in K_a].
inline std::vector<std::vector<double>> gamma_of(const LpSolution& sol,
                                                 const ActivationStructure& act) {
  std::vector<std::vector<double>> out(act.size());
  for (std::size_t a = 0; a < act.size(); ++a) {
    auto g = sol.set_gamma(a);
    out[a].assign(g.begin(), g.end());
  }
  return out;
}

// z*_{., a} / Z*_a: the forced-sync sampling distribution over K_a.
inline std::vector<double> sampling_distribution(std::span<const double> set_weights) {
  double total = 0.0;
  for (double w : set_weights) total += w < kZeroClamp ? 0.0 : w;
  std::vector<double> out(set_weights.size(), 0.0);
  for (std::size_t k = 0; k < set_weights.size(); ++k) {
    const double w = set_weights[k] < kZeroClamp ? 0.0 : set_weights[k];
    out[k] = w / total;
  }
  return out;
}

}  // namespace sideobs
