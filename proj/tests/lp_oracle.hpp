#pragma once

// Test-only reference for the observability LP: random small instances and
// a brute-force optimum by enumerating every basic solution.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sideobs/activation.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/rng.hpp"
#include "sideobs/simplex.hpp"

namespace oracle {

struct Instance {
  sideobs::SideObsGraph graph;
  sideobs::ActivationStructure act;
};

// K <= 8, N <= 8, A <= 3, every base-arm observed, at most `max_vars` LP variables.
inline Instance random_instance(sideobs::Rng& rng, std::size_t max_vars = 10) {
  using namespace sideobs;
  for (;;) {
    const std::size_t k = 1 + uniform_index(rng, 8);
    const std::size_t n = 1 + uniform_index(rng, 8);
    const std::size_t a_count = 1 + uniform_index(rng, std::min<std::size_t>(3, k));

    std::vector<Edge> observe, reward;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = uniform_index(rng, k);
      observe.push_back({j, i});
      reward.push_back({j, i});
    }
    for (std::size_t j = 0; j < k; ++j) {
      observe.push_back({j, uniform_index(rng, n)});
      for (std::size_t i = 0; i < n; ++i) {
        if (bernoulli(rng, 0.25)) observe.push_back({j, i});
      }
    }

    std::vector<IndexList> sets(a_count);
    for (std::size_t j = 0; j < k; ++j) {
      sets[uniform_index(rng, a_count)].push_back(j);
      for (std::size_t a = 0; a < a_count; ++a) {
        if (bernoulli(rng, 0.2)) sets[a].push_back(j);
      }
    }
    bool empty_set = false;
    std::size_t vars = 0;
    for (auto& s : sets) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      empty_set |= s.empty();
      vars += s.size();
    }
    if (empty_set || vars > max_vars) continue;

    std::vector<double> probs(a_count);
    double total = 0.0;
    for (auto& p : probs) total += (p = 0.2 + uniform01(rng));
    for (auto& p : probs) p /= total;
    // Renormalise so the sum is 1 to the last bit the validator checks.
    probs.back() = 1.0;
    for (std::size_t a = 0; a + 1 < a_count; ++a) probs.back() -= probs[a];

    return Instance{build_graph(k, n, observe, reward),
                    ActivationStructure(std::move(sets), std::move(probs), k)};
  }
}

// Solves the square system M y = r by Gaussian elimination with partial
// pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t row = c + 1; row < n; ++row) {
      if (std::abs(m[row][c]) > std::abs(m[piv][c])) piv = row;
    }
    if (std::abs(m[piv][c]) < 1e-11) return std::nullopt;
    std::swap(m[piv], m[c]);
    std::swap(r[piv], r[c]);
    for (std::size_t row = c + 1; row < n; ++row) {
      const double f = m[row][c] / m[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) m[row][k] -= f * m[c][k];
      r[row] -= f * r[c];
    }
  }
  std::vector<double> y(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = r[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= m[c][k] * y[k];
    y[c] = s / m[c][c];
  }
  return y;
}

// Minimum of cost.x over the basic feasible solutions of
// {rows.x >= rhs, x >= 0}: every choice of n tight constraints among the
// rows and the bounds x_v = 0. nullopt when no vertex is feasible.
inline std::optional<double> vertex_minimum(const sideobs::LinearProgram& lp, double feas_tol = 1e-9) {
  const std::size_t n = lp.num_vars;
  const std::size_t m = lp.num_rows();
  const std::size_t total = m + n;
  std::vector<std::size_t> pick(n);
  for (std::size_t k = 0; k < n; ++k) pick[k] = k;
  std::optional<double> best;

  std::vector<std::vector<double>> mat(n, std::vector<double>(n));
  std::vector<double> r(n);
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t c = pick[k];
      if (c < m) {
        mat[k] = lp.rows[c];
        r[k] = lp.rhs[c];
      } else {
        std::fill(mat[k].begin(), mat[k].end(), 0.0);
        mat[k][c - m] = 1.0;
        r[k] = 0.0;
      }
    }
    if (auto x = solve_square(mat, r)) {
      bool feasible = true;
      for (double v : *x) feasible &= v >= -feas_tol;
      for (std::size_t row = 0; feasible && row < m; ++row) {
        double s = 0.0;
        for (std::size_t v = 0; v < n; ++v) s += lp.rows[row][v] * (*x)[v];
        feasible = s >= lp.rhs[row] - feas_tol;
      }
      if (feasible) {
        double obj = 0.0;
        for (std::size_t v = 0; v < n; ++v) obj += lp.cost[v] * (*x)[v];
        if (!best || obj < *best) best = obj;
      }
    }
    // Next n-combination of 0..total-1 in lexicographic order.
    std::size_t k = n;
    while (k > 0 && pick[k - 1] == total - n + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t q = k; q < n; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

}  // namespace oracle
