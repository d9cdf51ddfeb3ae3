#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sideobs/error.hpp"

namespace sideobs {

enum class RowSense { GreaterEqual, LessEqual, Equal };

// min cost.x  s.t.  rows[r].x (sense) rhs[r],  x >= 0.  Dense storage.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> cost;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<RowSense> sense;

  std::size_t num_rows() const noexcept { return rows.size(); }
};

struct SimplexResult {
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

// Dense tableau for the two-phase primal simplex. Row `m` holds reduced
// costs; the last column holds the right-hand side. Entering and leaving
// variables follow Bland's rule, so the method cannot cycle and ties among
// optimal vertices resolve deterministically.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows), barred_(cols, false) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }
  double& objective() { return at(m_, n_); }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }
  std::vector<std::size_t>& basis() noexcept { return basis_; }
  std::vector<bool>& barred() noexcept { return barred_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t width = n_ + 1;
    double* prow = &data_[pr * width];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Runs Bland-rule iterations until optimal. Returns false if unbounded.
  bool optimize(double tol, std::size_t& iterations, std::size_t cap) {
    for (;;) {
      std::size_t enter = n_;
      for (std::size_t c = 0; c < n_; ++c) {
        if (!barred_[c] && at(m_, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter == n_) return true;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= tol) continue;
        const double ratio = at(r, n_) / a;
        if (leave == m_ || ratio < best - tol) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + tol && basis_[r] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == m_) return false;
      if (++iterations > cap) {
        throw Error(Errc::NumericalFailure,
                    "simplex exceeded " + std::to_string(cap) + " iterations");
      }
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  std::vector<bool> barred_;
};

}  // namespace detail

inline SimplexResult solve_simplex(const LinearProgram& lp, double tol = 1e-9) {
  const std::size_t m = lp.num_rows();
  const std::size_t n = lp.num_vars;
  if (lp.cost.size() != n || lp.rhs.size() != m || lp.sense.size() != m) {
    throw Error(Errc::InvalidParams, "inconsistent linear program dimensions");
  }
  for (const auto& row : lp.rows) {
    if (row.size() != n) throw Error(Errc::InvalidParams, "row width differs from variable count");
  }

  // Normalise to nonnegative right-hand sides.
  std::vector<double> sign(m, 1.0);
  std::vector<RowSense> sense = lp.sense;
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.rhs[r] < 0.0) {
      sign[r] = -1.0;
      if (sense[r] == RowSense::GreaterEqual) sense[r] = RowSense::LessEqual;
      else if (sense[r] == RowSense::LessEqual) sense[r] = RowSense::GreaterEqual;
    }
  }

  // Columns: structural | one slack or surplus per inequality | one artificial
  // per row that has no slack to start the basis with.
  std::vector<std::size_t> slack_col(m, SIZE_MAX);
  std::vector<std::size_t> art_col(m, SIZE_MAX);
  std::size_t cols = n;
  for (std::size_t r = 0; r < m; ++r) {
    if (sense[r] != RowSense::Equal) slack_col[r] = cols++;
  }
  const std::size_t first_art = cols;
  for (std::size_t r = 0; r < m; ++r) {
    if (sense[r] != RowSense::LessEqual) art_col[r] = cols++;
  }

  detail::Tableau t(m, cols);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t.at(r, c) = sign[r] * lp.rows[r][c];
    t.rhs(r) = sign[r] * lp.rhs[r];
    if (slack_col[r] != SIZE_MAX) {
      t.at(r, slack_col[r]) = sense[r] == RowSense::LessEqual ? 1.0 : -1.0;
    }
    if (art_col[r] != SIZE_MAX) {
      t.at(r, art_col[r]) = 1.0;
      t.basis()[r] = art_col[r];
    } else {
      t.basis()[r] = slack_col[r];
    }
  }

  const std::size_t cap = 50 * (m + cols);
  std::size_t iterations = 0;

  // Phase 1: minimise the sum of artificials, priced out against the basis.
  for (std::size_t r = 0; r < m; ++r) {
    if (art_col[r] == SIZE_MAX) continue;
    for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) -= t.at(r, c);
    t.at(m, art_col[r]) = 0.0;
  }
  if (first_art < cols) {
    if (!t.optimize(tol, iterations, cap)) {
      throw Error(Errc::Unbounded, "phase-1 problem reported unbounded");
    }
    double scale = 1.0;
    for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, std::abs(lp.rhs[r]));
    if (-t.objective() > tol * scale * static_cast<double>(m + 1)) {
      throw Error(Errc::StructuralInfeasible, "linear program is infeasible");
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (t.basis()[r] < first_art) continue;
      for (std::size_t c = 0; c < first_art; ++c) {
        if (std::abs(t.at(r, c)) > tol) {
          t.pivot(r, c);
          break;
        }
      }
      // A row left with only its artificial is redundant; the artificial
      // stays basic at zero and is never allowed to grow since it is barred.
    }
    for (std::size_t c = first_art; c < cols; ++c) t.barred()[c] = true;
  }

  // Phase 2: original costs priced out against the current basis.
  for (std::size_t c = 0; c <= cols; ++c) t.cost(c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) t.cost(c) = lp.cost[c];
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = t.basis()[r];
    const double cb = b < n ? lp.cost[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(r, c);
  }
  if (!t.optimize(tol, iterations, cap)) {
    throw Error(Errc::Unbounded, "objective is unbounded below");
  }

  SimplexResult result;
  result.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = t.basis()[r];
    if (b < n) result.x[b] = std::max(0.0, t.rhs(r));
  }
  for (std::size_t c = 0; c < n; ++c) result.objective += lp.cost[c] * result.x[c];
  result.iterations = iterations;
  return result;
}

}  // namespace sideobs
