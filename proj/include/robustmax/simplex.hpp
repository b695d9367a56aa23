#pragma once

// Dense tableau simplex for small problems of the form
//
//   maximize c.x  subject to  A x <= b,  x >= 0,  with b >= 0,
//
// so the slack basis is feasible from the start. Bland's rule guards against
// cycling; problem sizes here are a few hundred columns at most.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace robustmax {

struct LinearProgram {
  std::vector<double> c;               // objective, size n
  std::vector<std::vector<double>> a;  // m rows of size n
  std::vector<double> b;               // size m, non-negative

  std::size_t variables() const noexcept { return c.size(); }
  std::size_t constraints() const noexcept { return b.size(); }

  void add_row(std::vector<double> row, double rhs) {
    a.push_back(std::move(row));
    b.push_back(rhs);
  }
};

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;  // one per constraint row, non-negative at optimum
  std::size_t iterations = 0;
};

inline LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-11, std::size_t max_iter = 100000) {
  const std::size_t n = lp.variables(), m = lp.constraints();
  if (lp.a.size() != m) throw std::invalid_argument("solve_lp: row count mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.a[i].size() != n) throw std::invalid_argument("solve_lp: row length mismatch");
    if (lp.b[i] < 0.0) throw std::invalid_argument("solve_lp: negative right-hand side");
  }
  const std::size_t cols = n + m;
  // rows 0..m-1 constraints, row m objective; last column is the rhs.
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = lp.a[i][j];
    t[i][n + i] = 1.0;
    t[i][cols] = lp.b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -lp.c[j];

  LpSolution sol;
  for (;;) {
    if (sol.iterations >= max_iter) {
      sol.status = LpStatus::iteration_limit;
      break;
    }
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (t[m][j] < -tol) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > tol) {
        const double ratio = t[i][cols] / t[i][enter];
        const bool tie = leave < m && std::abs(ratio - best) <= tol;
        if (leave == m || (!tie && ratio < best) || (tie && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
    }
    if (leave == m) {
      sol.status = LpStatus::unbounded;
      break;
    }

    const double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
    ++sol.iterations;
  }

  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = std::max(0.0, t[i][cols]);
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  sol.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) sol.duals[i] = std::max(0.0, t[m][n + i]);
  return sol;
}

}  // namespace robustmax
