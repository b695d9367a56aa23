#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's algorithms; only its plain data accessors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "robustmax/curve.hpp"
#include "robustmax/space.hpp"

namespace oracle {

/// Linear scan evaluation of a right-continuous piecewise-linear curve.
inline double eval(const robustmax::PiecewiseLinear& pl, double x) {
  std::size_t k = 0;
  while (k + 1 < pl.knots.size() && pl.knots[k + 1] <= x) ++k;
  const double slope = k + 1 < pl.knots.size() ? pl.slopes[k] : pl.tail_slope;
  return pl.values[k] + slope * (x - pl.knots[k]);
}

/// U^v(x) = U(min(x, v)).
inline double eval_capped(const robustmax::PiecewiseLinear& pl, double v, double x) {
  return eval(pl, std::min(x, v));
}

struct Point {
  double x, y;
};

/// Upper hull by gift wrapping: from the leftmost point, repeatedly take the
/// point that makes every other point lie on or below the connecting line,
/// preferring the farthest such point.
inline std::vector<Point> upper_hull_jarvis(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y > b.y); });
  std::vector<Point> uniq;
  for (const auto& p : pts)
    if (uniq.empty() || p.x != uniq.back().x) uniq.push_back(p);
  std::vector<Point> hull{uniq.front()};
  std::size_t cur = 0;
  while (cur + 1 < uniq.size()) {
    std::size_t best = cur + 1;
    for (std::size_t j = cur + 2; j < uniq.size(); ++j) {
      const double sb = (uniq[best].y - uniq[cur].y) / (uniq[best].x - uniq[cur].x);
      const double sj = (uniq[j].y - uniq[cur].y) / (uniq[j].x - uniq[cur].x);
      if (sj >= sb) best = j;
    }
    hull.push_back(uniq[best]);
    cur = best;
  }
  return hull;
}

/// Piecewise-linear interpolation through hull vertices; flat beyond the ends.
inline double eval_hull(const std::vector<Point>& hull, double x) {
  if (x <= hull.front().x) return hull.front().y;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    if (x <= hull[k + 1].x) {
      const double t = (x - hull[k].x) / (hull[k + 1].x - hull[k].x);
      return hull[k].y + t * (hull[k + 1].y - hull[k].y);
    }
  }
  return hull.back().y;
}

/// Upper hull of the curve capped at v, sampled on `grid` plus every knot
/// below v and v itself.
inline std::vector<Point> capped_hull(const robustmax::PiecewiseLinear& pl, double v, const std::vector<double>& grid) {
  std::vector<Point> pts;
  for (double x : grid)
    if (x <= v) pts.push_back({x, eval_capped(pl, v, x)});
  for (double k : pl.knots)
    if (k <= v) pts.push_back({k, eval_capped(pl, v, k)});
  pts.push_back({v, eval_capped(pl, v, v)});
  return upper_hull_jarvis(pts);
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(intervals);
  g.back() = hi;
  return g;
}

/// Gap endpoints around grid[jy] by walking the grid while the hull stays
/// strictly above the capped curve. The grid must contain every knot below v.
struct ScannedGap {
  double a, b;
};

inline ScannedGap scan_gap(const robustmax::PiecewiseLinear& pl, double v, const std::vector<double>& grid,
                           std::size_t jy, const std::vector<Point>& hull, double tol = 1e-10) {
  auto above = [&](std::size_t j) { return eval_hull(hull, grid[j]) - eval_capped(pl, v, grid[j]) > tol; };
  if (!above(jy)) return {grid[jy], grid[jy]};
  std::size_t lo = jy, hi = jy;
  while (lo > 0 && above(lo - 1)) --lo;
  while (hi + 1 < grid.size() && grid[hi + 1] <= v && above(hi + 1)) ++hi;
  return {grid[lo > 0 ? lo - 1 : 0], grid[std::min(hi + 1, grid.size() - 1)]};
}

/// Exact sup_X sum_i p_i z_i C_i(X_i) s.t. sum_i p_i psi_i X_i <= x, 0 <= X_i <= ub_i,
/// for concave piecewise-linear C_i, by minimizing the Lagrangian dual
/// D(l) = l x + sum_i p_i max_{X in [0,ub_i]} (z_i C_i(X) - l psi_i X) over the
/// breakpoints l in {0} U {z_i s / psi_i}.
inline double lagrangian_sup(const std::vector<double>& p, const std::vector<double>& z, const std::vector<double>& psi,
                             const std::vector<robustmax::PiecewiseLinear>& curves, const std::vector<double>& ub,
                             double x) {
  const std::size_t n = p.size();
  std::vector<std::vector<double>> cand(n);
  std::vector<double> lambdas{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    cand[i].push_back(0.0);
    cand[i].push_back(ub[i]);
    const auto& pl = curves[i];
    for (std::size_t k = 0; k < pl.knots.size(); ++k)
      if (pl.knots[k] < ub[i]) cand[i].push_back(pl.knots[k]);
    for (double s : pl.slopes) lambdas.push_back(z[i] * s / psi[i]);
    lambdas.push_back(z[i] * pl.tail_slope / psi[i]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (double l : lambdas) {
    double d = l * x;
    for (std::size_t i = 0; i < n; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (double X : cand[i]) m = std::max(m, z[i] * eval(curves[i], X) - l * psi[i] * X);
      d += p[i] * m;
    }
    best = std::min(best, d);
  }
  return best;
}

/// Visits every point of the simplex grid {mu : mu_k = c_k / N, sum c_k = N}.
inline void simplex_grid(std::size_t m, int N, const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<int> c(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
    if (k + 1 == m) {
      c[k] = left;
      std::vector<double> mu(m);
      for (std::size_t j = 0; j < m; ++j) mu[j] = static_cast<double>(c[j]) / N;
      fn(mu);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[k] = v;
      rec(k + 1, left - v);
    }
  };
  rec(0, N);
}

/// Random non-decreasing curve with `knots` knots on the lattice
/// {j * x_max / lattice}, random slopes and upward jumps.
inline robustmax::UtilityCurve random_curve(std::mt19937_64& rng, std::size_t knots, double x_max, int lattice,
                                            double jump_rate = 0.5, bool tail = false) {
  std::uniform_int_distribution<int> pos(1, lattice - 1);
  std::vector<int> idx{0, lattice};
  while (idx.size() < std::max<std::size_t>(knots, 2)) {
    const int j = pos(rng);
    if (std::find(idx.begin(), idx.end(), j) == idx.end()) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end());
  std::uniform_real_distribution<double> slope(0.0, 2.0), jump(0.0, 1.5), coin(0.0, 1.0);
  std::vector<double> ks, vs, ss;
  for (int j : idx) ks.push_back(x_max * j / lattice);
  vs.push_back(coin(rng));
  for (std::size_t k = 1; k < ks.size(); ++k) {
    const double s = coin(rng) < 0.2 ? 0.0 : slope(rng);
    ss.push_back(s);
    vs.push_back(vs.back() + s * (ks[k] - ks[k - 1]) + (coin(rng) < jump_rate ? jump(rng) : 0.0));
  }
  return robustmax::UtilityCurve(ks, vs, ss, tail ? slope(rng) * 0.1 : 0.0);
}

}  // namespace oracle
