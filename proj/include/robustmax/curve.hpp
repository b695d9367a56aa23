#pragma once

// Piecewise-linear utility curves, their concave envelopes, capping and the
// gap intervals on which the envelope strictly exceeds the curve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace robustmax {

/// Thrown when curve data violates a structural invariant. Carries the index
/// of the offending knot (or npos when the problem is not knot-specific).
class CurveError : public std::invalid_argument {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  CurveError(const std::string& what, std::size_t knot = npos)
      : std::invalid_argument(what), knot_(knot) {}

  std::size_t knot() const noexcept { return knot_; }

 private:
  std::size_t knot_;
};

namespace detail {

inline double scale_tol(double a, double b, double tol) {
  return tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Right-continuous piecewise-linear function on [0, inf).
///
/// On [knots[k], knots[k+1]) the function is values[k] + slopes[k] * (x - knots[k]);
/// beyond the last knot it continues with tail_slope. The value at a knot is
/// always the right limit, so jumps at knots are allowed.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> slopes;  // size knots.size() - 1
  double tail_slope = 0.0;

  std::size_t size() const noexcept { return knots.size(); }
  double x_max() const { return knots.back(); }

  /// Index k with knots[k] <= x < knots[k+1] (last index when x >= x_max).
  std::size_t piece(double x) const {
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    return static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1;
  }

  double operator()(double x) const {
    if (!(x >= 0.0)) throw std::domain_error("curve evaluated at negative x");
    const std::size_t k = piece(x);
    const double slope = k + 1 < knots.size() ? slopes[k] : tail_slope;
    return values[k] + slope * (x - knots[k]);
  }

  /// Limit from the left at knot k (k >= 1).
  double left_limit(std::size_t k) const {
    return values[k - 1] + slopes[k - 1] * (knots[k] - knots[k - 1]);
  }

  void check_shape() const {
    if (knots.empty()) throw CurveError("curve needs at least one knot");
    if (values.size() != knots.size())
      throw CurveError("values must have one entry per knot");
    if (slopes.size() + 1 != knots.size())
      throw CurveError("slopes must have one entry per interval between knots");
    if (knots.front() != 0.0) throw CurveError("first knot must be 0", 0);
    for (std::size_t k = 0; k < knots.size(); ++k) {
      if (!std::isfinite(knots[k]) || !std::isfinite(values[k]))
        throw CurveError("non-finite knot " + std::to_string(k), k);
      if (k > 0 && !(knots[k] > knots[k - 1]))
        throw CurveError("knots not strictly increasing at index " + std::to_string(k), k);
    }
    if (!std::isfinite(tail_slope)) throw CurveError("non-finite tail slope");
  }
};

/// Non-decreasing upper-semicontinuous utility in right-continuous normal form.
class UtilityCurve {
 public:
  UtilityCurve(std::vector<double> knots, std::vector<double> values,
               std::vector<double> slopes, double tail_slope = 0.0)
      : pl_{std::move(knots), std::move(values), std::move(slopes), tail_slope} {
    pl_.check_shape();
    for (std::size_t k = 0; k + 1 < pl_.size(); ++k) {
      if (pl_.slopes[k] < 0.0)
        throw CurveError("negative slope after knot " + std::to_string(k), k);
      const double left = pl_.left_limit(k + 1);
      if (pl_.values[k + 1] < left - detail::scale_tol(left, pl_.values[k + 1], 1e-12))
        throw CurveError("downward jump at knot " + std::to_string(k + 1), k + 1);
    }
    if (pl_.tail_slope < 0.0) throw CurveError("negative tail slope");
  }

  /// Step of height `height` at `at`, zero before.
  static UtilityCurve step(double at, double height = 1.0) {
    return UtilityCurve({0.0, at}, {0.0, height}, {0.0}, 0.0);
  }

  double operator()(double x) const { return pl_(x); }
  const PiecewiseLinear& data() const noexcept { return pl_; }
  const std::vector<double>& knots() const noexcept { return pl_.knots; }
  const std::vector<double>& values() const noexcept { return pl_.values; }
  const std::vector<double>& slopes() const noexcept { return pl_.slopes; }
  double tail_slope() const noexcept { return pl_.tail_slope; }
  double x_max() const { return pl_.x_max(); }

  /// Discrete stand-in for the growth condition U(x)/x -> 0.
  bool satisfies_growth() const noexcept { return pl_.tail_slope == 0.0; }

 private:
  PiecewiseLinear pl_;
};

/// Continuous, concave, non-decreasing piecewise-linear curve.
class ConcaveCurve {
 public:
  ConcaveCurve(std::vector<double> knots, std::vector<double> values,
               std::vector<double> slopes, double tail_slope = 0.0)
      : pl_{std::move(knots), std::move(values), std::move(slopes), tail_slope} {
    pl_.check_shape();
    for (std::size_t k = 0; k + 1 < pl_.size(); ++k) {
      const double left = pl_.left_limit(k + 1);
      if (std::abs(pl_.values[k + 1] - left) > detail::scale_tol(left, pl_.values[k + 1], 1e-9))
        throw CurveError("concave curve jumps at knot " + std::to_string(k + 1), k + 1);
      if (pl_.slopes[k] < 0.0) throw CurveError("decreasing concave curve", k);
      const double next = k + 2 < pl_.size() ? pl_.slopes[k + 1] : pl_.tail_slope;
      if (next > pl_.slopes[k] + detail::scale_tol(next, pl_.slopes[k], 1e-12))
        throw CurveError("slopes increase after knot " + std::to_string(k + 1), k + 1);
    }
    if (pl_.tail_slope < 0.0) throw CurveError("negative tail slope");
  }

  double operator()(double x) const { return pl_(x); }
  const PiecewiseLinear& data() const noexcept { return pl_; }
  const std::vector<double>& knots() const noexcept { return pl_.knots; }
  const std::vector<double>& values() const noexcept { return pl_.values; }
  const std::vector<double>& slopes() const noexcept { return pl_.slopes; }
  double tail_slope() const noexcept { return pl_.tail_slope; }
  double x_max() const { return pl_.x_max(); }

  /// Viewing a concave curve as a utility (it trivially satisfies the invariants).
  UtilityCurve as_utility() const {
    return UtilityCurve(pl_.knots, pl_.values, pl_.slopes, pl_.tail_slope);
  }

 private:
  PiecewiseLinear pl_;
};

inline double evaluate(const UtilityCurve& c, double x) { return c(x); }
inline double evaluate(const ConcaveCurve& c, double x) { return c(x); }

/// Smallest concave curve dominating `curve`.
///
/// Hull vertices are a subset of the knots (right values), since on each piece
/// the curve is linear up to a left limit that the next knot's value dominates.
/// Beyond the hull the envelope continues with the source tail slope; hull
/// vertices whose outgoing slope is below that tail are dropped.
inline ConcaveCurve concavify(const UtilityCurve& curve) {
  const auto& xs = curve.knots();
  const auto& ys = curve.values();
  std::vector<std::size_t> hull;
  hull.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (hull.size() >= 2) {
      const std::size_t o = hull[hull.size() - 2];
      const std::size_t a = hull.back();
      // Drop a when it is on or below the chord o -> k.
      const double cross = (xs[a] - xs[o]) * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (xs[k] - xs[o]);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(k);
  }
  const double tail = curve.tail_slope();
  auto seg_slope = [&](std::size_t i) {
    return (ys[hull[i + 1]] - ys[hull[i]]) / (xs[hull[i + 1]] - xs[hull[i]]);
  };
  while (hull.size() >= 2 && seg_slope(hull.size() - 2) < tail) hull.pop_back();

  std::vector<double> kx, ky, sl;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    kx.push_back(xs[hull[i]]);
    ky.push_back(ys[hull[i]]);
    if (i + 1 < hull.size()) sl.push_back(seg_slope(i));
  }
  return ConcaveCurve(std::move(kx), std::move(ky), std::move(sl), tail);
}

inline ConcaveCurve concavify(const ConcaveCurve& curve) { return concavify(curve.as_utility()); }

/// U^k(x) = U(min(x, k)).
inline UtilityCurve cap(const UtilityCurve& curve, double k) {
  if (!(k > 0.0)) throw std::domain_error("cap level must be positive");
  const auto& pl = curve.data();
  std::vector<double> kx, ky, sl;
  for (std::size_t i = 0; i < pl.size() && pl.knots[i] < k; ++i) {
    kx.push_back(pl.knots[i]);
    ky.push_back(pl.values[i]);
    if (i + 1 < pl.size() && pl.knots[i + 1] < k) sl.push_back(pl.slopes[i]);
  }
  const double at_k = curve(k);
  // kx.back() < k always, since knots[0] = 0 < k.
  sl.push_back(kx.size() < pl.size() ? pl.slopes[kx.size() - 1] : pl.tail_slope);
  kx.push_back(k);
  ky.push_back(at_k);
  return UtilityCurve(std::move(kx), std::move(ky), std::move(sl), 0.0);
}

/// Maximal interval [a, b] around y on which the capped envelope exceeds the
/// capped curve, with the mixing weight lambda satisfying y = lambda a + (1 - lambda) b.
struct GapInterval {
  double v = 0.0;
  double y = 0.0;
  double a = 0.0;
  double b = 0.0;
  double lambda = 1.0;
  double alpha_value = 0.0;
  double beta_value = 0.0;

  bool degenerate() const noexcept { return !(a < b); }
};

/// A curve paired with its envelope, with contact information at the knots.
///
/// The set where curve and envelope agree is a finite union of knots and whole
/// pieces, so every gap endpoint is a knot of the curve.
class EnvelopePair {
 public:
  static constexpr double touch_tol = 1e-12;

  explicit EnvelopePair(UtilityCurve curve)
      : curve_(std::move(curve)), hull_(concavify(curve_)) {
    const auto& pl = curve_.data();
    touch_.resize(pl.size());
    for (std::size_t k = 0; k < pl.size(); ++k) touch_[k] = agrees(pl.knots[k], pl.values[k]);
  }

  const UtilityCurve& curve() const noexcept { return curve_; }
  const ConcaveCurve& hull() const noexcept { return hull_; }

  /// True when U(y) = U_c(y) up to rounding.
  bool touches(double y) const { return agrees(y, curve_(y)); }

  GapInterval gap(double v, double y) const {
    GapInterval g;
    g.v = v;
    g.y = y;
    const auto& xs = curve_.knots();
    if (touches(y) || y >= xs.back()) {
      g.a = g.b = y;
    } else {
      // Largest touching knot <= y and smallest touching knot > y.
      std::size_t k = curve_.data().piece(y);
      std::size_t lo = k;
      while (!touch_[lo]) --lo;  // knot 0 always touches
      std::size_t hi = k + 1;
      while (hi < xs.size() && !touch_[hi]) ++hi;
      g.a = xs[lo];
      g.b = hi < xs.size() ? xs[hi] : std::numeric_limits<double>::infinity();
    }
    if (g.a < g.b) {
      g.lambda = (g.b - y) / (g.b - g.a);
    } else {
      g.lambda = 1.0;
    }
    g.alpha_value = hull_(g.a);
    g.beta_value = std::isfinite(g.b) ? hull_(g.b) : std::numeric_limits<double>::infinity();
    return g;
  }

  /// Certifies U_c > U strictly on a uniform grid inside (a, b).
  bool certify_strict(const GapInterval& g, std::size_t points = 2048, double tol = 1e-10) const {
    if (g.degenerate()) return touches(g.y);
    if (!touches(g.a) || !touches(g.b)) return false;
    for (std::size_t i = 1; i <= points; ++i) {
      const double x = g.a + (g.b - g.a) * static_cast<double>(i) / static_cast<double>(points + 1);
      if (x - g.a <= tol || g.b - x <= tol) continue;
      if (!(hull_(x) - curve_(x) > 0.0)) return false;
    }
    return true;
  }

 private:
  bool agrees(double x, double value) const {
    const double h = hull_(x);
    return h - value <= detail::scale_tol(h, value, touch_tol);
  }

  UtilityCurve curve_;
  ConcaveCurve hull_;
  std::vector<bool> touch_;
};

/// a(v, y), b(v, y) and the mixing weight for the curve capped at v.
///
/// `v` may be +inf, meaning no cap (y must then lie within the last knot).
inline GapInterval gap_interval(const UtilityCurve& curve, double v, double y) {
  const bool uncapped = std::isinf(v);
  if (!(y >= 0.0) || (!uncapped && y > v) || (uncapped && y > curve.x_max()))
    throw std::domain_error("gap query point outside [0, v]");
  if (uncapped) {
    if (!curve.satisfies_growth()) {
      // Tail may leave the envelope; cap at the last knot instead.
      EnvelopePair env(cap(curve, curve.x_max()));
      auto g = env.gap(v, y);
      return g;
    }
    return EnvelopePair(curve).gap(v, y);
  }
  return EnvelopePair(cap(curve, v)).gap(v, y);
}

/// Tabulated endpoints a(v, y), b(v, y); entries with y > v are empty.
struct GapEndpointTable {
  std::vector<double> v_grid;
  std::vector<double> y_grid;
  std::vector<std::vector<std::optional<std::pair<double, double>>>> ab;  // [v][y]
};

inline GapEndpointTable envelope_gap_endpoints_table(const UtilityCurve& curve,
                                                     std::span<const double> v_grid,
                                                     std::span<const double> y_grid) {
  auto increasing = [](std::span<const double> g) {
    return std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
  };
  if (!increasing(v_grid) || !increasing(y_grid))
    throw std::invalid_argument("grids must be strictly increasing");
  GapEndpointTable t;
  t.v_grid.assign(v_grid.begin(), v_grid.end());
  t.y_grid.assign(y_grid.begin(), y_grid.end());
  t.ab.resize(v_grid.size());
  for (std::size_t i = 0; i < v_grid.size(); ++i) {
    EnvelopePair env(cap(curve, v_grid[i]));
    t.ab[i].resize(y_grid.size());
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
      if (y_grid[j] < 0.0 || y_grid[j] > v_grid[i]) continue;
      const auto g = env.gap(v_grid[i], y_grid[j]);
      t.ab[i][j] = std::make_pair(g.a, g.b);
    }
  }
  return t;
}

}  // namespace robustmax
