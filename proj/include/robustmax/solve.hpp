#pragma once

// Value functions of the robust problem on a finite scenario space.
//
//   sup-inf   sup_X min_k E_{z^k}[U(X)]        (X in the budget set)
//   inf-sup   inf_{mu in simplex} sup_X E_{z(mu)}[U(X)]
//
// For the envelope U_c the single-measure sup is a separable concave program
// with one linear constraint (greedy by marginal utility per unit price), and the
// robust sup-inf is a linear program over the envelope segments. For the raw
// utility U the sup uses improvement of the envelope optimizer, which attains
// the envelope value with a randomized payoff.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "robustmax/curve.hpp"
#include "robustmax/improve.hpp"
#include "robustmax/payoff.hpp"
#include "robustmax/simplex.hpp"
#include "robustmax/space.hpp"

namespace robustmax {

enum class CurveKind { utility, envelope };
enum class Scope { all, equivalent };

inline const char* to_string(CurveKind k) { return k == CurveKind::utility ? "U" : "Uc"; }
inline const char* to_string(Scope s) { return s == Scope::all ? "Q" : "Qe"; }

struct SolveOptions {
  int grid = 64;          // simplex grid resolution for inf-sup
  int refine = 1024;      // finest zoom resolution around the incumbent
  double eps = 1e-6;      // mixing weight pushing boundary densities into Q_e
  bool brute = true;      // include deterministic brute candidates when small
};

struct SolveResult {
  double value = 0.0;
  RandomizedPayoff optimizer;
  std::vector<double> mixture;  // weights over the extremes of the family
  std::string method;
  std::string candidate;        // which candidate class attained the value
  double gap = 0.0;             // certified bound on |value - true value|
};

/// Thrown by the brute-force oracle when an instance exceeds its size limits.
class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

/// Upper bound on each state's payoff: W in the constrained case, else the
/// curve's last knot (the curve is flat beyond it).
inline std::vector<double> payoff_bounds(const ScenarioSpace& space, const UtilityCurve& curve, bool constrained) {
  std::vector<double> ub(space.size(), curve.x_max());
  if (constrained)
    for (std::size_t i = 0; i < space.size(); ++i) ub[i] = space.w()[i];
  return ub;
}

inline void require_growth(const UtilityCurve& curve, bool constrained) {
  if (!constrained && !curve.satisfies_growth())
    throw std::domain_error("unconstrained problem needs a curve with zero tail slope");
}

struct Segment {
  std::size_t state = 0;
  double start = 0.0;
  double length = 0.0;
  double slope = 0.0;
};

/// Increasing pieces of each state's envelope inside [0, ub_i].
inline std::vector<Segment> envelope_segments(const PerState<ConcaveCurve>& curves, const std::vector<double>& ub) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& pl = curves[i].data();
    for (std::size_t k = 0; k < pl.size(); ++k) {
      const double start = pl.knots[k];
      if (start >= ub[i]) break;
      const double end = k + 1 < pl.size() ? std::min(pl.knots[k + 1], ub[i]) : ub[i];
      const double slope = k + 1 < pl.size() ? pl.slopes[k] : pl.tail_slope;
      if (slope > 0.0 && end > start) segs.push_back({i, start, end - start, slope});
    }
  }
  return segs;
}

inline double max_range(const PerState<ConcaveCurve>& curves, const std::vector<double>& ub) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    lo = std::min(lo, curves(i, 0.0));
    hi = std::max(hi, curves(i, ub[i]));
  }
  return hi - lo;
}

/// Bound on max_{k,l} (E_k - E_l) over payoffs, so |g(mu) - g(mu')| <= L/2 * |mu - mu'|_1.
inline double mixture_lipschitz(const ScenarioSpace& space, const MeasureFamily& family, double range) {
  double worst = 0.0;
  for (std::size_t k = 0; k < family.size(); ++k)
    for (std::size_t l = k + 1; l < family.size(); ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i < space.size(); ++i) s += space.p(i) * std::abs(family[k][i] - family[l][i]);
      worst = std::max(worst, s);
    }
  return worst * range / 2.0;
}

/// All integer compositions c of `total` into `parts` with lo[k] <= c[k] <= hi[k].
inline void for_each_composition(int total, const std::vector<int>& lo, const std::vector<int>& hi,
                                 const std::function<void(const std::vector<int>&)>& fn) {
  const std::size_t parts = lo.size();
  std::vector<int> c(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
    if (k + 1 == parts) {
      if (left >= lo[k] && left <= hi[k]) {
        c[k] = left;
        fn(c);
      }
      return;
    }
    for (int v = std::max(0, lo[k]); v <= std::min(left, hi[k]); ++v) {
      c[k] = v;
      rec(k + 1, left - v);
    }
  };
  rec(0, total);
}

}  // namespace detail

/// sup_X E_Q[C(X)] for per-state concave curves C_i under the budget and the
/// box 0 <= X_i <= ub_i. Fills envelope segments in decreasing order of
/// z_i * slope / psi_i until the budget is spent.
inline SolveResult maximize_concave_single(const ScenarioSpace& space, const Density& density,
                                           const PricingMeasure& pricing, const PerState<ConcaveCurve>& curves,
                                           const std::vector<double>& ub, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("budget must be positive");
  auto segs = detail::envelope_segments(curves, ub);
  std::vector<double> ratio(segs.size());
  for (std::size_t s = 0; s < segs.size(); ++s)
    ratio[s] = density[segs[s].state] * segs[s].slope / pricing[segs[s].state];
  std::vector<std::size_t> order(segs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
    if (segs[a].state != segs[b].state) return segs[a].state < segs[b].state;
    return segs[a].start < segs[b].start;
  });
  std::vector<double> X(space.size(), 0.0);
  double budget = x;
  for (std::size_t s : order) {
    if (ratio[s] <= 0.0 || budget <= 0.0) break;
    const auto& seg = segs[s];
    const double price = space.p(seg.state) * pricing[seg.state];
    const double take = std::min(seg.length, budget / price);
    X[seg.state] += take;
    budget -= take * price;
  }
  for (std::size_t i = 0; i < X.size(); ++i) X[i] = std::min(X[i], ub[i]);
  SolveResult r;
  r.optimizer = RandomizedPayoff::deterministic(X);
  r.value = expected_utility(r.optimizer, space, density, curves);
  r.method = "greedy";
  r.candidate = "deterministic";
  return r;
}

inline SolveResult maximize_concave_single(const ScenarioSpace& space, const Density& density,
                                           const PricingMeasure& pricing, const UtilityCurve& curve,
                                           const BudgetSpec& budget) {
  budget.validate();
  detail::require_growth(curve, budget.constrained);
  return maximize_concave_single(space, density, pricing, per_state_envelope(curve, space, budget.constrained),
                                 detail::payoff_bounds(space, curve, budget.constrained), budget.x);
}

/// sup_X min_k E_{z^k}[C(X)] as a linear program over envelope segments:
/// maximize t subject to t <= E_{z^k}[C(0)] + sum p_i z^k_i s d for each extreme,
/// the budget row, and 0 <= d <= segment length. Segment fills need not be
/// contiguous in the LP, but out-of-order fills never help because every
/// extreme weights a state's segments by the same non-negative factor.
inline SolveResult maximize_robust_concave(const ScenarioSpace& space, const MeasureFamily& family,
                                           const PricingMeasure& pricing, const PerState<ConcaveCurve>& curves,
                                           const std::vector<double>& ub, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("budget must be positive");
  const auto segs = detail::envelope_segments(curves, ub);
  const std::size_t m = family.size();
  std::vector<double> base(m, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < space.size(); ++i) base[k] += space.p(i) * family[k][i] * curves(i, 0.0);
  const double floor = *std::min_element(base.begin(), base.end());

  LinearProgram lp;
  const std::size_t nv = 1 + segs.size();
  lp.c.assign(nv, 0.0);
  lp.c[0] = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> row(nv, 0.0);
    row[0] = 1.0;
    for (std::size_t s = 0; s < segs.size(); ++s)
      row[1 + s] = -space.p(segs[s].state) * family[k][segs[s].state] * segs[s].slope;
    lp.add_row(std::move(row), base[k] - floor);
  }
  {
    std::vector<double> row(nv, 0.0);
    for (std::size_t s = 0; s < segs.size(); ++s) row[1 + s] = space.p(segs[s].state) * pricing[segs[s].state];
    lp.add_row(std::move(row), x);
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    std::vector<double> row(nv, 0.0);
    row[1 + s] = 1.0;
    lp.add_row(std::move(row), segs[s].length);
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw std::runtime_error("robust LP did not reach optimality");

  std::vector<double> X(space.size(), 0.0);
  for (std::size_t s = 0; s < segs.size(); ++s) X[segs[s].state] += sol.x[1 + s];
  for (std::size_t i = 0; i < X.size(); ++i) X[i] = std::min(X[i], ub[i]);
  SolveResult r;
  r.optimizer = RandomizedPayoff::deterministic(X);
  r.value = sol.objective + floor;
  r.mixture.assign(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(m));
  const double total = std::accumulate(r.mixture.begin(), r.mixture.end(), 0.0);
  if (total > 0.0)
    for (double& w : r.mixture) w /= total;
  r.method = "lp";
  r.candidate = "deterministic";
  return r;
}

/// Brute-force search over deterministic payoffs. Candidate values per state
/// are 0 and the knots of the (capped) curve inside [0, ub_i]; each affordable
/// tuple is evaluated as is and with the leftover budget pushed into each
/// single coordinate in turn. `objective` scores a deterministic payoff.
inline SolveResult brute_force_payoffs(const ScenarioSpace& space, const PricingMeasure& pricing,
                                       const PerState<UtilityCurve>& curves, const std::vector<double>& ub, double x,
                                       const std::function<double(const RandomizedPayoff&)>& objective,
                                       std::size_t max_states = 6, std::size_t max_candidates = 8) {
  const std::size_t n = space.size();
  if (n > max_states)
    throw TooLarge("brute force: " + std::to_string(n) + " states exceeds limit " + std::to_string(max_states));
  std::vector<std::vector<double>> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand[i].push_back(0.0);
    for (double k : curves[i].knots())
      if (k > 0.0 && k <= ub[i]) cand[i].push_back(k);
    if (cand[i].size() > max_candidates)
      throw TooLarge("brute force: state " + std::to_string(i) + " has " + std::to_string(cand[i].size()) +
                     " candidate values, limit " + std::to_string(max_candidates));
  }
  std::vector<double> price(n);
  for (std::size_t i = 0; i < n; ++i) price[i] = space.p(i) * pricing[i];

  SolveResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.method = "brute";
  best.candidate = "deterministic";
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> X(n);
  auto consider = [&](const std::vector<double>& v) {
    const auto payoff = RandomizedPayoff::deterministic(v);
    const double val = objective(payoff);
    if (val > best.value) {
      best.value = val;
      best.optimizer = payoff;
    }
  };
  for (;;) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      X[i] = cand[i][idx[i]];
      c += price[i] * X[i];
    }
    if (c <= x + kFeasibilityTol) {
      consider(X);
      const double left = x - c;
      if (left > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = std::min(ub[i], X[i] + left / price[i]);
          if (xi <= X[i]) continue;
          auto Y = X;
          Y[i] = xi;
          consider(Y);
        }
      }
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == cand[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

/// sup_X E_Q[U(X)] over deterministic payoffs; oracle for small instances.
inline SolveResult maximize_nonconcave_brute(const ScenarioSpace& space, const Density& density,
                                             const PricingMeasure& pricing, const UtilityCurve& curve,
                                             const BudgetSpec& budget) {
  budget.validate();
  const auto u = per_state_utility(curve, space, budget.constrained);
  return brute_force_payoffs(space, pricing, u, detail::payoff_bounds(space, curve, budget.constrained), budget.x,
                             [&](const RandomizedPayoff& X) { return expected_utility(X, space, density, u); });
}

/// Sup-side for a single density with the raw utility: the envelope optimizer,
/// improved on the support of the density. Attains the envelope value.
inline SolveResult maximize_utility_single(const ScenarioSpace& space, const Density& density,
                                           const PricingMeasure& pricing, const UtilityCurve& curve,
                                           const BudgetSpec& budget) {
  SolveResult env = maximize_concave_single(space, density, pricing, curve, budget);
  const auto imp = detail::improve_on_support(env.optimizer, space, density, pricing, curve, budget.constrained);
  SolveResult r;
  r.optimizer = imp.payoff;
  r.value = expected_utility(r.optimizer, space, density, per_state_utility(curve, space, budget.constrained));
  r.method = "greedy+improve";
  r.candidate = "improved";
  return r;
}

struct SupremumSample {
  std::size_t extreme = 0;
  std::size_t sample = 0;
  double envelope_value = 0.0;  // E_Q[U_c(X)]
  double improved_value = 0.0;  // E_Q[U(X*)]
};

struct SupremumCheck {
  std::vector<SupremumSample> samples;
  std::vector<double> sup_utility;   // per extreme: sup_X E_Q[U(X)] via the improved greedy optimizer
  std::vector<double> sup_envelope;  // per extreme: sup_X E_Q[U_c(X)]
  double max_gap = 0.0;              // max |E_Q[U_c(X)] - E_Q[U(X*)]|
  double max_excess = 0.0;           // max (E_Q[U(X*)] - sup_X E_Q[U_c(X)])^+
  double max_sup_gap = 0.0;          // max |sup E_Q[U] - sup E_Q[U_c]|

  bool ok(double tol = 1e-8) const { return max_gap <= tol && max_excess <= tol && max_sup_gap <= tol; }
};

/// For every equivalent extreme Q and every sample payoff X (which must be
/// feasible), checks E_Q[U_c(X)] = E_Q[U(improve(X))] <= sup E_Q[U_c], and
/// compares the two suprema sup E_Q[U] and sup E_Q[U_c].
inline SupremumCheck improve_supremum_check(const ScenarioSpace& space, const MeasureFamily& family,
                                            const PricingMeasure& pricing, const UtilityCurve& curve,
                                            const BudgetSpec& budget, const std::vector<RandomizedPayoff>& samples) {
  budget.validate();
  const auto envelope = per_state_envelope(curve, space, budget.constrained);
  const auto utility = per_state_utility(curve, space, budget.constrained);
  SupremumCheck out;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Density& z = family[k];
    if (!z.equivalent()) {
      out.sup_utility.push_back(std::numeric_limits<double>::quiet_NaN());
      out.sup_envelope.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double sup_c = maximize_concave_single(space, z, pricing, curve, budget).value;
    const double sup_u = maximize_utility_single(space, z, pricing, curve, budget).value;
    out.sup_envelope.push_back(sup_c);
    out.sup_utility.push_back(sup_u);
    out.max_sup_gap = std::max(out.max_sup_gap, std::abs(sup_u - sup_c));
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto verdict = is_feasible(samples[s], space, pricing, budget);
      if (!verdict.feasible) throw std::invalid_argument("sample payoff " + std::to_string(s) + " is infeasible");
      const auto imp = improve(samples[s], space, z, pricing, curve, budget.constrained);
      SupremumSample row{k, s, expected_utility(samples[s], space, z, envelope),
                         expected_utility(imp.payoff, space, z, utility)};
      out.max_gap = std::max(out.max_gap, std::abs(row.envelope_value - row.improved_value));
      out.max_excess = std::max(out.max_excess, row.improved_value - sup_c);
      out.samples.push_back(row);
    }
  }
  return out;
}

/// inf over the family (or its equivalent part) of the single-measure sup,
/// on a simplex grid over mixture weights, then a local zoom around the minimizer.
///
/// Every grid mixture is a member of Q, so the grid minimum is an upper bound
/// on the infimum. The returned gap bounds how far below it the infimum can lie:
/// nearest-grid-point distance times the Lipschitz constant of the inner sup,
/// plus the eps-mixing offset for the Q_e scope.
inline SolveResult infsup_value(const ScenarioSpace& space, const MeasureFamily& family,
                                const PricingMeasure& pricing, const UtilityCurve& curve, const BudgetSpec& budget,
                                CurveKind kind, Scope scope, const SolveOptions& opt = {}) {
  budget.validate();
  detail::require_growth(curve, budget.constrained);
  const std::size_t m = family.size();
  const auto envelope = per_state_envelope(curve, space, budget.constrained);
  const auto utility = per_state_utility(curve, space, budget.constrained);
  const auto ub = detail::payoff_bounds(space, curve, budget.constrained);
  const Density& anchor = family[family.anchor()];

  SolveResult best;
  best.value = std::numeric_limits<double>::infinity();
  best.method = "simplex-grid";

  auto inner = [&](const Density& z) -> SolveResult {
    SolveResult env = maximize_concave_single(space, z, pricing, envelope, ub, budget.x);
    if (kind == CurveKind::envelope) return env;
    const auto imp = detail::improve_on_support(env.optimizer, space, z, pricing, curve, budget.constrained);
    SolveResult r;
    r.optimizer = imp.payoff;
    r.value = expected_utility(r.optimizer, space, z, utility);
    r.candidate = "improved";
    return r;
  };
  auto evaluate_at = [&](const std::vector<int>& c, int total) {
    std::vector<double> mu(m);
    for (std::size_t k = 0; k < m; ++k) mu[k] = static_cast<double>(c[k]) / total;
    const Density z = mix(space, family.extremes(), mu);
    std::vector<std::pair<Density, std::vector<double>>> points;
    if (!z.equivalent()) {
      // Pushed toward the anchor: inside Q_e, and still a member of Q.
      std::vector<double> mu_eps(m);
      for (std::size_t k = 0; k < m; ++k) mu_eps[k] = (1.0 - opt.eps) * mu[k];
      mu_eps[family.anchor()] += opt.eps;
      points.emplace_back(eps_mix(space, z, anchor, opt.eps), mu_eps);
      if (scope == Scope::all) points.emplace_back(z, mu);
    } else {
      points.emplace_back(z, mu);
    }
    for (auto& [dens, weights] : points) {
      SolveResult r = inner(dens);
      if (r.value < best.value) {
        best.value = r.value;
        best.optimizer = std::move(r.optimizer);
        best.mixture = weights;
        best.candidate = r.candidate.empty() ? "deterministic" : r.candidate;
      }
    }
  };

  const int N = opt.grid;
  detail::for_each_composition(N, std::vector<int>(m, 0), std::vector<int>(m, N),
                               [&](const std::vector<int>& c) { evaluate_at(c, N); });
  // Zoom: halve the step around the incumbent until the refinement resolution.
  for (int R = 2 * N; m > 1 && R <= opt.refine; R *= 2) {
    std::vector<int> lo(m), hi(m);
    for (std::size_t k = 0; k < m; ++k) {
      const int centre = static_cast<int>(std::lround(best.mixture[k] * R));
      lo[k] = std::max(0, centre - 2);
      hi[k] = std::min(R, centre + 2);
    }
    detail::for_each_composition(R, lo, hi, [&](const std::vector<int>& c) { evaluate_at(c, R); });
  }

  const double lip = detail::mixture_lipschitz(space, family, detail::max_range(envelope, ub));
  best.gap = 0.5 * lip * static_cast<double>(m) / N;
  if (scope == Scope::equivalent) best.gap += opt.eps * lip;
  return best;
}

inline SolveResult maximize_robust_concave(const ScenarioSpace& space, const MeasureFamily& family,
                                           const PricingMeasure& pricing, const UtilityCurve& curve,
                                           const BudgetSpec& budget) {
  budget.validate();
  detail::require_growth(curve, budget.constrained);
  try {
    return maximize_robust_concave(space, family, pricing, per_state_envelope(curve, space, budget.constrained),
                                   detail::payoff_bounds(space, curve, budget.constrained), budget.x);
  } catch (const std::runtime_error&) {
    // Numerical failure: fall back to the grid inf-sup, which equals the
    // sup-inf for the envelope up to its certified gap.
    SolveResult r = infsup_value(space, family, pricing, curve, budget, CurveKind::envelope, Scope::all);
    r.method = "simplex-grid-fallback";
    return r;
  }
}

/// sup_X inf_Q E_Q[curve(X)] over the family (Q) or its eps-pushed equivalent part (Q_e).
///
/// For the envelope this is the LP. For the raw utility the value is the best
/// worst-case utility among candidate payoffs: the local split of the LP
/// optimizer, its improvements under each equivalent extreme and, for small
/// instances, deterministic brute-force payoffs.
inline SolveResult supinf_value(const ScenarioSpace& space, const MeasureFamily& family,
                                const PricingMeasure& pricing, const UtilityCurve& curve, const BudgetSpec& budget,
                                CurveKind kind, Scope scope, const SolveOptions& opt = {}) {
  budget.validate();
  detail::require_growth(curve, budget.constrained);
  const MeasureFamily scoped = scope == Scope::all ? family : family.equivalent_part(space, opt.eps);
  const auto envelope = per_state_envelope(curve, space, budget.constrained);
  const auto ub = detail::payoff_bounds(space, curve, budget.constrained);
  const double lip = detail::mixture_lipschitz(space, family, detail::max_range(envelope, ub));

  SolveResult lp = maximize_robust_concave(space, scoped, pricing, curve, budget);
  lp.gap = scope == Scope::equivalent ? opt.eps * lip : 0.0;
  if (kind == CurveKind::envelope) return lp;

  const auto utility = per_state_utility(curve, space, budget.constrained);
  SolveResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.method = "candidates";
  best.mixture = lp.mixture;
  best.gap = lp.gap;
  auto consider = [&](const RandomizedPayoff& X, const char* label) {
    const auto wc = worst_case_utility(X, space, scoped, utility);
    if (wc.value > best.value) {
      best.value = wc.value;
      best.optimizer = X;
      best.candidate = label;
    }
  };
  consider(split_locally(lp.optimizer, space, curve, budget.constrained), "local-split");
  for (std::size_t k = 0; k < scoped.size(); ++k) {
    if (!scoped[k].equivalent()) continue;
    consider(improve(lp.optimizer, space, scoped[k], pricing, curve, budget.constrained).payoff, "improved");
  }
  if (opt.brute) {
    try {
      const auto r = brute_force_payoffs(space, pricing, utility, ub, budget.x, [&](const RandomizedPayoff& X) {
        return worst_case_utility(X, space, scoped, utility).value;
      });
      consider(r.optimizer, "brute-deterministic");
    } catch (const TooLarge&) {
    }
  }
  return best;
}

}  // namespace robustmax
