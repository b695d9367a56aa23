#pragma once

// Random inputs and oracle expectations shared by the unit and acceptance tests.

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "robustmax/instance.hpp"
#include "robustmax/payoff.hpp"

namespace fixtures {

using namespace robustmax;

inline double cap_level(const Instance& inst, bool constrained, std::size_t i) {
  return constrained ? inst.space.w()[i] : inst.utility.x_max();
}

/// Feasible randomized payoff with 1-3 atoms per state inside [0, v_i]. About
/// a third of the values sit on knots of the curve.
inline RandomizedPayoff random_feasible_payoff(const Instance& inst, bool constrained, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto& knots = inst.utility.knots();
  std::vector<std::vector<Atom>> atoms(inst.space.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double v = cap_level(inst, constrained, i);
    const std::size_t m = 1 + rng() % 3;
    std::vector<double> w(m);
    double tot = 0.0;
    for (auto& x : w) tot += (x = 0.1 + U(rng));
    for (std::size_t j = 0; j < m; ++j) {
      double value = U(rng) * v;
      if (U(rng) < 0.33) value = std::min(v, knots[rng() % knots.size()]);
      atoms[i].push_back({value, w[j] / tot});
    }
    double s = 0.0;
    for (const auto& a : atoms[i]) s += a.weight;
    atoms[i].back().weight += 1.0 - s;
  }
  RandomizedPayoff X(atoms);
  const double c = cost(X, inst.space, inst.pricing);
  if (c > inst.x) {
    const double scale = inst.x / c * (0.5 + 0.5 * U(rng));
    for (auto& st : atoms)
      for (auto& a : st) a.value *= scale;
    X = RandomizedPayoff(atoms);
  }
  return X;
}

/// Per-state reference curves: U^{v_i} and its upper hull through the knots.
struct OracleCurves {
  std::vector<double> v;
  std::vector<std::vector<oracle::Point>> hulls;
  const PiecewiseLinear* pl = nullptr;

  double utility(std::size_t i, double x) const { return oracle::eval_capped(*pl, v[i], x); }
  double envelope(std::size_t i, double x) const { return oracle::eval_hull(hulls[i], std::min(x, v[i])); }
};

inline OracleCurves oracle_curves(const Instance& inst, bool constrained) {
  OracleCurves oc;
  oc.pl = &inst.utility.data();
  for (std::size_t i = 0; i < inst.space.size(); ++i) {
    oc.v.push_back(cap_level(inst, constrained, i));
    oc.hulls.push_back(oracle::capped_hull(*oc.pl, oc.v.back(), {}));
  }
  return oc;
}

/// The hulls as plain piecewise-linear data, for the Lagrangian oracle.
inline std::vector<PiecewiseLinear> hull_curves(const OracleCurves& oc) {
  std::vector<PiecewiseLinear> out;
  for (const auto& h : oc.hulls) {
    PiecewiseLinear pl;
    for (const auto& pt : h) {
      pl.knots.push_back(pt.x);
      pl.values.push_back(pt.y);
    }
    for (std::size_t k = 0; k + 1 < h.size(); ++k) pl.slopes.push_back((h[k + 1].y - h[k].y) / (h[k + 1].x - h[k].x));
    out.push_back(std::move(pl));
  }
  return out;
}

/// sup of E_z[U_c(X)] over the budget set, computed by the Lagrangian oracle.
inline double oracle_envelope_sup(const Instance& inst, bool constrained, const std::vector<double>& z) {
  const auto oc = oracle_curves(inst, constrained);
  return oracle::lagrangian_sup(inst.space.p(), z, inst.pricing.psi(), hull_curves(oc), oc.v, inst.x);
}

/// sum_i p_i z_i sum_j w_ij f_i(x_ij)
template <class F>
double oracle_expectation(const Instance& inst, const std::vector<double>& z, const RandomizedPayoff& X, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < inst.space.size(); ++i)
    for (const Atom& a : X[i]) s += inst.space.p(i) * z[i] * a.weight * f(i, a.value);
  return s;
}

inline double oracle_cost(const Instance& inst, const RandomizedPayoff& X) {
  double s = 0.0;
  for (std::size_t i = 0; i < inst.space.size(); ++i)
    for (const Atom& a : X[i]) s += inst.space.p(i) * inst.pricing[i] * a.weight * a.value;
  return s;
}

}  // namespace fixtures
