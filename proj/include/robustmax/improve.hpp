#pragma once

// Payoff improvement: every payoff atom sitting strictly inside a gap of the
// (capped) envelope is replaced by a two-point randomization on the gap
// endpoints. Within each class of atoms sharing a conditioning group and a gap,
// the high endpoint is placed on the low-phi end of the coupled uniform scale,
// phi = dQ^e/dQ, and the class-level mass balance keeps E_Q[U_c] unchanged
// while the cost E_{Q^e}[X] can only drop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "robustmax/curve.hpp"
#include "robustmax/payoff.hpp"
#include "robustmax/quantile.hpp"
#include "robustmax/space.hpp"

namespace robustmax {

/// Threshold on a class laid out in increasing-phi order.
struct Threshold {
  double sigma = 0.0;          // fraction of class mass on the b side, in [0,1]
  std::size_t boundary = 0;    // slot straddling the threshold
  double b_fraction = 0.0;     // share of the boundary slot that takes b
  std::vector<double> b_share; // per slot, share that takes b
};

/// Splits a class so that the mass taking the a-endpoint equals sum(w * lambda).
/// `weights` and `lambdas` are in coupled-scale order (increasing phi); b fills
/// the low end of the scale.
inline Threshold sigma_threshold(std::span<const double> weights, std::span<const double> lambdas) {
  if (weights.empty()) throw std::invalid_argument("sigma_threshold: empty class");
  if (weights.size() != lambdas.size()) throw std::invalid_argument("sigma_threshold: length mismatch");
  double mass = 0.0, b_mass = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] > 0.0)) throw std::invalid_argument("sigma_threshold: non-positive weight");
    if (lambdas[j] < 0.0 || lambdas[j] > 1.0) throw std::invalid_argument("sigma_threshold: lambda outside [0,1]");
    mass += weights[j];
    b_mass += weights[j] * (1.0 - lambdas[j]);
  }
  Threshold t;
  t.sigma = b_mass / mass;
  t.b_share.assign(weights.size(), 0.0);
  t.boundary = weights.size() - 1;
  t.b_fraction = 1.0;
  double cum = 0.0;
  bool placed = false;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double end = cum + weights[j];
    if (end <= b_mass) {
      t.b_share[j] = 1.0;
    } else if (cum < b_mass) {
      t.b_share[j] = (b_mass - cum) / weights[j];
    }
    if (!placed && end >= b_mass) {
      placed = true;
      t.boundary = j;
      t.b_fraction = t.b_share[j];
    }
    cum = end;
  }
  return t;
}

struct GapSlot {
  std::size_t state = 0;
  std::size_t atom = 0;
  double value = 0.0;
  double a = 0.0;
  double b = 0.0;
  double lambda = 1.0;
  std::size_t cls = 0;
  double mass = 0.0;       // conditional Q-mass of the slot within its group
  double b_share = 0.0;    // share of the slot moved to b
};

struct GapClass {
  std::size_t group = 0;
  double v = 0.0;
  double a = 0.0;
  double b = 0.0;
  double mass = 0.0;
  double a_mass_target = 0.0;    // conditional Q-expectation of lambda over the class
  double a_mass_assigned = 0.0;
  double sigma = 0.0;            // fraction of class mass taking b
  double sigma_zeta = 0.0;       // threshold position on the group's coupled scale
  std::vector<std::pair<double, double>> balance_samples;  // (class mass fraction, f)

  double residual() const { return a_mass_assigned - a_mass_target; }
};

struct ImprovementPlan {
  bool conditional = false;
  std::vector<double> phi;
  std::vector<GapSlot> gap_slots;
  std::vector<GapClass> classes;
  double cost_before = 0.0;
  double cost_after = 0.0;
  double cost_reversed = 0.0;  // cost with the opposite orientation
  double utility_before = 0.0;            // E_Q[U^v(X)]
  double envelope_before = 0.0;           // E_Q[U^v_c(X)]
  double utility_after = 0.0;             // E_Q[U^v(X*)]
  double envelope_after = 0.0;            // E_Q[U^v_c(X*)]

  double max_balance_residual() const {
    double r = 0.0;
    for (const auto& c : classes) r = std::max(r, std::abs(c.residual()));
    return r;
  }
};

struct Improvement {
  RandomizedPayoff payoff;
  ImprovementPlan plan;
};

namespace detail {

inline void push_atom(std::vector<Atom>& out, double value, double weight) {
  if (!(weight > 1e-15)) return;
  for (Atom& a : out) {
    if (a.value == value) {
      a.weight += weight;
      return;
    }
  }
  out.push_back({value, weight});
}

/// Improvement restricted to states with z > 0; states with z = 0 are left as they are.
inline Improvement improve_on_support(const RandomizedPayoff& payoff, const ScenarioSpace& space,
                                      const Density& density, const PricingMeasure& pricing,
                                      const UtilityCurve& curve, bool conditional) {
  if (payoff.size() != space.size()) throw std::invalid_argument("improve: payoff has wrong number of states");
  ConditionalLaw law = conditional ? group_by_w(space) : single_group(space, curve.x_max());
  // Q-conditional weights, dropping states outside the support.
  for (auto& g : law.groups) {
    ConditionalLaw::Group kept;
    kept.v = g.v;
    double mass = 0.0;
    for (std::size_t j = 0; j < g.states.size(); ++j) {
      const double w = g.weights[j] * density[g.states[j]];
      if (w > 0.0) {
        kept.states.push_back(g.states[j]);
        kept.weights.push_back(w);
        mass += w;
      }
    }
    for (double& w : kept.weights) w /= mass;
    g = std::move(kept);
  }

  Improvement out;
  auto& plan = out.plan;
  plan.conditional = conditional;
  plan.phi = pricing.phi(density);

  std::vector<std::vector<Atom>> result(space.size());
  std::vector<std::vector<double>> b_share(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) b_share[i].assign(payoff[i].size(), -1.0);

  std::vector<UtilityCurve> state_utility(space.size(), curve);
  std::vector<ConcaveCurve> state_envelope(space.size(), concavify(curve));

  for (std::size_t gi = 0; gi < law.groups.size(); ++gi) {
    const auto& g = law.groups[gi];
    if (g.states.empty()) continue;
    const EnvelopePair env(cap(curve, g.v));
    for (std::size_t s : g.states) {
      state_utility[s] = env.curve();
      state_envelope[s] = env.hull();
    }
    std::vector<double> phis;
    for (std::size_t s : g.states) phis.push_back(plan.phi[s]);
    const auto coupling = quantile_coupling<double>(g.weights, phis);

    // Slots in coupled-scale order, grouped into (a, b) classes.
    std::map<std::pair<double, double>, std::vector<std::size_t>> by_gap;
    for (std::size_t pos : coupling.order) {
      const std::size_t s = g.states[pos];
      for (std::size_t j = 0; j < payoff[s].size(); ++j) {
        const Atom& atom = payoff[s][j];
        if (atom.value < 0.0 || atom.value > g.v)
          throw std::domain_error("improve: payoff value outside [0, v] in state " + std::to_string(s));
        const GapInterval gap = env.gap(g.v, atom.value);
        if (gap.degenerate()) continue;
        GapSlot slot;
        slot.state = s;
        slot.atom = j;
        slot.value = atom.value;
        slot.a = gap.a;
        slot.b = gap.b;
        slot.lambda = gap.lambda;
        slot.mass = g.weights[pos] * atom.weight;
        by_gap[{gap.a, gap.b}].push_back(plan.gap_slots.size());
        plan.gap_slots.push_back(slot);
      }
    }
    for (const auto& [ab, members] : by_gap) {
      GapClass cls;
      cls.group = gi;
      cls.v = g.v;
      cls.a = ab.first;
      cls.b = ab.second;
      std::vector<double> w, lam;
      for (std::size_t idx : members) {
        const auto& sl = plan.gap_slots[idx];
        w.push_back(sl.mass);
        lam.push_back(sl.lambda);
        cls.mass += sl.mass;
        cls.a_mass_target += sl.mass * sl.lambda;
      }
      const Threshold th = sigma_threshold(w, lam);
      cls.sigma = th.sigma;
      const std::size_t cls_index = plan.classes.size();
      double cum = 0.0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        auto& sl = plan.gap_slots[members[k]];
        sl.cls = cls_index;
        sl.b_share = th.b_share[k];
        b_share[sl.state][sl.atom] = th.b_share[k];
        cls.a_mass_assigned += sl.mass * (1.0 - th.b_share[k]);
        // Balance function f(s): class mass below s taking b minus target b mass,
        // sampled at the class slot boundaries.
        cum += sl.mass;
        cls.balance_samples.emplace_back(cum / cls.mass, cum - (cls.mass - cls.a_mass_target));
      }
      // Threshold on the group's coupled scale.
      {
        const auto& sl = plan.gap_slots[members[th.boundary]];
        const std::size_t pos = static_cast<std::size_t>(
            std::find(g.states.begin(), g.states.end(), sl.state) - g.states.begin());
        const double l = coupling.left[pos], r = coupling.right[pos];
        double before = 0.0;
        for (std::size_t j = 0; j < sl.atom; ++j) before += payoff[sl.state][j].weight;
        const double aw = payoff[sl.state][sl.atom].weight;
        cls.sigma_zeta = l + (r - l) * (before + aw * th.b_fraction);
      }
      plan.classes.push_back(std::move(cls));
    }
  }

  // Assemble X*, and the opposite orientation for the audit.
  std::vector<std::vector<Atom>> reversed(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = 0; j < payoff[i].size(); ++j) {
      const Atom& atom = payoff[i][j];
      if (b_share[i][j] < 0.0) {
        detail::push_atom(result[i], atom.value, atom.weight);
        detail::push_atom(reversed[i], atom.value, atom.weight);
      }
    }
  }
  for (const auto& sl : plan.gap_slots) {
    const double wgt = payoff[sl.state][sl.atom].weight;
    detail::push_atom(result[sl.state], sl.b, wgt * sl.b_share);
    detail::push_atom(result[sl.state], sl.a, wgt * (1.0 - sl.b_share));
  }
  // Reversed: within each class, a on the low-phi end, b on the high end.
  {
    std::vector<std::vector<std::size_t>> members(plan.classes.size());
    for (std::size_t idx = 0; idx < plan.gap_slots.size(); ++idx) members[plan.gap_slots[idx].cls].push_back(idx);
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
      std::vector<double> w, lam;
      for (std::size_t idx : members[c]) {
        w.push_back(plan.gap_slots[idx].mass);
        lam.push_back(1.0 - plan.gap_slots[idx].lambda);  // swap roles of a and b
      }
      const Threshold th = sigma_threshold(w, lam);
      for (std::size_t k = 0; k < members[c].size(); ++k) {
        const auto& sl = plan.gap_slots[members[c][k]];
        const double wgt = payoff[sl.state][sl.atom].weight;
        detail::push_atom(reversed[sl.state], sl.a, wgt * th.b_share[k]);
        detail::push_atom(reversed[sl.state], sl.b, wgt * (1.0 - th.b_share[k]));
      }
    }
  }

  out.payoff = plan.gap_slots.empty() ? payoff : RandomizedPayoff(std::move(result));
  const RandomizedPayoff reversed_payoff = plan.gap_slots.empty() ? payoff : RandomizedPayoff(std::move(reversed));

  const PerState<UtilityCurve> u{state_utility};
  const PerState<ConcaveCurve> uc{state_envelope};
  plan.cost_before = cost(payoff, space, pricing);
  plan.cost_after = cost(out.payoff, space, pricing);
  plan.cost_reversed = cost(reversed_payoff, space, pricing);
  plan.utility_before = expected_utility(payoff, space, density, u);
  plan.envelope_before = expected_utility(payoff, space, density, uc);
  plan.utility_after = expected_utility(out.payoff, space, density, u);
  plan.envelope_after = expected_utility(out.payoff, space, density, uc);
  return out;
}

}  // namespace detail

/// X -> X* for an equivalent density. With `conditional`, classes are formed
/// within groups of equal W and capped at W; otherwise a single group capped at
/// the curve's last knot.
inline Improvement improve(const RandomizedPayoff& payoff, const ScenarioSpace& space, const Density& density,
                           const PricingMeasure& pricing, const UtilityCurve& curve, bool conditional) {
  if (!density.equivalent()) throw std::invalid_argument("improve: density is not equivalent to P");
  if (conditional && !space.has_bound()) throw std::invalid_argument("improve: conditional mode needs W");
  return detail::improve_on_support(payoff, space, density, pricing, curve, conditional);
}

/// Per-state mean-preserving split of every gap atom into its endpoints. Leaves
/// each state's mean (hence the cost) unchanged and makes E_Q[U] = E_Q[U_c] for
/// every density at once.
inline RandomizedPayoff split_locally(const RandomizedPayoff& payoff, const ScenarioSpace& space,
                                      const UtilityCurve& curve, bool cap_by_w) {
  std::vector<std::vector<Atom>> atoms(payoff.size());
  for (std::size_t i = 0; i < payoff.size(); ++i) {
    const double v = cap_by_w ? space.w()[i] : curve.x_max();
    const EnvelopePair env(cap(curve, v));
    for (const Atom& a : payoff[i]) {
      const GapInterval g = env.gap(v, std::min(a.value, v));
      if (g.degenerate()) {
        detail::push_atom(atoms[i], a.value, a.weight);
      } else {
        detail::push_atom(atoms[i], g.a, a.weight * g.lambda);
        detail::push_atom(atoms[i], g.b, a.weight * (1.0 - g.lambda));
      }
    }
  }
  return RandomizedPayoff(std::move(atoms));
}

}  // namespace robustmax
