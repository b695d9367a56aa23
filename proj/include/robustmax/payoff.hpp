#pragma once

// Randomized final endowments, their costs under the pricing measure and their
// expected utilities under members of the measure family.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustmax/curve.hpp"
#include "robustmax/space.hpp"

namespace robustmax {

inline constexpr double kFeasibilityTol = 1e-9;

/// One mixture component of a state's payoff.
struct Atom {
  double value = 0.0;
  double weight = 1.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Per-state finite mixture over payoff values. The mixture is realized by the
/// state's auxiliary uniform coordinate: atom j occupies the j-th consecutive
/// stretch of (0,1) of length weight.
class RandomizedPayoff {
 public:
  RandomizedPayoff() = default;

  explicit RandomizedPayoff(std::vector<std::vector<Atom>> atoms) : atoms_(std::move(atoms)) {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].empty()) throw std::invalid_argument("state " + std::to_string(i) + " has no atoms");
      double total = 0.0;
      for (const Atom& a : atoms_[i]) {
        if (!(a.value >= 0.0) || !std::isfinite(a.value))
          throw std::invalid_argument("negative payoff value in state " + std::to_string(i));
        if (!(a.weight > 0.0)) throw std::invalid_argument("non-positive atom weight in state " + std::to_string(i));
        total += a.weight;
      }
      if (std::abs(total - 1.0) > kMassTol)
        throw std::invalid_argument("atom weights in state " + std::to_string(i) + " do not sum to 1");
    }
  }

  static RandomizedPayoff deterministic(const std::vector<double>& values) {
    std::vector<std::vector<Atom>> atoms;
    for (double v : values) atoms.push_back({Atom{v, 1.0}});
    return RandomizedPayoff(std::move(atoms));
  }

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<Atom>& operator[](std::size_t i) const { return atoms_[i]; }
  const std::vector<std::vector<Atom>>& atoms() const noexcept { return atoms_; }

  bool is_deterministic() const {
    for (const auto& s : atoms_)
      if (s.size() != 1) return false;
    return true;
  }

  double mean(std::size_t i) const {
    double m = 0.0;
    for (const Atom& a : atoms_[i]) m += a.weight * a.value;
    return m;
  }

  double max_value(std::size_t i) const {
    double m = 0.0;
    for (const Atom& a : atoms_[i]) m = std::max(m, a.value);
    return m;
  }

  friend bool operator==(const RandomizedPayoff&, const RandomizedPayoff&) = default;

 private:
  std::vector<std::vector<Atom>> atoms_;
};

struct BudgetSpec {
  double x = 1.0;
  bool constrained = false;

  void validate() const {
    if (!(x > 0.0)) throw std::invalid_argument("initial wealth must be positive");
  }
};

/// E_{Q^e}[W] > x; otherwise X = W is optimal and the constrained problem is trivial.
inline bool nontrivial_bound(const ScenarioSpace& space, const PricingMeasure& pricing, double x) {
  double ew = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) ew += space.p(i) * pricing[i] * space.w()[i];
  return ew > x;
}

/// One curve per state; used for W-capped utilities U^{W(omega)}.
template <class Curve>
struct PerState {
  std::vector<Curve> curves;

  double operator()(std::size_t state, double x) const { return curves[state](x); }
  std::size_t size() const noexcept { return curves.size(); }
  const Curve& operator[](std::size_t state) const { return curves[state]; }
};

/// U (or U^{W_i} in each state when cap_by_w).
inline PerState<UtilityCurve> per_state_utility(const UtilityCurve& curve, const ScenarioSpace& space,
                                                bool cap_by_w) {
  PerState<UtilityCurve> out;
  for (std::size_t i = 0; i < space.size(); ++i)
    out.curves.push_back(cap_by_w ? cap(curve, space.w()[i]) : curve);
  return out;
}

/// U_c (or U^{W_i}_c in each state when cap_by_w).
inline PerState<ConcaveCurve> per_state_envelope(const UtilityCurve& curve, const ScenarioSpace& space,
                                                 bool cap_by_w) {
  PerState<ConcaveCurve> out;
  if (!cap_by_w) {
    const ConcaveCurve hull = concavify(curve);
    out.curves.assign(space.size(), hull);
    return out;
  }
  for (std::size_t i = 0; i < space.size(); ++i) out.curves.push_back(concavify(cap(curve, space.w()[i])));
  return out;
}

/// E_{Q^e}[X]
inline double cost(const RandomizedPayoff& payoff, const ScenarioSpace& space, const PricingMeasure& pricing) {
  if (payoff.size() != space.size()) throw std::invalid_argument("payoff has wrong number of states");
  double c = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) c += space.p(i) * pricing[i] * payoff.mean(i);
  return c;
}

template <class Curve>
double expected_utility(const RandomizedPayoff& payoff, const ScenarioSpace& space, const Density& density,
                        const PerState<Curve>& curves) {
  if (payoff.size() != space.size()) throw std::invalid_argument("payoff has wrong number of states");
  double s = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (density[i] == 0.0) continue;
    double u = 0.0;
    for (const Atom& a : payoff[i]) u += a.weight * curves(i, a.value);
    s += space.p(i) * density[i] * u;
  }
  return s;
}

inline double expected_utility(const RandomizedPayoff& payoff, const ScenarioSpace& space, const Density& density,
                               const UtilityCurve& curve, bool cap_by_w) {
  return expected_utility(payoff, space, density, per_state_utility(curve, space, cap_by_w));
}

inline double expected_utility(const RandomizedPayoff& payoff, const ScenarioSpace& space, const Density& density,
                               const ConcaveCurve& curve, bool cap_by_w) {
  if (!cap_by_w) {
    PerState<ConcaveCurve> same{std::vector<ConcaveCurve>(space.size(), curve)};
    return expected_utility(payoff, space, density, same);
  }
  return expected_utility(payoff, space, density, per_state_envelope(curve.as_utility(), space, true));
}

struct FeasibilityVerdict {
  bool feasible = true;
  double cost = 0.0;
  std::vector<std::string> violations;

  explicit operator bool() const noexcept { return feasible; }
};

inline FeasibilityVerdict is_feasible(const RandomizedPayoff& payoff, const ScenarioSpace& space,
                                      const PricingMeasure& pricing, const BudgetSpec& budget) {
  FeasibilityVerdict v;
  v.cost = cost(payoff, space, pricing);
  for (std::size_t i = 0; i < payoff.size(); ++i) {
    for (const Atom& a : payoff[i]) {
      if (a.value < 0.0) v.violations.push_back("negative value in state " + std::to_string(i));
      if (budget.constrained && a.value > space.w()[i] + kFeasibilityTol)
        v.violations.push_back("value above W in state " + std::to_string(i));
    }
  }
  if (v.cost > budget.x + kFeasibilityTol)
    v.violations.push_back("cost " + std::to_string(v.cost) + " exceeds budget " + std::to_string(budget.x));
  v.feasible = v.violations.empty();
  return v;
}

struct WorstCase {
  double value = 0.0;
  std::size_t extreme = 0;
};

/// Infimum over the convex hull, attained at an extreme by linearity in the density.
template <class Curve>
WorstCase worst_case_utility(const RandomizedPayoff& payoff, const ScenarioSpace& space,
                             const MeasureFamily& family, const PerState<Curve>& curves) {
  WorstCase wc{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < family.size(); ++k) {
    const double e = expected_utility(payoff, space, family[k], curves);
    if (e < wc.value) wc = {e, k};
  }
  return wc;
}

inline WorstCase worst_case_utility(const RandomizedPayoff& payoff, const ScenarioSpace& space,
                                    const MeasureFamily& family, const UtilityCurve& curve, bool cap_by_w) {
  return worst_case_utility(payoff, space, family, per_state_utility(curve, space, cap_by_w));
}

}  // namespace robustmax
