#pragma once

// Finite scenario spaces, densities of the measure family, the pricing
// measure and conditioning on the bound W.
//
// Every state carries an implicit independent uniform coordinate on (0,1),
// which makes all conditional laws atomless without enlarging the state set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustmax {

inline constexpr double kMassTol = 1e-12;

class ScenarioSpace {
 public:
  explicit ScenarioSpace(std::vector<double> p, std::optional<std::vector<double>> w = std::nullopt,
                         std::vector<std::string> labels = {})
      : p_(std::move(p)), w_(std::move(w)), labels_(std::move(labels)) {
    if (p_.empty()) throw std::invalid_argument("scenario space needs at least one state");
    double total = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!(p_[i] > 0.0))
        throw std::invalid_argument("state " + std::to_string(i) + " has non-positive probability");
      total += p_[i];
    }
    if (std::abs(total - 1.0) > kMassTol)
      throw std::invalid_argument("state probabilities do not sum to 1");
    if (w_) {
      if (w_->size() != p_.size()) throw std::invalid_argument("bound W has wrong length");
      for (std::size_t i = 0; i < w_->size(); ++i)
        if (!((*w_)[i] > 0.0))
          throw std::invalid_argument("bound W must be positive (state " + std::to_string(i) + ")");
    }
    if (!labels_.empty() && labels_.size() != p_.size())
      throw std::invalid_argument("labels have wrong length");
  }

  std::size_t size() const noexcept { return p_.size(); }
  const std::vector<double>& p() const noexcept { return p_; }
  double p(std::size_t i) const { return p_[i]; }
  bool has_bound() const noexcept { return w_.has_value(); }
  const std::vector<double>& w() const {
    if (!w_) throw std::logic_error("scenario space has no bound W");
    return *w_;
  }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  ScenarioSpace with_bound(std::vector<double> w) const { return ScenarioSpace(p_, std::move(w), labels_); }
  ScenarioSpace without_bound() const { return ScenarioSpace(p_, std::nullopt, labels_); }

 private:
  std::vector<double> p_;
  std::optional<std::vector<double>> w_;
  std::vector<std::string> labels_;
};

/// Radon-Nikodym derivative dQ/dP on a finite space.
class Density {
 public:
  Density(const ScenarioSpace& space, std::vector<double> z) : z_(std::move(z)) {
    if (z_.size() != space.size()) throw std::invalid_argument("density has wrong length");
    double mass = 0.0;
    equivalent_ = true;
    for (std::size_t i = 0; i < z_.size(); ++i) {
      if (!(z_[i] >= 0.0)) throw std::invalid_argument("density must be non-negative");
      equivalent_ = equivalent_ && z_[i] > 0.0;
      mass += space.p(i) * z_[i];
    }
    if (std::abs(mass - 1.0) > kMassTol) throw std::invalid_argument("density does not integrate to 1");
  }

  static Density uniform(const ScenarioSpace& space) {
    return Density(space, std::vector<double>(space.size(), 1.0));
  }

  const std::vector<double>& z() const noexcept { return z_; }
  double operator[](std::size_t i) const { return z_[i]; }
  std::size_t size() const noexcept { return z_.size(); }
  bool equivalent() const noexcept { return equivalent_; }

 private:
  std::vector<double> z_;
  bool equivalent_ = true;
};

/// Density of sum_k weights[k] * extremes[k]. Weights must be a probability vector.
inline Density mix(const ScenarioSpace& space, std::span<const Density> extremes,
                   std::span<const double> weights) {
  if (extremes.size() != weights.size()) throw std::invalid_argument("mixture weights have wrong length");
  std::vector<double> z(space.size(), 0.0);
  double wsum = 0.0;
  for (std::size_t k = 0; k < extremes.size(); ++k) {
    wsum += weights[k];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += weights[k] * extremes[k][i];
  }
  // Renormalize away rounding from the weights.
  for (double& zi : z) zi /= wsum;
  double mass = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) mass += space.p(i) * z[i];
  for (double& zi : z) zi /= mass;
  return Density(space, std::move(z));
}

/// (1 - eps) * from + eps * toward.
inline Density eps_mix(const ScenarioSpace& space, const Density& from, const Density& toward, double eps) {
  const Density pair[] = {from, toward};
  const double w[] = {1.0 - eps, eps};
  return mix(space, pair, w);
}

/// The family Q as the convex hull of finitely many extreme densities.
class MeasureFamily {
 public:
  MeasureFamily(std::vector<Density> extremes) : extremes_(std::move(extremes)) {
    if (extremes_.empty()) throw std::invalid_argument("measure family is empty");
    for (std::size_t k = 0; k < extremes_.size(); ++k) {
      if (extremes_[k].equivalent()) {
        anchor_ = k;
        return;
      }
    }
    throw std::invalid_argument("measure family has no equivalent extreme");
  }

  std::size_t size() const noexcept { return extremes_.size(); }
  const Density& operator[](std::size_t k) const { return extremes_[k]; }
  const std::vector<Density>& extremes() const noexcept { return extremes_; }

  /// First equivalent extreme; used to push boundary points into Q_e.
  std::size_t anchor() const noexcept { return anchor_; }

  bool all_equivalent() const {
    return std::all_of(extremes_.begin(), extremes_.end(), [](const Density& d) { return d.equivalent(); });
  }

  /// Each non-equivalent extreme replaced by its eps-mix with the anchor.
  MeasureFamily equivalent_part(const ScenarioSpace& space, double eps) const {
    std::vector<Density> out;
    for (const auto& d : extremes_)
      out.push_back(d.equivalent() ? d : eps_mix(space, d, extremes_[anchor_], eps));
    return MeasureFamily(std::move(out));
  }

 private:
  std::vector<Density> extremes_;
  std::size_t anchor_ = 0;
};

/// Q^e through psi = dQ^e/dP.
class PricingMeasure {
 public:
  PricingMeasure(const ScenarioSpace& space, std::vector<double> psi) : psi_(std::move(psi)) {
    if (psi_.size() != space.size()) throw std::invalid_argument("pricing density has wrong length");
    double mass = 0.0;
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      if (!(psi_[i] > 0.0)) throw std::invalid_argument("pricing density must be positive");
      mass += space.p(i) * psi_[i];
    }
    if (std::abs(mass - 1.0) > kMassTol) throw std::invalid_argument("pricing density does not integrate to 1");
  }

  const std::vector<double>& psi() const noexcept { return psi_; }
  double operator[](std::size_t i) const { return psi_[i]; }

  /// phi = dQ^e/dQ in each state where z > 0 (infinity where z = 0).
  std::vector<double> phi(const Density& z) const {
    std::vector<double> out(psi_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = z[i] > 0.0 ? psi_[i] / z[i] : std::numeric_limits<double>::infinity();
    return out;
  }

 private:
  std::vector<double> psi_;
};

/// sum_i p_i z_i values_i
inline double expectation(const ScenarioSpace& space, const Density& density, std::span<const double> values) {
  if (values.size() != space.size()) throw std::invalid_argument("expectation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += space.p(i) * density[i] * values[i];
  return s;
}

struct FamilyReport {
  bool valid = true;
  std::vector<bool> equivalent;  // per extreme
  bool convex = true;            // convex hull by construction
  bool closed = true;            // finitely generated, hence closed
  std::string message;
};

/// Re-checks every extreme against `space` and reports equivalence.
inline FamilyReport validate_family(const ScenarioSpace& space, const MeasureFamily& family) {
  FamilyReport r;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto& z = family[k].z();
    if (z.size() != space.size()) throw std::invalid_argument("extreme " + std::to_string(k) + " has wrong length");
    double mass = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) mass += space.p(i) * z[i];
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("extreme " + std::to_string(k) + " does not integrate to 1");
    r.equivalent.push_back(family[k].equivalent());
  }
  const auto n_eq = std::count(r.equivalent.begin(), r.equivalent.end(), true);
  r.message = std::to_string(family.size()) + " extremes, " + std::to_string(n_eq) + " equivalent";
  return r;
}

/// Regular conditional law given W: states grouped by exact W value.
struct ConditionalLaw {
  struct Group {
    double v = 0.0;                    // shared W value (inf when unconditioned)
    std::vector<std::size_t> states;   // in increasing index order
    std::vector<double> weights;       // conditional weights, sum to 1
  };
  std::vector<Group> groups;  // ordered by v

  std::size_t group_of(std::size_t state) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t s : groups[g].states)
        if (s == state) return g;
    throw std::out_of_range("state not in any group");
  }
};

inline ConditionalLaw group_by_w(const ScenarioSpace& space) {
  if (!space.has_bound()) throw std::invalid_argument("group_by_w: space has no bound W");
  std::map<double, std::vector<std::size_t>> by_v;
  for (std::size_t i = 0; i < space.size(); ++i) by_v[space.w()[i]].push_back(i);
  ConditionalLaw law;
  for (auto& [v, states] : by_v) {
    ConditionalLaw::Group g;
    g.v = v;
    double mass = 0.0;
    for (std::size_t s : states) mass += space.p(s);
    for (std::size_t s : states) g.weights.push_back(space.p(s) / mass);
    g.states = std::move(states);
    law.groups.push_back(std::move(g));
  }
  return law;
}

/// Single group holding the whole space at cap level v.
inline ConditionalLaw single_group(const ScenarioSpace& space, double v) {
  ConditionalLaw law;
  ConditionalLaw::Group g;
  g.v = v;
  for (std::size_t i = 0; i < space.size(); ++i) {
    g.states.push_back(i);
    g.weights.push_back(space.p(i));
  }
  law.groups.push_back(std::move(g));
  return law;
}

/// Conditional law of Q given W: within each group, weights proportional to the
/// base weights times z. `pricing` is accepted for symmetry with the cost side
/// but does not enter the reweighting.
inline ConditionalLaw conditional_under(const ConditionalLaw& law, const Density& density,
                                        const PricingMeasure& /*pricing*/) {
  ConditionalLaw out = law;
  for (std::size_t gi = 0; gi < out.groups.size(); ++gi) {
    auto& g = out.groups[gi];
    double mass = 0.0;
    for (std::size_t j = 0; j < g.states.size(); ++j) {
      g.weights[j] *= density[g.states[j]];
      mass += g.weights[j];
    }
    if (!(mass > 0.0))
      throw std::invalid_argument("conditional_under: density vanishes on group " + std::to_string(gi));
    for (double& w : g.weights) w /= mass;
  }
  return out;
}

}  // namespace robustmax
