#pragma once

// A complete problem instance and the seeded random instance generator.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "robustmax/curve.hpp"
#include "robustmax/payoff.hpp"
#include "robustmax/space.hpp"

namespace robustmax {

struct Instance {
  UtilityCurve utility;
  ScenarioSpace space;
  PricingMeasure pricing;
  MeasureFamily family;
  double x = 1.0;
  std::optional<std::uint64_t> seed;

  BudgetSpec budget(bool constrained) const { return BudgetSpec{x, constrained}; }
};

struct GeneratorOptions {
  std::size_t states = 3;
  std::size_t extremes = 2;
  std::size_t kinks = 1;           // number of upward jumps; 0 gives a concave utility
  bool oracle_safe = false;        // keep within the brute-force oracle's limits
  double non_equivalent_rate = 0.2;  // chance that a non-anchor extreme gets a zero entry
  double trivial_rate = 0.0;       // chance that x >= E_{Q^e}[W]
};

namespace detail {

/// Small deterministic sampler on top of mt19937_64; avoids the
/// implementation-defined std distributions so files are reproducible.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

/// Random instance: utility on [0, 4] with quarter-step knots and `kinks`
/// upward jumps; integer-ratio probabilities, prices and densities; W drawn from
/// a few shared levels so W-groups hold several states.
inline Instance generate_instance(std::uint64_t seed, const GeneratorOptions& opt) {
  if (opt.states == 0 || opt.extremes == 0) throw std::invalid_argument("generator needs states and extremes");
  if (opt.oracle_safe && (opt.states > 6 || opt.kinks > 4))
    throw std::invalid_argument("oracle-safe generation allows at most 6 states and 4 kinks");
  detail::Sampler rs(seed);
  const std::size_t n = opt.states;

  // Utility: knots 0 = t_0 < ... < t_K = 4, K = kinks + 2 pieces.
  const std::size_t pieces = opt.kinks + 2;
  std::vector<int> grid;
  for (int q = 1; q < 16; ++q) grid.push_back(q);
  std::vector<int> interior;
  for (std::size_t k = 0; k + 1 < pieces; ++k) {
    const std::size_t j = rs.index(grid.size());
    interior.push_back(grid[j]);
    grid.erase(grid.begin() + static_cast<std::ptrdiff_t>(j));
  }
  std::sort(interior.begin(), interior.end());
  std::vector<double> knots{0.0};
  for (int q : interior) knots.push_back(q / 4.0);
  knots.push_back(4.0);

  std::vector<double> slopes;
  for (std::size_t k = 0; k < pieces; ++k) slopes.push_back(rs.integer(0, 4) / 4.0);
  std::vector<double> jumps(knots.size(), 0.0);
  if (opt.kinks == 0) {
    std::sort(slopes.rbegin(), slopes.rend());
  } else {
    std::vector<std::size_t> candidates;
    for (std::size_t k = 1; k + 1 < knots.size(); ++k) candidates.push_back(k);
    for (std::size_t j = 0; j < opt.kinks && !candidates.empty(); ++j) {
      const std::size_t c = rs.index(candidates.size());
      jumps[candidates[c]] = rs.integer(1, 4) / 4.0;
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(c));
    }
  }
  std::vector<double> values{rs.integer(0, 2) / 4.0};
  for (std::size_t k = 1; k < knots.size(); ++k)
    values.push_back(values.back() + slopes[k - 1] * (knots[k] - knots[k - 1]) + jumps[k]);
  UtilityCurve utility(knots, values, slopes, 0.0);

  // Space.
  std::vector<double> praw(n);
  double ptot = 0.0;
  for (auto& v : praw) ptot += (v = rs.integer(1, 4));
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = praw[i] / ptot;
  static constexpr double levels[] = {0.75, 1.5, 2.25, 3.0, 3.75};
  std::vector<double> w(n);
  for (auto& v : w) v = levels[rs.index(std::size(levels))];
  ScenarioSpace space(p, w);

  auto normalized = [&](const std::vector<double>& raw) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += p[i] * raw[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = raw[i] / mass;
    return out;
  };
  std::vector<double> psi_raw(n);
  for (auto& v : psi_raw) v = rs.integer(1, 4);
  PricingMeasure pricing(space, normalized(psi_raw));

  std::vector<Density> extremes;
  for (std::size_t k = 0; k < opt.extremes; ++k) {
    std::vector<double> raw(n);
    for (auto& v : raw) v = rs.integer(1, 4);
    if (k > 0 && n > 1 && rs.chance(opt.non_equivalent_rate)) raw[rs.index(n)] = 0.0;
    extremes.emplace_back(space, normalized(raw));
  }
  MeasureFamily family(std::move(extremes));

  double ew = 0.0;
  for (std::size_t i = 0; i < n; ++i) ew += p[i] * pricing[i] * w[i];
  const double scale = std::min(ew, 0.5 * utility.x_max());
  double x = scale * rs.integer(1, 7) / 8.0;
  if (opt.trivial_rate > 0.0 && rs.chance(opt.trivial_rate)) x = ew * 1.25;
  return Instance{std::move(utility), std::move(space), std::move(pricing), std::move(family), x, seed};
}

}  // namespace robustmax
