#pragma once

// Quantile coupling of a finite weighted law with a uniform variable.
//
// Given state weights and values phi, states are laid out on [0,1) in order of
// increasing phi (ties by index). A state's auxiliary uniform u maps to
// zeta = l + u (r - l) inside its interval, so zeta is exactly uniform and the
// step function q satisfies q(zeta) = phi on every state.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace robustmax {

template <class T>
struct QuantileCoupling {
  std::vector<std::size_t> order;  // states by increasing phi
  std::vector<T> left;             // per state (input indexing)
  std::vector<T> right;
  std::vector<T> phi;              // per state

  /// Position of state i's auxiliary uniform u on the coupled scale.
  T zeta(std::size_t state, const T& u) const { return left[state] + u * (right[state] - left[state]); }

  /// Non-decreasing step function: phi of the state whose interval holds t.
  /// t = 1 maps to the last interval.
  const T& q(const T& t) const {
    for (std::size_t s : order)
      if (t < right[s]) return phi[s];
    return phi[order.back()];
  }

  /// Pushforward CDF of zeta at t: mass of states whose interval lies left of t,
  /// plus the uniform share of the interval containing t.
  T cdf(const T& t) const {
    T mass = T(0);
    for (std::size_t s : order) {
      if (right[s] <= t) {
        mass += right[s] - left[s];
      } else if (left[s] < t) {
        mass += t - left[s];
      }
    }
    return mass;
  }

  /// Interval endpoints in increasing order, starting at 0.
  std::vector<T> breakpoints() const {
    std::vector<T> out{T(0)};
    for (std::size_t s : order) out.push_back(right[s]);
    return out;
  }
};

template <class T>
QuantileCoupling<T> quantile_coupling(std::span<const T> weights, std::span<const T> phi) {
  if (weights.size() != phi.size()) throw std::invalid_argument("quantile_coupling: length mismatch");
  if (weights.empty()) throw std::invalid_argument("quantile_coupling: no states");
  for (const T& w : weights)
    if (!(w > T(0))) throw std::invalid_argument("quantile_coupling: non-positive weight");
  QuantileCoupling<T> c;
  c.order.resize(weights.size());
  std::iota(c.order.begin(), c.order.end(), std::size_t{0});
  std::stable_sort(c.order.begin(), c.order.end(),
                   [&](std::size_t a, std::size_t b) { return phi[a] < phi[b]; });
  c.left.resize(weights.size());
  c.right.resize(weights.size());
  c.phi.assign(phi.begin(), phi.end());
  T acc = T(0);
  for (std::size_t s : c.order) {
    c.left[s] = acc;
    acc += weights[s];
    c.right[s] = acc;
  }
  // Pin the last endpoint so the intervals cover [0,1) despite rounding.
  c.right[c.order.back()] = T(1);
  return c;
}

template <class T>
QuantileCoupling<T> quantile_coupling(const std::vector<T>& weights, const std::vector<T>& phi) {
  return quantile_coupling<T>(std::span<const T>(weights), std::span<const T>(phi));
}

}  // namespace robustmax
