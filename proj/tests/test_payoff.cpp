#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "robustmax/instance.hpp"
#include "robustmax/payoff.hpp"

using namespace robustmax;

namespace {

ScenarioSpace half_half() { return ScenarioSpace({0.5, 0.5}, std::vector<double>{2.0, 2.0}); }

RandomizedPayoff coin_in_first() { return RandomizedPayoff({{Atom{1.0, 0.5}, Atom{0.0, 0.5}}, {Atom{0.0, 1.0}}}); }

}  // namespace

TEST(RandomizedPayoffInvariants, RejectsBadAtoms) {
  EXPECT_THROW(RandomizedPayoff({{Atom{-1.0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(RandomizedPayoff({{Atom{1.0, 0.4}, Atom{0.0, 0.4}}}), std::invalid_argument);
  EXPECT_THROW(RandomizedPayoff({{Atom{1.0, 0.0}, Atom{0.0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(RandomizedPayoff(std::vector<std::vector<Atom>>(1)), std::invalid_argument);
}

TEST(Cost, Examples) {
  const auto sp = half_half();
  const PricingMeasure flat(sp, {1.0, 1.0}), tilted(sp, {0.4, 1.6});
  EXPECT_DOUBLE_EQ(cost(RandomizedPayoff::deterministic({0.7, 0.7}), sp, tilted), 0.7);
  EXPECT_DOUBLE_EQ(cost(coin_in_first(), sp, flat), 0.25);
  EXPECT_EQ(cost(RandomizedPayoff::deterministic({0.0, 0.0}), sp, tilted), 0.0);
}

TEST(ExpectedUtility, Examples) {
  const ScenarioSpace one({1.0}, std::vector<double>{2.0});
  const auto step = UtilityCurve::step(1.0);
  const RandomizedPayoff coin({{Atom{1.0, 0.5}, Atom{0.0, 0.5}}});
  EXPECT_DOUBLE_EQ(expected_utility(coin, one, Density::uniform(one), step, false), 0.5);

  const auto sp = half_half();
  const UtilityCurve concave({0.0, 1.0}, {0.0, 1.0}, {1.0}, 0.0);
  const Density z(sp, {1.2, 0.8});
  const auto X = RandomizedPayoff::deterministic({0.3, 0.9});
  EXPECT_NEAR(expected_utility(X, sp, z, concave, false), 0.5 * 1.2 * 0.3 + 0.5 * 0.8 * 0.9, 1e-15);

  // W below the jump: the capped curve is the flat zero plateau.
  const ScenarioSpace low({0.5, 0.5}, std::vector<double>{0.5, 0.75});
  const auto big = RandomizedPayoff::deterministic({0.5, 0.75});
  EXPECT_EQ(expected_utility(big, low, Density::uniform(low), step, true), 0.0);
  const UtilityCurve ramp({0.0, 1.0}, {0.0, 1.0}, {1.0}, 0.0);
  EXPECT_DOUBLE_EQ(expected_utility(big, low, Density::uniform(low), ramp, true),
                   0.5 * oracle::eval_capped(ramp.data(), 0.5, 0.5) + 0.5 * oracle::eval_capped(ramp.data(), 0.75, 0.75));
}

TEST(IsFeasible, Examples) {
  const auto sp = half_half();
  const PricingMeasure pr(sp, {1.0, 1.0});
  EXPECT_TRUE(is_feasible(RandomizedPayoff::deterministic({0.0, 0.0}), sp, pr, {0.1, true}).feasible);
  const auto W = RandomizedPayoff::deterministic(sp.w());
  EXPECT_TRUE(nontrivial_bound(sp, pr, 1.0));
  EXPECT_FALSE(is_feasible(W, sp, pr, {1.0, true}).feasible);
  EXPECT_TRUE(is_feasible(RandomizedPayoff::deterministic({1.0, 1.0}), sp, pr, {1.0, true}).feasible);
  EXPECT_FALSE(is_feasible(RandomizedPayoff::deterministic({2.5, 0.0}), sp, pr, {2.0, true}).feasible);
  EXPECT_TRUE(is_feasible(RandomizedPayoff::deterministic({2.5, 0.0}), sp, pr, {2.0, false}).feasible);
}

TEST(WorstCase, Examples) {
  const auto sp = half_half();
  const UtilityCurve id({0.0, 1.0}, {0.0, 1.0}, {1.0}, 0.0);
  const auto X = RandomizedPayoff::deterministic({1.0, 0.0});
  const MeasureFamily single({Density(sp, {1.2, 0.8})});
  EXPECT_NEAR(worst_case_utility(X, sp, single, id, false).value, 0.6, 1e-15);

  const MeasureFamily two({Density(sp, {1.2, 0.8}), Density(sp, {0.8, 1.2})});
  const auto wc = worst_case_utility(X, sp, two, id, false);
  EXPECT_NEAR(wc.value, 0.4, 1e-15);
  EXPECT_EQ(wc.extreme, 1u);

  const auto c = RandomizedPayoff::deterministic({0.5, 0.5});
  EXPECT_NEAR(worst_case_utility(c, sp, two, id, false).value, 0.5, 1e-15);
}

// Properties on generated instances.

class PayoffProperties : public ::testing::TestWithParam<int> {};

TEST_P(PayoffProperties, MixturesNeverBeatTheWorstExtreme) {
  GeneratorOptions g;
  g.states = 3;
  g.extremes = 3;
  g.kinks = 2;
  const auto inst = generate_instance(100 + GetParam(), g);
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> U(0.0, 4.0);
  const auto X = RandomizedPayoff::deterministic({U(rng), U(rng), U(rng)});
  const auto wc = worst_case_utility(X, inst.space, inst.family, inst.utility, false);
  double best = std::numeric_limits<double>::infinity();
  oracle::simplex_grid(3, 12, [&](const std::vector<double>& mu) {
    const Density z = mix(inst.space, inst.family.extremes(), mu);
    const double v = expected_utility(X, inst.space, z, inst.utility, false);
    EXPECT_GE(v, wc.value - 1e-12);
    best = std::min(best, v);
  });
  EXPECT_NEAR(best, wc.value, 1e-12);
}

TEST_P(PayoffProperties, EnvelopeDominatesAndJensen) {
  GeneratorOptions g;
  g.states = 4;
  g.kinks = 3;
  const auto inst = generate_instance(200 + GetParam(), g);
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> U(0.0, 4.0), W(0.1, 0.9);
  const ConcaveCurve hull = concavify(inst.utility);
  std::vector<std::vector<Atom>> atoms;
  std::vector<double> means;
  for (std::size_t i = 0; i < 4; ++i) {
    const double w = W(rng), a = U(rng), b = U(rng);
    atoms.push_back({Atom{a, w}, Atom{b, 1.0 - w}});
    means.push_back(w * a + (1.0 - w) * b);
  }
  const RandomizedPayoff X(atoms);
  const auto M = RandomizedPayoff::deterministic(means);
  for (std::size_t k = 0; k < inst.family.size(); ++k) {
    const auto& z = inst.family[k];
    EXPECT_GE(expected_utility(X, inst.space, z, hull, false), expected_utility(X, inst.space, z, inst.utility, false) - 1e-12);
    EXPECT_GE(expected_utility(M, inst.space, z, hull, false), expected_utility(X, inst.space, z, hull, false) - 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PayoffProperties, ::testing::Range(0, 25));

TEST(EpsilonShadow, ExpectationsConvergeMonotonically) {
  const ScenarioSpace sp({0.25, 0.25, 0.5});
  const Density z0(sp, {2.0, 2.0, 0.0}), zpos(sp, {1.0, 1.0, 1.0});
  const UtilityCurve u({0.0, 1.0, 2.0}, {0.0, 0.25, 1.0}, {0.25, 0.25}, 0.0);
  const auto X = RandomizedPayoff::deterministic({0.5, 1.5, 2.0});
  const double target = expected_utility(X, sp, z0, u, false);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double v = expected_utility(X, sp, eps_mix(sp, z0, zpos, eps), u, false);
    const double d = std::abs(v - target);
    EXPECT_LE(d, prev);
    EXPECT_LE(d, 10.0 * eps);
    prev = d;
  }
}
