#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "robustmax/diagram.hpp"

using namespace robustmax;

namespace {

enum { A, B, C, D, E, F, G, H };

Instance symmetric() {
  ScenarioSpace sp({0.5, 0.5}, std::vector<double>{2.0, 2.0});
  PricingMeasure pr(sp, {1.0, 1.0});
  MeasureFamily fam({Density(sp, {1.2, 0.8}), Density(sp, {0.8, 1.2})});
  return Instance{UtilityCurve::step(1.0), sp, pr, fam, 0.5, std::nullopt};
}

Instance with_non_equivalent() {
  ScenarioSpace sp({1.0 / 3, 1.0 / 3, 1.0 / 3}, std::vector<double>{1.5, 2.0, 2.0});
  PricingMeasure pr(sp, {1.0, 0.5, 1.5});
  MeasureFamily fam({Density(sp, {0.5, 2.0, 0.5}), Density(sp, {0.0, 1.5, 1.5})});
  UtilityCurve u({0.0, 1.0, 2.0}, {0.0, 0.25, 1.0}, {0.25, 0.25}, 0.0);
  return Instance{u, sp, pr, fam, 0.75, std::nullopt};
}

const Relation& relation(const DiagramReport& r, const std::string& name) {
  for (const auto& rel : r.relations)
    if (rel.name == name) return rel;
  throw std::out_of_range(name);
}

}  // namespace

TEST(Diagram, ConcaveCurveCollapses) {
  auto inst = symmetric();
  inst.utility = UtilityCurve({0.0, 1.0, 3.0}, {0.0, 1.0, 2.0}, {1.0, 0.5}, 0.0);
  for (bool c : {false, true}) {
    const auto rep = evaluate_diagram(inst, c);
    ASSERT_FALSE(rep.trivial);
    for (const auto& q : rep.quantities) EXPECT_NEAR(q.value, rep.quantities[A].value, 1e-7 + q.gap) << q.name;
    for (const auto& r : rep.relations) EXPECT_EQ(r.verdict, Verdict::holds) << r.name;
    EXPECT_NEAR(rep.quantities[G].value, rep.quantities[B].value, 1e-9);
  }
}

TEST(Diagram, SymmetricStepExample) {
  const auto inst = symmetric();
  for (bool c : {false, true}) {
    const auto rep = evaluate_diagram(inst, c);
    for (std::size_t i : {A, B, C, D}) EXPECT_NEAR(rep.quantities[i].value, 0.5, 1e-7 + rep.quantities[i].gap);
    EXPECT_EQ(relation(rep, "5*").verdict, Verdict::holds);
    EXPECT_EQ(relation(rep, "6*").verdict, Verdict::holds);
    EXPECT_GE(relation(rep, "4*").slack, -1e-9);
    EXPECT_FALSE(rep.any_violated());
    // G is attained by a randomized payoff.
    const auto g = supinf_value(inst.space, inst.family, inst.pricing, inst.utility, inst.budget(c), CurveKind::utility, Scope::all);
    EXPECT_NEAR(g.value, 0.5, 1e-12);
  }
}

// The Q-side inf sits on the non-equivalent extreme; (8*) stays within its gap.
TEST(Diagram, NonEquivalentMinimizer) {
  const auto inst = with_non_equivalent();
  ASSERT_FALSE(inst.family[1].equivalent());
  for (bool c : {false, true}) {
    const auto rep = evaluate_diagram(inst, c);
    const auto f = infsup_value(inst.space, inst.family, inst.pricing, inst.utility, inst.budget(c), CurveKind::utility, Scope::all);
    // Oracle: per-extreme envelope sups, the non-equivalent one is smaller.
    const double s0 = fixtures::oracle_envelope_sup(inst, c, inst.family[0].z());
    const double s1 = fixtures::oracle_envelope_sup(inst, c, inst.family[1].z());
    EXPECT_LT(s1, s0);
    EXPECT_NEAR(f.mixture[1], 1.0, 1e-12);
    const auto& r8 = relation(rep, "8*");
    EXPECT_NE(r8.verdict, Verdict::violated);
    EXPECT_GE(r8.slack, -1e-9);
    EXPECT_LE(r8.slack, rep.quantities[E].gap + rep.quantities[F].gap + 1e-9);
    EXPECT_FALSE(rep.any_violated());
  }
}

TEST(Diagram, TrivialRegime) {
  auto inst = symmetric();
  inst.x = 2.0;  // E[W] = 2 <= x
  const auto rep = evaluate_diagram(inst, true);
  EXPECT_TRUE(rep.trivial);
  EXPECT_TRUE(rep.relations.empty());
  EXPECT_DOUBLE_EQ(rep.trivial_value, 1.0);
  EXPECT_FALSE(evaluate_diagram(inst, false).trivial);
}

class DiagramProperties : public ::testing::TestWithParam<int> {};

TEST_P(DiagramProperties, SelfConsistentAndMonotone) {
  const std::uint64_t s = member_seed(11, static_cast<std::size_t>(GetParam()));
  const auto inst = generate_instance(s, member_options(s, {}));
  const DiagramOptions opt;
  for (bool c : {false, true}) {
    const auto rep = evaluate_diagram(inst, c, opt);
    if (rep.trivial) continue;
    auto copy = rep;
    recompute_relations(copy, opt);
    ASSERT_EQ(copy.relations.size(), rep.relations.size());
    for (std::size_t k = 0; k < rep.relations.size(); ++k) {
      EXPECT_EQ(copy.relations[k].verdict, rep.relations[k].verdict);
      EXPECT_EQ(copy.relations[k].verdict, judge(rep.relations[k], rep.quantities));
    }
    const auto& q = rep.quantities;
    const double tol = 1e-7 + q[D].gap + q[E].gap;
    EXPECT_LE(q[G].value, q[B].value + 1e-9);
    EXPECT_LE(std::abs(q[B].value - q[C].value), 1e-7 + q[C].gap);
    EXPECT_LE(std::abs(q[C].value - q[E].value), tol + q[C].gap);
    EXPECT_FALSE(rep.any_violated());
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, DiagramProperties, ::testing::Range(0, 12));

TEST(Diagram, LooseBoundMatchesUnconstrained) {
  for (int seed = 0; seed < 8; ++seed) {
    GeneratorOptions g;
    g.states = 2 + seed % 3;
    g.extremes = 2;
    g.kinks = 1 + seed % 3;
    auto inst = generate_instance(1200 + seed, g);
    std::vector<double> w(inst.space.size(), inst.utility.x_max() + 1.0);
    inst.space = ScenarioSpace(inst.space.p(), w);
    inst.pricing = PricingMeasure(inst.space, inst.pricing.psi());
    std::vector<Density> ex;
    for (std::size_t k = 0; k < inst.family.size(); ++k) ex.emplace_back(inst.space, inst.family[k].z());
    inst.family = MeasureFamily(ex);
    if (!nontrivial_bound(inst.space, inst.pricing, inst.x)) continue;
    const auto u = evaluate_diagram(inst, false), c = evaluate_diagram(inst, true);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(u.quantities[i].value, c.quantities[i].value, 1e-9) << i;
  }
}

TEST(Ensemble, ConcaveOnlyGeneratorGivesEqualities) {
  EnsembleBounds b;
  b.min_kinks = 0;
  b.max_kinks = 0;
  b.trivial_rate = 0.0;
  const auto e = ensemble_verify(3, 12, b, {}, true, true, true);
  EXPECT_EQ(e.violations, 0u);
  EXPECT_GT(e.diagrams, 0u);
  for (const auto& [name, st] : e.relations) {
    if (name == "1*" || name == "2*" || name == "3*" || name == "5*" || name == "6*") continue;
    EXPECT_GE(st.min_slack, -1e-9) << name;
  }
  for (const auto& rep : e.reports) {
    if (rep.trivial) continue;
    // U = U_c: the sup-inf side has no grid gap.
    EXPECT_NEAR(rep.quantities[G].value, rep.quantities[B].value, 1e-9);
    EXPECT_NEAR(rep.quantities[H].value, rep.quantities[A].value, 1e-9);
  }
}

TEST(Ensemble, TrivialMembersAreNotCounted) {
  EnsembleBounds b;
  b.trivial_rate = 1.0;
  const auto e = ensemble_verify(5, 6, b, {}, false, true);
  EXPECT_EQ(e.trivial, 6u);
  EXPECT_EQ(e.diagrams, 0u);
  EXPECT_TRUE(e.relations.empty());
}

TEST(Ensemble, DeterministicAcrossThreadCounts) {
  const auto a = ensemble_verify(9, 6, {}, {}, true, true, true, 1);
  const auto b = ensemble_verify(9, 6, {}, {}, true, true, true, 4);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t r = 0; r < a.reports.size(); ++r)
    for (std::size_t i = 0; i < 8; ++i) {
      const double x = a.reports[r].quantities[i].value, y = b.reports[r].quantities[i].value;
      if (std::isnan(x)) {
        EXPECT_TRUE(std::isnan(y));
      } else {
        EXPECT_EQ(x, y);
      }
    }
  EXPECT_EQ(a.violations, b.violations);
}
