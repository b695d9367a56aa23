#pragma once

// The eight robust value functions and the relations between them, for the
// unconstrained budget set and for the set bounded above by W.
//
//   A  sup_X inf_{Q_e} E_Q[U_c]     (1) A = B     (2) B = C     (3) C = D
//   B  sup_X inf_{Q}   E_Q[U_c]     (4) H <= A    (5) D = E     (6) H = G
//   C  inf_{Q}   sup_X E_Q[U_c]     (7) G <= F    (8) F <= E
//   D  inf_{Q_e} sup_X E_Q[U_c]
//   E  inf_{Q_e} sup_X E_Q[U]
//   F  inf_{Q}   sup_X E_Q[U]
//   G  sup_X inf_{Q}   E_Q[U]
//   H  sup_X inf_{Q_e} E_Q[U]

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "robustmax/instance.hpp"
#include "robustmax/solve.hpp"

namespace robustmax {

enum class Verdict { holds, violated, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Quantity {
  std::string name;
  std::string formula;
  double value = 0.0;
  double gap = 0.0;
  std::string method;
  std::string candidate;
};

enum class RelationKind { equal, less_equal };

struct Relation {
  std::string name;  // "1*" ... "8*"
  RelationKind kind = RelationKind::equal;
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  double slack = 0.0;      // rhs - lhs for <=, |lhs - rhs| for =
  double tolerance = 0.0;  // base tolerance, before gaps
  Verdict verdict = Verdict::holds;
};

struct DiagramOptions {
  double tol_equal = 1e-7;
  double tol_inequality = 1e-9;
  SolveOptions solve;
};

struct DiagramReport {
  bool constrained = false;
  bool trivial = false;  // E_{Q^e}[W] <= x: X = W is optimal
  double x = 0.0;
  double trivial_value = 0.0;
  std::array<Quantity, 8> quantities;
  std::vector<Relation> relations;

  bool any_violated() const {
    return std::any_of(relations.begin(), relations.end(),
                       [](const Relation& r) { return r.verdict == Verdict::violated; });
  }
  std::size_t count(Verdict v) const {
    return static_cast<std::size_t>(
        std::count_if(relations.begin(), relations.end(), [v](const Relation& r) { return r.verdict == v; }));
  }
};

/// Verdict of a relation from the stored quantities. A violation needs the
/// discrepancy to exceed the tolerance plus both certified gaps.
inline Verdict judge(const Relation& r, const std::array<Quantity, 8>& q) {
  const double lhs = q[r.lhs].value, rhs = q[r.rhs].value;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return Verdict::inconclusive;
  const double gaps = q[r.lhs].gap + q[r.rhs].gap;
  if (r.kind == RelationKind::equal) {
    const double d = std::abs(lhs - rhs);
    return d <= r.tolerance + gaps ? Verdict::holds : Verdict::violated;
  }
  const double slack = rhs - lhs;
  if (slack >= -r.tolerance) return Verdict::holds;
  if (slack >= -(r.tolerance + gaps)) return Verdict::inconclusive;
  return Verdict::violated;
}

inline void recompute_relations(DiagramReport& report, const DiagramOptions& opt) {
  struct Spec {
    const char* name;
    RelationKind kind;
    std::size_t lhs, rhs;
  };
  // Indices: A0 B1 C2 D3 E4 F5 G6 H7.
  static constexpr Spec specs[] = {
      {"1*", RelationKind::equal, 0, 1},      {"2*", RelationKind::equal, 1, 2},
      {"3*", RelationKind::equal, 2, 3},      {"4*", RelationKind::less_equal, 7, 0},
      {"5*", RelationKind::equal, 3, 4},      {"6*", RelationKind::equal, 7, 6},
      {"7*", RelationKind::less_equal, 6, 5}, {"8*", RelationKind::less_equal, 5, 4},
  };
  report.relations.clear();
  for (const auto& s : specs) {
    Relation r;
    r.name = s.name;
    r.kind = s.kind;
    r.lhs = s.lhs;
    r.rhs = s.rhs;
    const double lhs = report.quantities[s.lhs].value, rhs = report.quantities[s.rhs].value;
    r.slack = s.kind == RelationKind::equal ? std::abs(lhs - rhs) : rhs - lhs;
    r.tolerance = s.kind == RelationKind::equal ? opt.tol_equal : opt.tol_inequality;
    r.verdict = judge(r, report.quantities);
    report.relations.push_back(r);
  }
}

inline DiagramReport evaluate_diagram(const Instance& inst, bool constrained, const DiagramOptions& opt = {}) {
  DiagramReport report;
  report.constrained = constrained;
  report.x = inst.x;
  const BudgetSpec budget = inst.budget(constrained);
  if (constrained && !nontrivial_bound(inst.space, inst.pricing, inst.x)) {
    report.trivial = true;
    std::vector<double> w = inst.space.w();
    const auto X = RandomizedPayoff::deterministic(w);
    report.trivial_value =
        worst_case_utility(X, inst.space, inst.family, per_state_utility(inst.utility, inst.space, true)).value;
    return report;
  }

  struct Def {
    const char* name;
    const char* formula;
    bool supinf;
    CurveKind kind;
    Scope scope;
  };
  static constexpr Def defs[] = {
      {"A", "sup_X inf_Qe E_Q[Uc(X)]", true, CurveKind::envelope, Scope::equivalent},
      {"B", "sup_X inf_Q E_Q[Uc(X)]", true, CurveKind::envelope, Scope::all},
      {"C", "inf_Q sup_X E_Q[Uc(X)]", false, CurveKind::envelope, Scope::all},
      {"D", "inf_Qe sup_X E_Q[Uc(X)]", false, CurveKind::envelope, Scope::equivalent},
      {"E", "inf_Qe sup_X E_Q[U(X)]", false, CurveKind::utility, Scope::equivalent},
      {"F", "inf_Q sup_X E_Q[U(X)]", false, CurveKind::utility, Scope::all},
      {"G", "sup_X inf_Q E_Q[U(X)]", true, CurveKind::utility, Scope::all},
      {"H", "sup_X inf_Qe E_Q[U(X)]", true, CurveKind::utility, Scope::equivalent},
  };
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& d = defs[i];
    Quantity q;
    q.name = d.name;
    q.formula = d.formula;
    try {
      const SolveResult r = d.supinf ? supinf_value(inst.space, inst.family, inst.pricing, inst.utility, budget,
                                                    d.kind, d.scope, opt.solve)
                                     : infsup_value(inst.space, inst.family, inst.pricing, inst.utility, budget,
                                                    d.kind, d.scope, opt.solve);
      q.value = r.value;
      q.gap = r.gap;
      q.method = r.method;
      q.candidate = r.candidate;
    } catch (const std::exception& e) {
      q.value = std::numeric_limits<double>::quiet_NaN();
      q.method = std::string("failed: ") + e.what();
    }
    report.quantities[i] = std::move(q);
  }
  recompute_relations(report, opt);
  return report;
}

struct EnsembleBounds {
  std::size_t max_states = 4;
  std::size_t min_extremes = 2;
  std::size_t max_extremes = 4;
  std::size_t min_kinks = 1;
  std::size_t max_kinks = 3;
  double trivial_rate = 0.05;
};

struct RelationStats {
  std::size_t holds = 0, violated = 0, inconclusive = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double max_slack = -std::numeric_limits<double>::infinity();
};

struct EnsembleReport {
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::size_t diagrams = 0;
  std::size_t trivial = 0;
  std::size_t violations = 0;
  std::size_t inconclusive = 0;
  std::map<std::string, RelationStats> relations;
  double seconds = 0.0;
  std::vector<DiagramReport> reports;
};

/// Seed of the i-th ensemble member.
inline std::uint64_t member_seed(std::uint64_t seed, std::size_t i) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i) + 1;
}

inline GeneratorOptions member_options(std::uint64_t member, const EnsembleBounds& b) {
  detail::Sampler rs(member ^ 0xA5A5A5A5ULL);
  GeneratorOptions g;
  g.states = static_cast<std::size_t>(rs.integer(2, static_cast<int>(std::max<std::size_t>(2, b.max_states))));
  g.extremes = static_cast<std::size_t>(
      rs.integer(static_cast<int>(b.min_extremes), static_cast<int>(std::max(b.min_extremes, b.max_extremes))));
  g.kinks = static_cast<std::size_t>(
      rs.integer(static_cast<int>(b.min_kinks), static_cast<int>(std::max(b.min_kinks, b.max_kinks))));
  g.oracle_safe = true;
  g.trivial_rate = b.trivial_rate;
  return g;
}

/// Runs the diagram on `count` seeded instances in the selected budget modes.
/// Instances are evaluated on up to `threads` workers (0: hardware
/// concurrency); aggregation runs in seed order afterwards.
inline EnsembleReport ensemble_verify(std::uint64_t seed, std::size_t count, const EnsembleBounds& bounds = {},
                                      const DiagramOptions& opt = {}, bool unconstrained = true,
                                      bool constrained = true, bool keep_reports = false, unsigned threads = 0) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<DiagramReport>> per(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      const std::uint64_t s = member_seed(seed, i);
      const Instance inst = generate_instance(s, member_options(s, bounds));
      if (unconstrained) per[i].push_back(evaluate_diagram(inst, false, opt));
      if (constrained) per[i].push_back(evaluate_diagram(inst, true, opt));
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  EnsembleReport out;
  out.seed = seed;
  out.instances = count;
  for (auto& reps : per) {
    for (auto& rep : reps) {
      if (rep.trivial) {
        ++out.trivial;
      } else {
        ++out.diagrams;
        for (const auto& r : rep.relations) {
          auto& st = out.relations[r.name];
          st.min_slack = std::min(st.min_slack, r.slack);
          st.max_slack = std::max(st.max_slack, r.slack);
          switch (r.verdict) {
            case Verdict::holds: ++st.holds; break;
            case Verdict::violated: ++st.violated; ++out.violations; break;
            case Verdict::inconclusive: ++st.inconclusive; ++out.inconclusive; break;
          }
        }
      }
      if (keep_reports) out.reports.push_back(std::move(rep));
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace robustmax
