// Command-line front end: concavify, improve, solve, verify, generate.
//
// Exit codes: 0 success, 1 violated relation, 2 input/usage error,
// 3 non-equivalent density passed to improve.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "robustmax/io.hpp"
#include "robustmax/robustmax.hpp"

namespace {

using namespace robustmax;

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kInputError = 2;
constexpr int kNotEquivalent = 3;

struct NotEquivalent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_report(std::ostream& os, const DiagramReport& rep) {
  os << (rep.constrained ? "constrained" : "unconstrained") << " budget, x = " << fmt(rep.x) << "\n";
  if (rep.trivial) {
    os << "  trivial regime: E_Qe[W] <= x, X* = W, worst-case utility " << fmt(rep.trivial_value) << "\n";
    return;
  }
  for (const auto& q : rep.quantities)
    os << "  " << q.name << "  " << std::left << std::setw(26) << q.formula << std::right << std::setw(18)
       << fmt(q.value) << "  gap " << std::setw(10) << fmt(q.gap) << "  " << q.method
       << (q.candidate.empty() ? "" : " / " + q.candidate) << "\n";
  for (const auto& r : rep.relations)
    os << "  (" << r.name << ") " << rep.quantities[r.lhs].name << (r.kind == RelationKind::equal ? " =  " : " <= ")
       << rep.quantities[r.rhs].name << "  slack " << std::setw(12) << fmt(r.slack) << "  " << to_string(r.verdict)
       << "\n";
}

DiagramOptions diagram_options(std::optional<double> tolerance) {
  DiagramOptions opt;
  if (const char* env = std::getenv("ROBUSTMAX_TOLERANCE")) {
    try {
      opt.tol_equal = read_number(json(std::string(env)), "ROBUSTMAX_TOLERANCE");
    } catch (const ParseError&) {
      throw ParseError("ROBUSTMAX_TOLERANCE", "not a number: " + std::string(env));
    }
  }
  if (tolerance) opt.tol_equal = *tolerance;
  if (!(opt.tol_equal >= 0.0)) throw ParseError("--tolerance", "tolerance must be non-negative");
  return opt;
}

int cmd_concavify(const std::string& input, const std::string& output, std::string csv) {
  const Instance inst = load_instance(input);
  const ConcaveCurve hull = concavify(inst.utility);
  json j{{"utility", curve_to_json(inst.utility.data())}, {"envelope", curve_to_json(hull.data())}};
  emit(output, dump(j));
  if (csv.empty() && !output.empty() && output != "-")
    csv = std::filesystem::path(output).replace_extension(".csv").string();
  if (!csv.empty()) emit(csv, curve_csv(inst.utility));
  return kOk;
}

int cmd_improve(const std::string& input, const std::string& payoff_path, std::size_t density,
                bool conditional, const std::string& output) {
  const Instance inst = load_instance(input);
  const RandomizedPayoff X = load_payoff(payoff_path);
  if (X.size() != inst.space.size()) throw ParseError(payoff_path, "payoff has wrong number of states");
  if (density >= inst.family.size())
    throw ParseError("--density", "index " + std::to_string(density) + " out of range");
  const Density& z = inst.family[density];
  if (!z.equivalent()) throw NotEquivalent("density " + std::to_string(density) + " is not equivalent to P");
  const Improvement imp = improve(X, inst.space, z, inst.pricing, inst.utility, conditional);
  json j = payoff_to_json(imp.payoff);
  j["plan"] = plan_to_json(imp.plan);
  emit(output, dump(j));
  return kOk;
}

int cmd_solve(const std::string& input, bool constrained, const std::string& curve, const std::string& scope,
              std::optional<std::size_t> density, const std::string& output) {
  const Instance inst = load_instance(input);
  const BudgetSpec budget = inst.budget(constrained);
  const CurveKind kind = curve == "U" ? CurveKind::utility : CurveKind::envelope;
  json j{{"constrained", constrained}, {"curve", curve}};
  if (density) {
    if (*density >= inst.family.size())
      throw ParseError("--density", "index " + std::to_string(*density) + " out of range");
    const Density& z = inst.family[*density];
    const SolveResult r = kind == CurveKind::envelope
                              ? maximize_concave_single(inst.space, z, inst.pricing, inst.utility, budget)
                              : maximize_utility_single(inst.space, z, inst.pricing, inst.utility, budget);
    j["density"] = *density;
    j["single"] = result_to_json(r);
  } else {
    const Scope sc = scope == "Q" ? Scope::all : Scope::equivalent;
    j["scope"] = scope;
    j["supinf"] = result_to_json(supinf_value(inst.space, inst.family, inst.pricing, inst.utility, budget, kind, sc));
    j["infsup"] = result_to_json(infsup_value(inst.space, inst.family, inst.pricing, inst.utility, budget, kind, sc));
  }
  emit(output, dump(j));
  return kOk;
}

int cmd_verify(const std::string& input, bool constrained, std::size_t ensemble, std::uint64_t seed,
               std::optional<double> tolerance, const std::string& output, bool quiet) {
  const DiagramOptions opt = diagram_options(tolerance);
  if (ensemble > 0) {
    const EnsembleReport e = ensemble_verify(seed, ensemble, EnsembleBounds{}, opt, !constrained, true);
    if (!quiet) {
      std::cout << "ensemble seed " << e.seed << ": " << e.instances << " instances, " << e.diagrams
                << " diagrams, " << e.trivial << " trivial, " << e.violations << " violated, " << e.inconclusive
                << " inconclusive (" << fmt(e.seconds) << " s)\n";
      for (const auto& [name, s] : e.relations)
        std::cout << "  (" << name << ") holds " << s.holds << "  violated " << s.violated << "  inconclusive "
                  << s.inconclusive << "  slack [" << fmt(s.min_slack) << ", " << fmt(s.max_slack) << "]\n";
    }
    if (!output.empty()) emit(output, dump(ensemble_to_json(e)));
    return e.violations == 0 ? kOk : kViolated;
  }
  if (input.empty()) throw ParseError("verify", "an instance file or --ensemble is required");
  const Instance inst = load_instance(input);
  const DiagramReport rep = evaluate_diagram(inst, constrained, opt);
  if (!quiet) print_report(std::cout, rep);
  if (!output.empty()) emit(output, dump(report_to_json(rep, opt)));
  return rep.any_violated() ? kViolated : kOk;
}

int cmd_generate(std::uint64_t seed, const GeneratorOptions& g, const std::string& output) {
  const Instance inst = generate_instance(seed, g);
  emit(output, dump(instance_to_json(inst)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust utility maximization with non-concave utilities on finite scenario spaces"};
  app.require_subcommand(1);

  std::string input, output, csv, payoff, curve = "Uc", scope = "Q";
  bool constrained = false, conditional = false, quiet = false, oracle_safe = false;
  std::size_t density = 0, ensemble = 0;
  std::optional<std::size_t> solve_density;
  std::optional<double> tolerance;
  std::uint64_t seed = 0;
  GeneratorOptions gen;

  auto* concav = app.add_subcommand("concavify", "Concave envelope of the utility, with CSV plot data");
  concav->add_option("input", input, "Instance file")->required();
  concav->add_option("-o,--output", output, "Envelope JSON (default: stdout)");
  concav->add_option("--csv", csv, "CSV samples x,U,Uc (default: output path with .csv)");

  auto* imp = app.add_subcommand("improve", "Apply the improvement operator to a payoff");
  imp->add_option("input", input, "Instance file")->required();
  imp->add_option("payoff", payoff, "Payoff file")->required();
  imp->add_option("-d,--density", density, "Index of the family extreme");
  imp->add_flag("--conditional", conditional, "Work conditionally on W (capped utility)");
  imp->add_option("-o,--output", output, "Output JSON (default: stdout)");

  auto* solve = app.add_subcommand("solve", "Sup-inf and inf-sup values, or a single-measure optimum");
  solve->add_option("input", input, "Instance file")->required();
  solve->add_flag("--constrained", constrained, "Bound payoffs above by W");
  solve->add_option("--curve", curve, "U or Uc")->check(CLI::IsMember({"U", "Uc"}));
  solve->add_option("--scope", scope, "Q or Qe")->check(CLI::IsMember({"Q", "Qe"}));
  solve->add_option("-d,--density", solve_density, "Solve under a single extreme instead");
  solve->add_option("-o,--output", output, "Output JSON (default: stdout)");

  auto* verify = app.add_subcommand("verify", "Evaluate the eight quantities and check all relations");
  verify->add_option("input", input, "Instance file (omit with --ensemble)");
  verify->add_flag("--constrained", constrained, "Constrained budget set (ensemble: constrained only)");
  verify->add_option("--ensemble", ensemble, "Run on N generated instances instead");
  verify->add_option("--seed", seed, "Ensemble seed");
  verify->add_option("--tolerance", tolerance, "Equality tolerance (default 1e-7, env ROBUSTMAX_TOLERANCE)");
  verify->add_option("-o,--output", output, "Machine-readable report (JSON)");
  verify->add_flag("-q,--quiet", quiet, "Suppress the summary table");

  auto* generate = app.add_subcommand("generate", "Write a seeded random instance");
  generate->add_option("--seed", seed, "Generator seed");
  generate->add_option("--states", gen.states, "Number of states");
  generate->add_option("--extremes", gen.extremes, "Number of family extremes");
  generate->add_option("--kinks", gen.kinks, "Number of upward jumps (0: concave utility)");
  generate->add_flag("--oracle-safe", oracle_safe, "Stay within the brute-force oracle limits");
  generate->add_option("-o,--output", output, "Instance file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*concav) return cmd_concavify(input, output, csv);
    if (*imp) return cmd_improve(input, payoff, density, conditional, output);
    if (*solve) return cmd_solve(input, constrained, curve, scope, solve_density, output);
    if (*verify) return cmd_verify(input, constrained, ensemble, seed, tolerance, output, quiet);
    if (*generate) {
      gen.oracle_safe = oracle_safe;
      return cmd_generate(seed, gen, output);
    }
  } catch (const NotEquivalent& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotEquivalent;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
