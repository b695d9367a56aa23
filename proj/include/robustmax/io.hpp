#pragma once

// JSON instance and payoff files, result emission, and CSV plot data.
//
// Numbers in input files are JSON numbers or strings holding a decimal or an
// exact fraction "a/b".

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustmax/curve.hpp"
#include "robustmax/diagram.hpp"
#include "robustmax/improve.hpp"
#include "robustmax/instance.hpp"
#include "robustmax/payoff.hpp"
#include "robustmax/solve.hpp"
#include "robustmax/space.hpp"

namespace robustmax {

using json = nlohmann::json;

/// Malformed or unreadable input. `where` is a JSON pointer into the document,
/// a byte offset for syntax errors, or the file path for I/O failures.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

namespace detail {

inline double parse_decimal(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(where, "not a number: \"" + s + "\"");
  return v;
}

inline const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where, std::string("missing \"") + key + "\"");
  return *it;
}

}  // namespace detail

/// A JSON number, or a string "v" or "a/b".
inline double read_number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ParseError(where, "expected a number or a fraction string");
  const std::string s = j.get<std::string>();
  const auto slash = s.find('/');
  if (slash == std::string::npos) return detail::parse_decimal(s, where);
  const double num = detail::parse_decimal(s.substr(0, slash), where);
  const double den = detail::parse_decimal(s.substr(slash + 1), where);
  if (den == 0.0) throw ParseError(where, "zero denominator in \"" + s + "\"");
  return num / den;
}

inline std::vector<double> read_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], where + "/" + std::to_string(i)));
  return out;
}

inline UtilityCurve parse_curve(const json& j, const std::string& where = "/utility") {
  const auto knots = read_numbers(detail::member(j, "knots", where), where + "/knots");
  const auto values = read_numbers(detail::member(j, "values", where), where + "/values");
  const auto slopes = read_numbers(detail::member(j, "slopes", where), where + "/slopes");
  const double tail = j.contains("tail_slope") ? read_number(j["tail_slope"], where + "/tail_slope") : 0.0;
  try {
    return UtilityCurve(knots, values, slopes, tail);
  } catch (const CurveError& e) {
    const std::string at = e.knot() == CurveError::npos ? where : where + "/knots/" + std::to_string(e.knot());
    throw ParseError(at, e.what());
  }
}

inline Instance parse_instance(const json& doc) {
  if (!doc.is_object()) throw ParseError("/", "instance must be a JSON object");
  UtilityCurve utility = parse_curve(detail::member(doc, "utility", ""), "/utility");

  const json& sp = detail::member(doc, "space", "");
  const auto p = read_numbers(detail::member(sp, "p", "/space"), "/space/p");
  std::optional<std::vector<double>> w;
  if (sp.contains("w") && !sp["w"].is_null()) w = read_numbers(sp["w"], "/space/w");
  std::vector<std::string> labels;
  if (sp.contains("labels")) {
    if (!sp["labels"].is_array()) throw ParseError("/space/labels", "expected an array of strings");
    for (const auto& l : sp["labels"]) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
  }
  auto build = [](const std::string& where, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(where, e.what());
    }
  };
  ScenarioSpace space = build("/space", [&] { return ScenarioSpace(p, w, labels); });

  const json& pr = detail::member(doc, "pricing", "");
  const auto psi = read_numbers(detail::member(pr, "psi", "/pricing"), "/pricing/psi");
  PricingMeasure pricing = build("/pricing", [&] { return PricingMeasure(space, psi); });

  const json& fam = detail::member(doc, "family", "");
  if (!fam.is_array() || fam.empty()) throw ParseError("/family", "expected a non-empty array of densities");
  std::vector<Density> extremes;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const std::string where = "/family/" + std::to_string(k);
    const auto z = read_numbers(fam[k], where);
    extremes.push_back(build(where, [&] { return Density(space, z); }));
  }
  MeasureFamily family = build("/family", [&] { return MeasureFamily(std::move(extremes)); });

  const json& budget = detail::member(doc, "budget", "");
  const double x = read_number(detail::member(budget, "x", "/budget"), "/budget/x");
  if (!(x > 0.0)) throw ParseError("/budget/x", "initial wealth must be positive");

  std::optional<std::uint64_t> seed;
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_unsigned()) throw ParseError("/seed", "seed must be a non-negative integer");
    seed = doc["seed"].get<std::uint64_t>();
  }
  return Instance{std::move(utility), std::move(space), std::move(pricing), std::move(family), x, seed};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + "@" + std::to_string(e.byte), e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, "cannot open file for writing");
  out << text;
  if (!out) throw ParseError(path, "write failed");
}

inline Instance load_instance(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return parse_instance(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

inline json curve_to_json(const PiecewiseLinear& pl) {
  return json{{"knots", pl.knots}, {"values", pl.values}, {"slopes", pl.slopes}, {"tail_slope", pl.tail_slope}};
}

inline json instance_to_json(const Instance& inst) {
  json doc;
  doc["utility"] = curve_to_json(inst.utility.data());
  json sp{{"p", inst.space.p()}};
  if (inst.space.has_bound()) sp["w"] = inst.space.w();
  if (!inst.space.labels().empty()) sp["labels"] = inst.space.labels();
  doc["space"] = sp;
  std::vector<double> psi(inst.space.size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = inst.pricing[i];
  doc["pricing"] = json{{"psi", psi}};
  json fam = json::array();
  for (std::size_t k = 0; k < inst.family.size(); ++k) fam.push_back(inst.family[k].z());
  doc["family"] = fam;
  doc["budget"] = json{{"x", inst.x}};
  if (inst.seed) doc["seed"] = *inst.seed;
  return doc;
}

/// Payoff file: an array with one entry per state, each a list of
/// [value, weight] pairs (or a bare number for a deterministic value), either
/// at top level or under "payoff".
inline RandomizedPayoff parse_payoff(const json& doc) {
  const bool wrapped = doc.is_object();
  const json& arr = wrapped ? detail::member(doc, "payoff", "") : doc;
  const std::string root = wrapped ? "/payoff" : "";
  if (!arr.is_array()) throw ParseError(root.empty() ? "/" : root, "expected an array of states");
  std::vector<std::vector<Atom>> atoms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = root + "/" + std::to_string(i);
    const json& s = arr[i];
    std::vector<Atom> state;
    if (s.is_number() || s.is_string()) {
      state.push_back({read_number(s, where), 1.0});
    } else if (s.is_array()) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        const std::string at = where + "/" + std::to_string(j);
        if (!s[j].is_array() || s[j].size() != 2) throw ParseError(at, "expected [value, weight]");
        state.push_back({read_number(s[j][0], at + "/0"), read_number(s[j][1], at + "/1")});
      }
    } else {
      throw ParseError(where, "expected a number or a list of [value, weight]");
    }
    atoms.push_back(std::move(state));
  }
  try {
    return RandomizedPayoff(std::move(atoms));
  } catch (const std::invalid_argument& e) {
    throw ParseError(root.empty() ? "/" : root, e.what());
  }
}

inline RandomizedPayoff load_payoff(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return parse_payoff(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

inline json payoff_to_json(const RandomizedPayoff& X) {
  json arr = json::array();
  for (const auto& state : X.atoms()) {
    json s = json::array();
    for (const Atom& a : state) s.push_back({a.value, a.weight});
    arr.push_back(s);
  }
  return json{{"payoff", arr}};
}

inline json plan_to_json(const ImprovementPlan& plan) {
  json slots = json::array();
  for (const auto& s : plan.gap_slots)
    slots.push_back({{"state", s.state}, {"atom", s.atom}, {"value", s.value}, {"a", s.a}, {"b", s.b},
                     {"lambda", s.lambda}, {"class", s.cls}, {"mass", s.mass}, {"b_share", s.b_share}});
  json classes = json::array();
  for (const auto& c : plan.classes)
    classes.push_back({{"group", c.group},
                       {"v", c.v},
                       {"a", c.a},
                       {"b", c.b},
                       {"mass", c.mass},
                       {"sigma", c.sigma},
                       {"sigma_zeta", c.sigma_zeta},
                       {"a_mass_target", c.a_mass_target},
                       {"a_mass_assigned", c.a_mass_assigned},
                       {"balance_residual", c.residual()}});
  return json{{"conditional", plan.conditional},
              {"phi", plan.phi},
              {"gap_slots", slots},
              {"classes", classes},
              {"cost_before", plan.cost_before},
              {"cost_after", plan.cost_after},
              {"cost_reversed_orientation", plan.cost_reversed},
              {"utility_before", plan.utility_before},
              {"envelope_before", plan.envelope_before},
              {"utility_after", plan.utility_after},
              {"envelope_after", plan.envelope_after},
              {"max_balance_residual", plan.max_balance_residual()}};
}

inline json result_to_json(const SolveResult& r) {
  json j;
  j["value"] = r.value;
  j["optimizer"] = payoff_to_json(r.optimizer)["payoff"];
  j["gap"] = r.gap;
  j["method"] = r.method;
  j["candidate"] = r.candidate;
  j["mixture"] = r.mixture;
  return j;
}

/// Non-finite numbers become null in JSON.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json report_to_json(const DiagramReport& rep, const DiagramOptions& opt) {
  json j{{"constrained", rep.constrained},
         {"x", rep.x},
         {"trivial", rep.trivial},
         {"tolerance", {{"equal", opt.tol_equal}, {"inequality", opt.tol_inequality}}}};
  if (rep.trivial) {
    j["optimizer"] = "W";
    j["trivial_value"] = rep.trivial_value;
    return j;
  }
  json q = json::object();
  for (const auto& v : rep.quantities)
    q[v.name] = {{"formula", v.formula},
                 {"value", finite_or_null(v.value)},
                 {"gap", v.gap},
                 {"method", v.method},
                 {"candidate", v.candidate}};
  j["quantities"] = q;
  json rel = json::array();
  for (const auto& r : rep.relations)
    rel.push_back({{"relation", r.name},
                   {"kind", r.kind == RelationKind::equal ? "=" : "<="},
                   {"lhs", rep.quantities[r.lhs].name},
                   {"rhs", rep.quantities[r.rhs].name},
                   {"slack", finite_or_null(r.slack)},
                   {"tolerance", r.tolerance},
                   {"verdict", to_string(r.verdict)}});
  j["relations"] = rel;
  j["violated"] = rep.any_violated();
  return j;
}

inline json ensemble_to_json(const EnsembleReport& e) {
  json rel = json::object();
  for (const auto& [name, s] : e.relations)
    rel[name] = {{"holds", s.holds},
                 {"violated", s.violated},
                 {"inconclusive", s.inconclusive},
                 {"min_slack", finite_or_null(s.min_slack)},
                 {"max_slack", finite_or_null(s.max_slack)}};
  return json{{"seed", e.seed},          {"instances", e.instances},       {"diagrams", e.diagrams},
              {"trivial", e.trivial},    {"violations", e.violations},     {"inconclusive", e.inconclusive},
              {"relations", rel}};
}

/// Samples of U and U_c on [0, 1.25 * last knot], including every knot.
inline std::string curve_csv(const UtilityCurve& curve, std::size_t samples = 200) {
  const ConcaveCurve hull = concavify(curve);
  const double hi = 1.25 * std::max(curve.x_max(), 1.0);
  std::vector<double> xs(curve.knots());
  for (std::size_t j = 0; j <= samples; ++j) xs.push_back(hi * static_cast<double>(j) / static_cast<double>(samples));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::ostringstream out;
  out.precision(17);
  out << "x,U,Uc\n";
  for (double x : xs) out << x << ',' << curve(x) << ',' << hull(x) << '\n';
  return out.str();
}

}  // namespace robustmax
