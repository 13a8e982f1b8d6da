#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "actcause/dsl.hpp"

namespace actcause {

struct Fixture {
  std::string name;  // file name without the .scm.txt suffix
  std::filesystem::path path;
  std::string source;
  ParsedDocument document;
};

inline constexpr std::string_view kFixtureSuffix = ".scm.txt";

inline Fixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read fixture '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string name = path.filename().string();
  name.resize(name.size() - std::min(name.size(), kFixtureSuffix.size()));
  ParseResult r = parse(ss.str());
  if (!r.ok()) {
    std::string msg = "fixture '" + path.string() + "' does not parse:";
    for (const auto& d : r.diagnostics) msg += "\n  " + d.to_string();
    throw Error(msg);
  }
  return Fixture{name, path, ss.str(), std::move(*r.document)};
}

// Every *.scm.txt file directly under `dir`, sorted by name.
inline std::vector<Fixture> load_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string f = entry.path().filename().string();
    if (entry.is_regular_file() && f.size() > kFixtureSuffix.size() && f.ends_with(kFixtureSuffix)) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Fixture> out;
  for (const auto& p : paths) out.push_back(load_fixture(p));
  return out;
}

// Variable bijection plus, per variable, a bijection of values.  Variables
// missing from `values` keep their values.
struct Renaming {
  std::map<std::string, std::string> variables;
  std::map<std::string, std::map<Value, Value>> values;

  Value map_value(const std::string& var, Value v) const {
    auto it = values.find(var);
    if (it == values.end()) return v;
    auto jt = it->second.find(v);
    return jt == it->second.end() ? v : jt->second;
  }
};

struct IsomorphismReport {
  bool isomorphic = false;
  std::string reason;  // first mismatch when not isomorphic
};

// Checks that `r` maps `a` onto `b`: kinds and ranges correspond, and every
// equation of `a`, evaluated at any assignment, agrees with the renamed
// equation of `b` at the renamed assignment.
inline IsomorphismReport equation_isomorphic(const CausalModel& a, const CausalModel& b, const Renaming& r) {
  auto fail = [](std::string why) { return IsomorphismReport{false, std::move(why)}; };
  if (a.exogenous().size() != b.exogenous().size() || a.endogenous().size() != b.endogenous().size()) {
    return fail("models have different numbers of variables");
  }
  // Targets in b, indexed like a's variables (exogenous first).
  std::vector<const Variable*> a_vars;
  for (const auto& v : a.exogenous()) a_vars.push_back(&v);
  for (const auto& v : a.endogenous()) a_vars.push_back(&v);
  std::vector<VarRef> image;
  std::set<std::string> used;
  for (const Variable* v : a_vars) {
    auto it = r.variables.find(v->name);
    if (it == r.variables.end()) return fail("renaming leaves '" + v->name + "' unmapped");
    if (!used.insert(it->second).second) return fail("renaming maps two variables onto '" + it->second + "'");
    auto ref = b.find(it->second);
    if (!ref) return fail("'" + it->second + "' does not exist in the target model");
    if (ref->kind != v->kind) return fail("'" + v->name + "' and '" + it->second + "' differ in kind");
    std::vector<Value> mapped;
    for (Value x : v->range) mapped.push_back(r.map_value(v->name, x));
    auto sa = mapped;
    auto sb = b.variable(*ref).range;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (std::adjacent_find(sa.begin(), sa.end()) != sa.end() || sa != sb) {
      return fail("values of '" + v->name + "' do not map onto the range of '" + it->second + "'");
    }
    image.push_back(*ref);
  }

  std::vector<const std::vector<Value>*> ranges;
  std::uint64_t combos = 1;
  for (const Variable* v : a_vars) {
    ranges.push_back(&v->range);
    combos *= v->range.size();
    if (combos > detail::kMaxTotalityCombos) return fail("models too large to compare exhaustively");
  }
  const std::size_t ne = a.exogenous().size();
  IsomorphismReport result{true, {}};
  detail::for_each_tuple(ranges, [&](const std::vector<Value>& vals) {
    std::vector<Value> b_exo(b.exogenous().size()), b_endo(b.endogenous().size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      Value mv = r.map_value(a_vars[i]->name, vals[i]);
      (image[i].kind == VarKind::exogenous ? b_exo : b_endo)[image[i].index] = mv;
    }
    auto lookup_a = [&](VarRef ref) { return vals[ref.kind == VarKind::exogenous ? ref.index : ne + ref.index]; };
    auto lookup_b = [&](VarRef ref) { return ref.kind == VarKind::exogenous ? b_exo[ref.index] : b_endo[ref.index]; };
    for (std::size_t i = 0; i < a.endogenous().size(); ++i) {
      const std::string& name = a.endogenous()[i].name;
      Value va = r.map_value(name, a.equation(i).eval(lookup_a));
      Value vb = b.equation(image[ne + i].index).eval(lookup_b);
      if (va != vb) {
        result = fail("equation for '" + name + "' disagrees with '" + r.variables.at(name) + "'");
        return false;
      }
    }
    return true;
  });
  return result;
}

inline Context rename_context(const CausalModel& a, const CausalModel& b, const Renaming& r, const Context& c) {
  Context out{std::vector<Value>(b.exogenous().size())};
  for (std::size_t i = 0; i < a.exogenous().size(); ++i) {
    const std::string& name = a.exogenous()[i].name;
    out.values[b.find(r.variables.at(name))->index] = r.map_value(name, c.values[i]);
  }
  return out;
}

inline CandidateCause rename_cause(const CausalModel& a, const CausalModel& b, const Renaming& r,
                                   const CandidateCause& c) {
  std::vector<PrimitiveEvent> evs;
  for (const auto& e : c.conjuncts()) {
    const std::string& name = a.endogenous()[e.var].name;
    evs.push_back({b.endogenous_index(r.variables.at(name)), r.map_value(name, e.value)});
  }
  return CandidateCause(std::move(evs));
}

inline BooleanFormula rename_formula(const CausalModel& a, const CausalModel& b, const Renaming& r,
                                     const BooleanFormula& f) {
  using Op = BooleanFormula::Op;
  switch (f.op()) {
    case Op::event: {
      const std::string& name = a.endogenous()[f.primitive().var].name;
      return BooleanFormula::event(
          {b.endogenous_index(r.variables.at(name)), r.map_value(name, f.primitive().value)});
    }
    case Op::negation:
      return BooleanFormula::negation(rename_formula(a, b, r, f.operands()[0]));
    case Op::conjunction:
      return BooleanFormula::conjunction(rename_formula(a, b, r, f.operands()[0]),
                                         rename_formula(a, b, r, f.operands()[1]));
    case Op::disjunction:
      return BooleanFormula::disjunction(rename_formula(a, b, r, f.operands()[0]),
                                         rename_formula(a, b, r, f.operands()[1]));
  }
  return f;
}

}  // namespace actcause
