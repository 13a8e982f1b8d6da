#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "actcause/expr.hpp"

namespace actcause {

class ModelError : public Error {
 public:
  using Error::Error;
};

struct Variable {
  std::string name;
  VarKind kind = VarKind::endogenous;
  std::vector<Value> range;  // declaration order

  bool in_range(Value v) const {
    return std::find(range.begin(), range.end(), v) != range.end();
  }
};

// Total assignment to the exogenous variables, in declaration order.
struct Context {
  std::vector<Value> values;
  friend auto operator<=>(const Context&, const Context&) = default;
};

// Total assignment to the endogenous variables, in declaration order.  A
// world need not satisfy the equations.
struct World {
  std::vector<Value> values;

  Value operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
  friend auto operator<=>(const World&, const World&) = default;
};

// Partial endogenous assignment, sorted by variable index, no duplicates.
struct Assignment {
  std::vector<std::pair<std::size_t, Value>> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  friend bool operator==(const Assignment&, const Assignment&) = default;

  static Assignment from(std::vector<std::pair<std::size_t, Value>> e) {
    std::sort(e.begin(), e.end());
    for (std::size_t i = 1; i < e.size(); ++i) {
      if (e[i].first == e[i - 1].first) {
        throw ModelError("assignment sets a variable twice");
      }
    }
    return Assignment{std::move(e)};
  }
};

struct Violation {
  enum class Kind {
    duplicate_name,
    empty_range,
    duplicate_value,
    unknown_reference,
    cycle,
    non_total,
    too_large,
  };
  Kind kind;
  std::string variable;
  std::string message;
  std::vector<std::string> cycle;  // for Kind::cycle: X -> ... -> X
  std::vector<Value> tuple;        // for Kind::non_total: referenced values
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Finite-domain acyclic structural causal model.  Immutable once built; a
// model carries its own validation report and only valid models can be solved.
class CausalModel {
 public:
  class Builder;

  std::span<const Variable> exogenous() const { return exo_; }
  std::span<const Variable> endogenous() const { return endo_; }
  const Variable& variable(VarRef r) const {
    return r.kind == VarKind::exogenous ? exo_[r.index] : endo_[r.index];
  }
  const Expr& equation(std::size_t endo_index) const { return equations_[endo_index]; }

  std::optional<VarRef> find(std::string_view name) const {
    for (std::size_t i = 0; i < exo_.size(); ++i)
      if (exo_[i].name == name) return VarRef{VarKind::exogenous, i};
    for (std::size_t i = 0; i < endo_.size(); ++i)
      if (endo_[i].name == name) return VarRef{VarKind::endogenous, i};
    return std::nullopt;
  }

  std::size_t endogenous_index(std::string_view name) const {
    auto r = find(name);
    if (!r) throw ModelError("unknown variable '" + std::string(name) + "'");
    if (r->kind != VarKind::endogenous) {
      throw ModelError("'" + std::string(name) + "' is exogenous");
    }
    return r->index;
  }

  const ValidationReport& report() const { return report_; }
  bool valid() const { return report_.ok(); }

  // Endogenous indices in a topological order of the (syntactic) dependence
  // graph.  Empty when the model is cyclic.
  const std::vector<std::size_t>& topological_order() const { return topo_; }

 private:
  friend class Builder;
  friend CausalModel intervene(const CausalModel&, const Assignment&);

  void compute_order();
  void check_totality();

  std::vector<Variable> exo_;
  std::vector<Variable> endo_;
  std::vector<Expr> equations_;
  ValidationReport report_;
  std::vector<std::size_t> topo_;
};

namespace detail {

constexpr std::uint64_t kMaxTotalityCombos = std::uint64_t{1} << 20;

// Calls fn(values) for every tuple in the product of `ranges`, in
// lexicographic order of range positions.  Stops early when fn returns false.
template <class Fn>
void for_each_tuple(const std::vector<const std::vector<Value>*>& ranges, Fn&& fn) {
  std::vector<std::size_t> pos(ranges.size(), 0);
  std::vector<Value> vals(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i]->empty()) return;
    vals[i] = (*ranges[i])[0];
  }
  while (true) {
    if (!fn(vals)) return;
    std::size_t i = ranges.size();
    while (i > 0) {
      --i;
      if (++pos[i] < ranges[i]->size()) {
        vals[i] = (*ranges[i])[pos[i]];
        break;
      }
      pos[i] = 0;
      vals[i] = (*ranges[i])[0];
      if (i == 0) return;
    }
    if (ranges.empty()) return;
  }
}

inline std::vector<std::size_t> endogenous_parents(const Expr& e) {
  std::vector<std::size_t> out;
  for (VarRef r : e.references())
    if (r.kind == VarKind::endogenous) out.push_back(r.index);
  return out;
}

}  // namespace detail

class CausalModel::Builder {
 public:
  Builder& exogenous(std::string name, std::vector<Value> range) {
    decls_.push_back({Variable{std::move(name), VarKind::exogenous, std::move(range)}, Expr()});
    return *this;
  }
  Builder& endogenous(std::string name, std::vector<Value> range, Expr body) {
    decls_.push_back(
        {Variable{std::move(name), VarKind::endogenous, std::move(range)}, std::move(body)});
    return *this;
  }

  // Resolves references and validates.  Always returns a model; check
  // valid() or report() before use.
  CausalModel build() const {
    CausalModel m;
    ValidationReport& rep = m.report_;
    std::set<std::string> seen;
    for (const auto& [var, body] : decls_) {
      if (!seen.insert(var.name).second) {
        rep.violations.push_back({Violation::Kind::duplicate_name, var.name,
                                  "variable '" + var.name + "' declared twice", {}, {}});
        continue;
      }
      if (var.range.empty()) {
        rep.violations.push_back({Violation::Kind::empty_range, var.name,
                                  "variable '" + var.name + "' has an empty range", {}, {}});
      }
      std::set<Value> vs(var.range.begin(), var.range.end());
      if (vs.size() != var.range.size()) {
        rep.violations.push_back({Violation::Kind::duplicate_value, var.name,
                                  "range of '" + var.name + "' repeats a value", {}, {}});
      }
      if (var.kind == VarKind::exogenous) {
        m.exo_.push_back(var);
      } else {
        m.endo_.push_back(var);
        m.equations_.push_back(body);
      }
    }

    auto lookup = [&m](const std::string& name) { return m.find(name); };
    for (std::size_t i = 0; i < m.equations_.size(); ++i) {
      std::vector<std::string> unknown;
      m.equations_[i] = m.equations_[i].resolve(lookup, unknown);
      for (const auto& u : unknown) {
        rep.violations.push_back({Violation::Kind::unknown_reference, m.endo_[i].name,
                                  "equation for '" + m.endo_[i].name +
                                      "' references undeclared variable '" + u + "'",
                                  {}, {}});
      }
    }
    if (!rep.ok()) return m;

    m.compute_order();
    if (!rep.ok()) return m;
    m.check_totality();
    return m;
  }

 private:
  std::vector<std::pair<Variable, Expr>> decls_;
};

inline void CausalModel::compute_order() {
  const std::size_t n = endo_.size();
  std::vector<std::vector<std::size_t>> parents(n);
  for (std::size_t i = 0; i < n; ++i) parents[i] = detail::endogenous_parents(equations_[i]);

  // Cycle search: iterative DFS over parent edges, reporting each cycle
  // found through a back edge.
  enum : char { white, grey, black };
  std::vector<char> color(n, white);
  std::set<std::set<std::size_t>> reported;
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root] != white) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = grey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < parents[v].size()) {
        std::size_t p = parents[v][next++];
        if (color[p] == white) {
          color[p] = grey;
          stack.push_back({p, 0});
        } else if (color[p] == grey) {
          std::vector<std::size_t> path;
          std::size_t k = stack.size();
          while (k > 0 && stack[k - 1].first != p) --k;
          for (std::size_t j = k - 1; j < stack.size(); ++j) path.push_back(stack[j].first);
          std::set<std::size_t> key(path.begin(), path.end());
          if (reported.insert(key).second) {
            // Stack runs from dependents to parents; print in dependency
            // direction (parent -> child).
            Violation cyc{Violation::Kind::cycle, endo_[p].name, {}, {}, {}};
            std::string msg = "dependency cycle: ";
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
              cyc.cycle.push_back(endo_[*it].name);
              msg += endo_[*it].name + " -> ";
            }
            cyc.cycle.push_back(endo_[path.back()].name);
            msg += endo_[path.back()].name;
            cyc.message = msg;
            report_.violations.push_back(std::move(cyc));
          }
        }
      } else {
        color[v] = black;
        stack.pop_back();
      }
    }
  }
  if (!report_.ok()) return;

  // Kahn's algorithm; ties broken by declaration order.
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p : parents[i]) {
      ++indeg[i];
      children[p].push_back(i);
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (std::size_t c : children[v])
      if (--indeg[c] == 0) ready.insert(c);
  }
}

inline void CausalModel::check_totality() {
  for (std::size_t i = 0; i < endo_.size(); ++i) {
    const Expr& body = equations_[i];
    const Variable& target = endo_[i];
    std::vector<VarRef> refs = body.references();
    std::vector<const std::vector<Value>*> ranges;
    std::uint64_t combos = 1;
    for (VarRef r : refs) {
      ranges.push_back(&variable(r).range);
      combos *= variable(r).range.size();
      if (combos > detail::kMaxTotalityCombos) break;
    }
    if (combos > detail::kMaxTotalityCombos) {
      report_.violations.push_back({Violation::Kind::too_large, target.name,
                                    "equation for '" + target.name +
                                        "' has too many parent combinations to verify",
                                    {}, {}});
      continue;
    }
    detail::for_each_tuple(ranges, [&](const std::vector<Value>& vals) {
      auto lookup = [&](VarRef r) {
        for (std::size_t k = 0; k < refs.size(); ++k)
          if (refs[k] == r) return vals[k];
        throw EvalError("reference outside parent set");
      };
      std::string problem;
      try {
        Value out = body.eval(lookup);
        if (!target.in_range(out)) {
          problem = "yields " + std::to_string(out) + ", outside the range of '" +
                    target.name + "'";
        }
      } catch (const EvalError& e) {
        problem = e.what();
      }
      if (problem.empty()) return true;
      std::string where;
      for (std::size_t k = 0; k < refs.size(); ++k) {
        where += (k ? ", " : "") + variable(refs[k]).name + "=" + std::to_string(vals[k]);
      }
      report_.violations.push_back(
          {Violation::Kind::non_total, target.name,
           "equation for '" + target.name + "' " + problem +
               (where.empty() ? std::string() : " at (" + where + ")"),
           {}, vals});
      return false;
    });
  }
}

inline ValidationReport validate_model(const CausalModel& model) { return model.report(); }

// Sentinel-based dense intervention: slot i holds the forced value of
// endogenous variable i, or kFree.
struct Intervention {
  static constexpr Value kFree = std::numeric_limits<Value>::min();
  std::vector<Value> slots;

  explicit Intervention(std::size_t n = 0) : slots(n, kFree) {}
  Intervention(std::size_t n, const Assignment& a) : slots(n, kFree) {
    for (auto [i, v] : a.entries) slots[i] = v;
  }
  bool fixed(std::size_t i) const { return slots[i] != kFree; }
  void set(std::size_t i, Value v) { slots[i] = v; }
  void clear(std::size_t i) { slots[i] = kFree; }
  friend bool operator==(const Intervention&, const Intervention&) = default;
};

namespace detail {

inline void require_solvable(const CausalModel& model, const Context& context) {
  if (!model.valid()) {
    throw ModelError("model failed validation: " + model.report().violations.front().message);
  }
  if (context.values.size() != model.exogenous().size()) {
    throw ModelError("context does not cover every exogenous variable");
  }
  for (std::size_t i = 0; i < context.values.size(); ++i) {
    if (!model.exogenous()[i].in_range(context.values[i])) {
      throw ModelError("context value " + std::to_string(context.values[i]) +
                       " outside the range of '" + model.exogenous()[i].name + "'");
    }
  }
}

inline World solve_unchecked(const CausalModel& model, const Context& context,
                             const Intervention& iv) {
  World w{std::vector<Value>(model.endogenous().size(), 0)};
  auto lookup = [&](VarRef r) {
    return r.kind == VarKind::exogenous ? context.values[r.index] : w.values[r.index];
  };
  for (std::size_t i : model.topological_order()) {
    w.values[i] = iv.fixed(i) ? iv.slots[i] : model.equation(i).eval(lookup);
  }
  return w;
}

inline void check_intervention(const CausalModel& model, const Assignment& setting) {
  for (auto [i, v] : setting.entries) {
    if (i >= model.endogenous().size()) throw ModelError("intervention on unknown variable");
    if (!model.endogenous()[i].in_range(v)) {
      throw ModelError("intervention value " + std::to_string(v) + " outside the range of '" +
                       model.endogenous()[i].name + "'");
    }
  }
}

}  // namespace detail

// Unique solution of the equations under `context`, in topological order.
inline World solve(const CausalModel& model, const Context& context) {
  detail::require_solvable(model, context);
  return detail::solve_unchecked(model, context, Intervention(model.endogenous().size()));
}

// Solution of M_{setting} without materialising the intervened model.
inline World solve(const CausalModel& model, const Context& context, const Assignment& setting) {
  detail::require_solvable(model, context);
  detail::check_intervention(model, setting);
  return detail::solve_unchecked(model, context,
                                 Intervention(model.endogenous().size(), setting));
}

// M_{X<-x}: targeted equations become constants; everything else is shared.
inline CausalModel intervene(const CausalModel& model, const Assignment& setting) {
  detail::check_intervention(model, setting);
  CausalModel out = model;
  for (auto [i, v] : setting.entries) out.equations_[i] = Expr::constant(v);
  if (out.valid()) {
    out.topo_.clear();
    out.compute_order();
  }
  return out;
}

// Name-based form; setting an exogenous variable is an error.
inline CausalModel intervene(const CausalModel& model,
                             const std::vector<std::pair<std::string, Value>>& setting) {
  std::vector<std::pair<std::size_t, Value>> entries;
  for (const auto& [name, v] : setting) entries.emplace_back(model.endogenous_index(name), v);
  return intervene(model, Assignment::from(std::move(entries)));
}

inline Context make_context(const CausalModel& model,
                            const std::vector<std::pair<std::string, Value>>& values) {
  Context ctx{std::vector<Value>(model.exogenous().size(), 0)};
  std::vector<bool> seen(ctx.values.size(), false);
  for (const auto& [name, v] : values) {
    auto r = model.find(name);
    if (!r || r->kind != VarKind::exogenous) {
      throw ModelError("'" + name + "' is not an exogenous variable");
    }
    if (!model.exogenous()[r->index].in_range(v)) {
      throw ModelError("context value " + std::to_string(v) + " outside the range of '" + name + "'");
    }
    if (seen[r->index]) throw ModelError("context sets '" + name + "' twice");
    seen[r->index] = true;
    ctx.values[r->index] = v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw ModelError("context does not set exogenous variable '" +
                       model.exogenous()[i].name + "'");
    }
  }
  return ctx;
}

inline World make_world(const CausalModel& model,
                        const std::vector<std::pair<std::string, Value>>& values) {
  World w{std::vector<Value>(model.endogenous().size(), 0)};
  std::vector<bool> seen(w.values.size(), false);
  for (const auto& [name, v] : values) {
    std::size_t i = model.endogenous_index(name);
    if (!model.endogenous()[i].in_range(v)) {
      throw ModelError("value " + std::to_string(v) + " outside the range of '" + name + "'");
    }
    if (seen[i]) throw ModelError("world sets '" + name + "' twice");
    seen[i] = true;
    w.values[i] = v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw ModelError("world omits '" + model.endogenous()[i].name + "'");
  }
  return w;
}

// Enumerates every context of the model in lexicographic range order.
inline std::vector<Context> all_contexts(const CausalModel& model) {
  std::vector<const std::vector<Value>*> ranges;
  for (const Variable& v : model.exogenous()) ranges.push_back(&v.range);
  std::vector<Context> out;
  detail::for_each_tuple(ranges, [&](const std::vector<Value>& vals) {
    out.push_back(Context{vals});
    return true;
  });
  return out;
}

inline std::string to_string(const CausalModel& model, const World& world) {
  std::string out = "(";
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (i) out += ", ";
    out += model.endogenous()[i].name + "=" + std::to_string(world[i]);
  }
  return out + ")";
}

inline bool satisfies_equations(const CausalModel& model, const Context& context,
                                const World& world) {
  auto lookup = [&](VarRef r) {
    return r.kind == VarKind::exogenous ? context.values[r.index] : world.values[r.index];
  };
  for (std::size_t i = 0; i < world.size(); ++i)
    if (model.equation(i).eval(lookup) != world[i]) return false;
  return true;
}

// Semantic dependence graph: an edge Y -> X when X's equation output changes
// with Y for some setting of X's other referenced variables.
struct DependenceGraph {
  std::vector<std::pair<VarRef, VarRef>> edges;  // (parent, child), sorted

  bool has_edge(VarRef from, VarRef to) const {
    return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
  }
};

inline DependenceGraph dependence_graph(const CausalModel& model) {
  if (!model.valid()) throw ModelError("dependence graph requires a valid model");
  DependenceGraph g;
  for (std::size_t x = 0; x < model.endogenous().size(); ++x) {
    const Expr& body = model.equation(x);
    std::vector<VarRef> refs = body.references();
    std::vector<const std::vector<Value>*> ranges;
    for (VarRef r : refs) ranges.push_back(&model.variable(r).range);
    for (std::size_t k = 0; k < refs.size(); ++k) {
      bool depends = false;
      detail::for_each_tuple(ranges, [&](const std::vector<Value>& vals) {
        auto eval_with = [&](Value yk) {
          return body.eval([&](VarRef r) {
            for (std::size_t j = 0; j < refs.size(); ++j)
              if (refs[j] == r) return j == k ? yk : vals[j];
            return Value{0};
          });
        };
        Value base = eval_with(vals[k]);
        for (Value alt : *ranges[k]) {
          if (eval_with(alt) != base) {
            depends = true;
            return false;
          }
        }
        return true;
      });
      if (depends) g.edges.emplace_back(refs[k], VarRef{VarKind::endogenous, x});
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

namespace detail {

struct SlotsHash {
  std::size_t operator()(const std::vector<Value>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Value x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

// Memoizing solver for one (model, context) pair, keyed by the full
// intervention.  Not thread-safe; create one per search.
class Solver {
 public:
  Solver(const CausalModel& model, Context context)
      : model_(&model), context_(std::move(context)) {
    detail::require_solvable(model, context_);
    actual_ = detail::solve_unchecked(model, context_, Intervention(model.endogenous().size()));
  }

  const CausalModel& model() const { return *model_; }
  const Context& context() const { return context_; }
  const World& actual() const { return actual_; }

  const World& solve(const Intervention& iv) {
    auto it = cache_.find(iv.slots);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(iv.slots, detail::solve_unchecked(*model_, context_, iv)).first->second;
  }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  const CausalModel* model_;
  Context context_;
  World actual_;
  std::unordered_map<std::vector<Value>, World, detail::SlotsHash> cache_;
};

}  // namespace actcause
