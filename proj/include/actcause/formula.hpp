#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "actcause/model.hpp"

namespace actcause {

class FormulaError : public Error {
 public:
  using Error::Error;
};

// X = x for an endogenous X.
struct PrimitiveEvent {
  std::size_t var = 0;
  Value value = 0;

  friend auto operator<=>(const PrimitiveEvent&, const PrimitiveEvent&) = default;
};

inline PrimitiveEvent make_event(const CausalModel& model, std::string_view name, Value v) {
  auto r = model.find(name);
  if (!r) throw FormulaError("unknown variable '" + std::string(name) + "'");
  if (r->kind != VarKind::endogenous) {
    throw FormulaError("primitive events range over endogenous variables; '" +
                       std::string(name) + "' is exogenous");
  }
  if (!model.endogenous()[r->index].in_range(v)) {
    throw FormulaError("value " + std::to_string(v) + " outside the range of '" +
                       std::string(name) + "'");
  }
  return {r->index, v};
}

// Boolean combination of primitive events.
class BooleanFormula {
 public:
  enum class Op { event, negation, conjunction, disjunction };

  BooleanFormula() : BooleanFormula(event({})) {}

  static BooleanFormula event(PrimitiveEvent e) {
    auto n = std::make_shared<Node>();
    n->op = Op::event;
    n->event = e;
    return BooleanFormula(std::move(n));
  }
  static BooleanFormula negation(BooleanFormula f) {
    auto n = std::make_shared<Node>();
    n->op = Op::negation;
    n->kids = {std::move(f)};
    return BooleanFormula(std::move(n));
  }
  static BooleanFormula conjunction(BooleanFormula a, BooleanFormula b) {
    return binary(Op::conjunction, std::move(a), std::move(b));
  }
  static BooleanFormula disjunction(BooleanFormula a, BooleanFormula b) {
    return binary(Op::disjunction, std::move(a), std::move(b));
  }

  Op op() const { return node_->op; }
  const PrimitiveEvent& primitive() const { return node_->event; }
  const std::vector<BooleanFormula>& operands() const { return node_->kids; }

  bool eval(const World& w) const {
    const Node& n = *node_;
    switch (n.op) {
      case Op::event:
        return w[n.event.var] == n.event.value;
      case Op::negation:
        return !n.kids[0].eval(w);
      case Op::conjunction:
        return n.kids[0].eval(w) && n.kids[1].eval(w);
      case Op::disjunction:
        return n.kids[0].eval(w) || n.kids[1].eval(w);
    }
    return false;
  }

  // Distinct endogenous variables mentioned, ascending.
  std::vector<std::size_t> variables() const {
    std::vector<std::size_t> out;
    visit([&](const PrimitiveEvent& e) { out.push_back(e.var); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  template <class Fn>
  void visit(Fn&& fn) const {
    if (node_->op == Op::event) {
      fn(node_->event);
      return;
    }
    for (const auto& k : node_->kids) k.visit(fn);
  }

 private:
  struct Node {
    Op op = Op::event;
    PrimitiveEvent event;
    std::vector<BooleanFormula> kids;
  };

  explicit BooleanFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static BooleanFormula binary(Op op, BooleanFormula a, BooleanFormula b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->kids = {std::move(a), std::move(b)};
    return BooleanFormula(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

// [Y1 <- y1, ..., Yk <- yk] body.  k = 0 is allowed.
struct CausalFormula {
  Assignment interventions;
  BooleanFormula body;
};

inline void check_well_formed(const CausalModel& model, const BooleanFormula& f) {
  f.visit([&](const PrimitiveEvent& e) {
    if (e.var >= model.endogenous().size()) throw FormulaError("formula references unknown variable");
    if (!model.endogenous()[e.var].in_range(e.value)) {
      throw FormulaError("value " + std::to_string(e.value) + " outside the range of '" +
                         model.endogenous()[e.var].name + "'");
    }
  });
}

inline void check_well_formed(const CausalModel& model, const CausalFormula& f) {
  for (std::size_t i = 1; i < f.interventions.entries.size(); ++i) {
    if (f.interventions.entries[i].first == f.interventions.entries[i - 1].first) {
      throw FormulaError("intervention variables must be distinct");
    }
  }
  for (auto [i, v] : f.interventions.entries) {
    if (i >= model.endogenous().size()) throw FormulaError("intervention on unknown variable");
    if (!model.endogenous()[i].in_range(v)) {
      throw FormulaError("intervention value " + std::to_string(v) + " outside the range of '" +
                         model.endogenous()[i].name + "'");
    }
  }
  check_well_formed(model, f.body);
}

// (M, u) |= [Y <- y] phi
inline bool satisfies(const CausalModel& model, const Context& context, const CausalFormula& f) {
  check_well_formed(model, f);
  return f.body.eval(solve(model, context, f.interventions));
}

inline bool satisfies(const CausalModel& model, const Context& context, const BooleanFormula& f) {
  return satisfies(model, context, CausalFormula{{}, f});
}

inline std::string to_string(const CausalModel& model, const PrimitiveEvent& e) {
  return model.endogenous()[e.var].name + "=" + std::to_string(e.value);
}

namespace detail {

// Precedence: 1 = |, 2 = &, 3 = unary/atom.
inline void print_formula(const CausalModel& model, const BooleanFormula& f, int context,
                          std::string& out) {
  switch (f.op()) {
    case BooleanFormula::Op::event:
      out += to_string(model, f.primitive());
      return;
    case BooleanFormula::Op::negation:
      out += '!';
      print_formula(model, f.operands()[0], 3, out);
      return;
    case BooleanFormula::Op::conjunction:
    case BooleanFormula::Op::disjunction: {
      int prec = f.op() == BooleanFormula::Op::conjunction ? 2 : 1;
      bool paren = context > prec;
      if (paren) out += '(';
      print_formula(model, f.operands()[0], prec, out);
      out += prec == 2 ? " & " : " | ";
      print_formula(model, f.operands()[1], prec + 1, out);
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace detail

inline std::string to_string(const CausalModel& model, const BooleanFormula& f) {
  std::string out;
  detail::print_formula(model, f, 0, out);
  return out;
}

inline std::string to_string(const CausalModel& model, const CausalFormula& f) {
  std::string out = "[";
  for (std::size_t i = 0; i < f.interventions.entries.size(); ++i) {
    auto [v, x] = f.interventions.entries[i];
    if (i) out += ", ";
    out += model.endogenous()[v].name + "<-" + std::to_string(x);
  }
  out += "](";
  out += to_string(model, f.body);
  return out + ")";
}

}  // namespace actcause
