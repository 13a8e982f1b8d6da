#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace actcause {

using Value = int;

enum class VarKind { exogenous, endogenous };

// Index of a variable within its kind's declaration list.
struct VarRef {
  VarKind kind = VarKind::endogenous;
  std::size_t index = 0;

  friend bool operator==(const VarRef&, const VarRef&) = default;
  friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an expression cannot produce a value (missing table row,
// arithmetic overflow, unresolved reference).
class EvalError : public Error {
 public:
  using Error::Error;
};

// Immutable expression tree for structural equation bodies.  References
// carry the variable name and, once resolved against a model, its VarRef.
class Expr {
 public:
  enum class Op { constant, ref, min, max, add, sub, mul, ite, table };

  struct Table {
    std::vector<Expr> args;
    std::map<std::vector<Value>, Value> rows;
  };

  Expr() : Expr(constant(0)) {}

  static Expr constant(Value v) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    return Expr(std::move(n));
  }

  static Expr var(std::string name) {
    auto n = std::make_shared<Node>();
    n->op = Op::ref;
    n->name = std::move(name);
    return Expr(std::move(n));
  }

  static Expr var(std::string name, VarRef ref) {
    auto n = std::make_shared<Node>();
    n->op = Op::ref;
    n->name = std::move(name);
    n->ref = ref;
    n->resolved = true;
    return Expr(std::move(n));
  }

  static Expr nary(Op op, std::vector<Expr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->children = std::move(args);
    return Expr(std::move(n));
  }

  // ite(lhs == rhs, then, otherwise)
  static Expr ite(Expr lhs, Expr rhs, Expr then, Expr otherwise) {
    return nary(Op::ite, {std::move(lhs), std::move(rhs), std::move(then),
                          std::move(otherwise)});
  }

  static Expr table(std::vector<Expr> args,
                    std::map<std::vector<Value>, Value> rows) {
    auto n = std::make_shared<Node>();
    n->op = Op::table;
    n->table = std::make_shared<const Table>(
        Table{std::move(args), std::move(rows)});
    return Expr(std::move(n));
  }

  Op op() const { return node_->op; }
  Value value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  VarRef ref() const { return node_->ref; }
  bool resolved() const { return node_->resolved; }
  const std::vector<Expr>& children() const { return node_->children; }
  const Table& table_data() const { return *node_->table; }

  // `lookup` maps a VarRef to its current value.
  template <class Lookup>
  Value eval(const Lookup& lookup) const {
    const Node& n = *node_;
    switch (n.op) {
      case Op::constant:
        return n.value;
      case Op::ref:
        if (!n.resolved) throw EvalError("unresolved variable '" + n.name + "'");
        return lookup(n.ref);
      case Op::min:
      case Op::max: {
        Value best = n.children.front().eval(lookup);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          Value v = n.children[i].eval(lookup);
          best = n.op == Op::min ? std::min(best, v) : std::max(best, v);
        }
        return best;
      }
      case Op::add:
      case Op::sub:
      case Op::mul: {
        std::int64_t a = n.children[0].eval(lookup);
        std::int64_t b = n.children[1].eval(lookup);
        std::int64_t r = n.op == Op::add ? a + b : n.op == Op::sub ? a - b : a * b;
        if (r < std::numeric_limits<Value>::min() ||
            r > std::numeric_limits<Value>::max()) {
          throw EvalError("arithmetic overflow");
        }
        return static_cast<Value>(r);
      }
      case Op::ite:
        return n.children[0].eval(lookup) == n.children[1].eval(lookup)
                   ? n.children[2].eval(lookup)
                   : n.children[3].eval(lookup);
      case Op::table: {
        std::vector<Value> key;
        key.reserve(n.table->args.size());
        for (const Expr& a : n.table->args) key.push_back(a.eval(lookup));
        auto it = n.table->rows.find(key);
        if (it == n.table->rows.end()) {
          std::ostringstream os;
          os << "table has no row for (";
          for (std::size_t i = 0; i < key.size(); ++i) os << (i ? "," : "") << key[i];
          os << ")";
          throw EvalError(os.str());
        }
        return it->second;
      }
    }
    throw EvalError("corrupt expression");
  }

  // Distinct variable references in first-occurrence order.
  std::vector<VarRef> references() const {
    std::vector<VarRef> out;
    collect(out);
    return out;
  }

  std::vector<std::string> referenced_names() const {
    std::vector<std::string> out;
    collect_names(out);
    return out;
  }

  // Returns a copy with every reference bound by `resolve(name)`, which
  // returns std::optional<VarRef>.  Unknown names are appended to `unknown`.
  template <class Resolve>
  Expr resolve(const Resolve& resolve, std::vector<std::string>& unknown) const {
    const Node& n = *node_;
    switch (n.op) {
      case Op::constant:
        return *this;
      case Op::ref: {
        auto r = resolve(n.name);
        if (!r) {
          unknown.push_back(n.name);
          return var(n.name);
        }
        return var(n.name, *r);
      }
      case Op::table: {
        std::vector<Expr> args;
        for (const Expr& a : n.table->args) args.push_back(a.resolve(resolve, unknown));
        return table(std::move(args), n.table->rows);
      }
      default: {
        std::vector<Expr> kids;
        for (const Expr& c : n.children) kids.push_back(c.resolve(resolve, unknown));
        return nary(n.op, std::move(kids));
      }
    }
  }

  // Source form in the model DSL.
  std::string to_string() const {
    std::string out;
    print(out, 0);
    return out;
  }

 private:
  struct Node {
    Op op = Op::constant;
    Value value = 0;
    std::string name;
    VarRef ref;
    bool resolved = false;
    std::vector<Expr> children;
    std::shared_ptr<const Table> table;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  void collect(std::vector<VarRef>& out) const {
    const Node& n = *node_;
    if (n.op == Op::ref) {
      if (n.resolved && std::find(out.begin(), out.end(), n.ref) == out.end()) {
        out.push_back(n.ref);
      }
      return;
    }
    if (n.op == Op::table) {
      for (const Expr& a : n.table->args) a.collect(out);
      return;
    }
    for (const Expr& c : n.children) c.collect(out);
  }

  void collect_names(std::vector<std::string>& out) const {
    const Node& n = *node_;
    if (n.op == Op::ref) {
      if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
      return;
    }
    if (n.op == Op::table) {
      for (const Expr& a : n.table->args) a.collect_names(out);
      return;
    }
    for (const Expr& c : n.children) c.collect_names(out);
  }

  // Precedence: 1 = additive, 2 = multiplicative, 3 = atom.
  void print(std::string& out, int context) const {
    const Node& n = *node_;
    auto list = [&](const char* head, const std::vector<Expr>& xs) {
      out += head;
      out += '(';
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        xs[i].print(out, 0);
      }
      out += ')';
    };
    switch (n.op) {
      case Op::constant:
        if (n.value < 0 && context > 0) {
          out += "(" + std::to_string(n.value) + ")";
        } else {
          out += std::to_string(n.value);
        }
        return;
      case Op::ref:
        out += n.name;
        return;
      case Op::min:
        list("min", n.children);
        return;
      case Op::max:
        list("max", n.children);
        return;
      case Op::add:
      case Op::sub:
      case Op::mul: {
        int prec = n.op == Op::mul ? 2 : 1;
        bool paren = context > prec;
        if (paren) out += '(';
        n.children[0].print(out, prec);
        out += n.op == Op::add ? " + " : n.op == Op::sub ? " - " : " * ";
        // Left-associative: the right operand binds one level tighter.
        n.children[1].print(out, prec + 1);
        if (paren) out += ')';
        return;
      }
      case Op::ite:
        out += "ite(";
        n.children[0].print(out, 0);
        out += " == ";
        n.children[1].print(out, 0);
        out += ", ";
        n.children[2].print(out, 0);
        out += ", ";
        n.children[3].print(out, 0);
        out += ')';
        return;
      case Op::table: {
        list("table", n.table->args);
        out += '{';
        bool first = true;
        for (const auto& [key, v] : n.table->rows) {
          if (!first) out += ", ";
          first = false;
          out += '(';
          for (std::size_t i = 0; i < key.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(key[i]);
          }
          out += ")->" + std::to_string(v);
        }
        out += '}';
        return;
      }
    }
  }

  std::shared_ptr<const Node> node_;
};

namespace expr {

inline Expr lit(Value v) { return Expr::constant(v); }
inline Expr var(std::string name) { return Expr::var(std::move(name)); }
inline Expr min(Expr a, Expr b) { return Expr::nary(Expr::Op::min, {std::move(a), std::move(b)}); }
inline Expr max(Expr a, Expr b) { return Expr::nary(Expr::Op::max, {std::move(a), std::move(b)}); }
inline Expr add(Expr a, Expr b) { return Expr::nary(Expr::Op::add, {std::move(a), std::move(b)}); }
inline Expr sub(Expr a, Expr b) { return Expr::nary(Expr::Op::sub, {std::move(a), std::move(b)}); }
inline Expr mul(Expr a, Expr b) { return Expr::nary(Expr::Op::mul, {std::move(a), std::move(b)}); }

}  // namespace expr

}  // namespace actcause
