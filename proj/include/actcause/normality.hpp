#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "actcause/model.hpp"

namespace actcause {

enum class Normality { more_normal, less_normal, equally_normal, incomparable };

inline const char* to_string(Normality n) {
  switch (n) {
    case Normality::more_normal: return "more_normal";
    case Normality::less_normal: return "less_normal";
    case Normality::equally_normal: return "equally_normal";
    case Normality::incomparable: return "incomparable";
  }
  return "?";
}

inline Normality reverse(Normality n) {
  if (n == Normality::more_normal) return Normality::less_normal;
  if (n == Normality::less_normal) return Normality::more_normal;
  return n;
}

class NormalityError : public Error {
 public:
  using Error::Error;
};

// Stated order edges that contradict each other.  `cycle` lists worlds
// w0, w1, ..., wk = w0 with each at least as normal as the next and at least
// one step stated strictly.
class InconsistentOrder : public NormalityError {
 public:
  InconsistentOrder(std::string what, std::vector<World> cycle)
      : NormalityError(std::move(what)), cycle(std::move(cycle)) {}
  std::vector<World> cycle;
};

struct Behavior {
  std::string label;
  Expr body;  // references resolved against the model; endogenous only
};

struct TypicalitySpec {
  // Values of an endogenous variable from most to least typical; a
  // permutation of its range.  Variables left out carry no typicality.
  std::map<std::size_t, std::vector<Value>> typical;
  // Chains of (variable, value) from least to most severe.
  std::vector<std::vector<std::pair<std::size_t, Value>>> severity;
  bool mechanism = false;
  // Behaviors of an endogenous variable from most to least typical.
  std::map<std::size_t, std::vector<Behavior>> behaviors;
};

// An atypical trait of a world: a non-top value rank, or a non-top behavior
// rank when mechanism mode is on.
struct Feature {
  enum class Kind { value, behavior };
  Kind kind = Kind::value;
  std::size_t var = 0;
  std::size_t rank = 0;

  friend auto operator<=>(const Feature&, const Feature&) = default;
};

struct OrderStatement {
  World lhs;
  World rhs;
  bool strict = true;  // lhs > rhs; otherwise lhs == rhs
};

class NormalityOrder {
 public:
  enum class Kind { trivial, explicit_edges, derived };

  NormalityOrder() = default;

  static NormalityOrder trivial() { return NormalityOrder(); }

  static NormalityOrder explicit_order(const std::vector<OrderStatement>& stmts) {
    NormalityOrder o;
    o.kind_ = Kind::explicit_edges;
    auto index_of = [&](const World& w) {
      auto it = std::find(o.worlds_.begin(), o.worlds_.end(), w);
      if (it != o.worlds_.end()) return static_cast<std::size_t>(it - o.worlds_.begin());
      o.worlds_.push_back(w);
      return o.worlds_.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> ge;
    std::vector<std::pair<std::size_t, std::size_t>> strict;
    for (const auto& s : stmts) {
      std::size_t a = index_of(s.lhs);
      std::size_t b = index_of(s.rhs);
      ge.emplace_back(a, b);
      if (s.strict) {
        strict.emplace_back(a, b);
      } else {
        ge.emplace_back(b, a);
      }
    }
    for (const auto& w : o.worlds_) {
      if (w.size() != o.worlds_.front().size()) throw NormalityError("normality statements mix worlds of different sizes");
    }
    if (!o.worlds_.empty()) o.arity_ = o.worlds_.front().size();
    const std::size_t n = o.worlds_.size();
    // next[i][j]: successor of i on some ge-path to j, for cycle reporting.
    std::vector<std::vector<std::size_t>> next(n, std::vector<std::size_t>(n, n));
    o.ge_.assign(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      o.ge_[i][i] = 1;
      next[i][i] = i;
    }
    for (auto [a, b] : ge) {
      if (!o.ge_[a][b]) {
        o.ge_[a][b] = 1;
        next[a][b] = b;
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (o.ge_[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (o.ge_[k][j] && !o.ge_[i][j]) {
              o.ge_[i][j] = 1;
              next[i][j] = next[i][k];
            }
    for (auto [a, b] : strict) {
      if (a == b || o.ge_[b][a]) {
        std::vector<World> cycle{o.worlds_[a]};
        for (std::size_t at = b; at != a; at = next[at][a]) cycle.push_back(o.worlds_[at]);
        cycle.push_back(o.worlds_[a]);
        throw InconsistentOrder("normality statements contradict each other", std::move(cycle));
      }
    }
    return o;
  }

  static NormalityOrder derived(const CausalModel& model, TypicalitySpec spec) {
    validate(model, spec);
    NormalityOrder o;
    o.kind_ = Kind::derived;
    // Feature universe.
    for (const auto& [var, vals] : spec.typical)
      for (std::size_t r = 1; r < vals.size(); ++r)
        o.universe_.push_back({Feature::Kind::value, var, r});
    if (spec.mechanism) {
      for (const auto& [var, bs] : spec.behaviors)
        for (std::size_t r = 1; r < bs.size(); ++r)
          o.universe_.push_back({Feature::Kind::behavior, var, r});
    }
    std::sort(o.universe_.begin(), o.universe_.end());
    const std::size_t n = o.universe_.size();
    o.leq_.assign(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Feature& f = o.universe_[i];
        const Feature& g = o.universe_[j];
        if (f.kind == g.kind && f.var == g.var && f.rank <= g.rank) o.leq_[i][j] = 1;
      }
    for (const auto& chain : spec.severity) {
      for (std::size_t k = 1; k < chain.size(); ++k) {
        std::size_t a = o.feature_id(value_feature(spec, chain[k - 1]));
        std::size_t b = o.feature_id(value_feature(spec, chain[k]));
        o.leq_[a][b] = 1;
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (o.leq_[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (o.leq_[k][j]) o.leq_[i][j] = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (o.leq_[i][j] && o.leq_[j][i]) {
          throw NormalityError("severity ranking makes " + describe(model, o.universe_[i], spec) +
                               " and " + describe(model, o.universe_[j], spec) +
                               " equally severe");
        }
    o.spec_ = std::move(spec);
    o.arity_ = model.endogenous().size();
    return o;
  }

  Kind kind() const { return kind_; }
  const TypicalitySpec& spec() const { return spec_; }

  // Atypical traits of `w`, sorted.  Empty unless the order is derived.
  std::vector<Feature> features(const World& w) const {
    std::vector<Feature> out;
    if (kind_ != Kind::derived) return out;
    for (const auto& [var, vals] : spec_.typical) {
      std::size_t r = static_cast<std::size_t>(std::find(vals.begin(), vals.end(), w[var]) - vals.begin());
      if (r > 0) out.push_back({Feature::Kind::value, var, r});
    }
    if (spec_.mechanism) {
      auto lookup = [&](VarRef ref) { return w[ref.index]; };
      for (const auto& [var, bs] : spec_.behaviors) {
        std::size_t r = 0;
        while (r < bs.size() && bs[r].body.eval(lookup) != w[var]) ++r;
        if (r == bs.size()) {
          throw NormalityError("no declared behavior of variable #" + std::to_string(var) +
                               " matches value " + std::to_string(w[var]));
        }
        if (r > 0) out.push_back({Feature::Kind::behavior, var, r});
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // s is at least as normal as t.
  bool at_least_as_normal(const World& s, const World& t) const {
    if (s.size() != t.size() || (arity_ && s.size() != *arity_)) {
      throw NormalityError("compared worlds do not match the order's variables");
    }
    switch (kind_) {
      case Kind::trivial:
        return true;
      case Kind::explicit_edges: {
        if (s == t) return true;
        auto a = find_world(s);
        auto b = find_world(t);
        return a && b && ge_[*a][*b];
      }
      case Kind::derived:
        return covers(features(s), features(t));
    }
    return false;
  }

  Normality compare(const World& s, const World& t) const {
    bool st = at_least_as_normal(s, t);
    bool ts = at_least_as_normal(t, s);
    if (st && ts) return Normality::equally_normal;
    if (st) return Normality::more_normal;
    if (ts) return Normality::less_normal;
    return Normality::incomparable;
  }

  // f is no more severe than g.
  bool feature_leq(const Feature& f, const Feature& g) const {
    return leq_[feature_id(f)][feature_id(g)];
  }

  // Each feature of `fs` maps to a distinct feature of `gs` at least as
  // severe.
  bool covers(const std::vector<Feature>& fs, const std::vector<Feature>& gs) const {
    if (fs.size() > gs.size()) return false;
    std::vector<std::size_t> fid, gid;
    for (const auto& f : fs) fid.push_back(feature_id(f));
    for (const auto& g : gs) gid.push_back(feature_id(g));
    std::vector<std::size_t> match(gs.size(), fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      std::vector<char> seen(gs.size(), 0);
      if (!augment(i, fid, gid, match, seen)) return false;
    }
    return true;
  }

  static std::string describe(const CausalModel& model, const Feature& f, const TypicalitySpec& spec) {
    const std::string& name = model.endogenous()[f.var].name;
    if (f.kind == Feature::Kind::value) {
      return name + "=" + std::to_string(spec.typical.at(f.var)[f.rank]);
    }
    return name + ":\"" + spec.behaviors.at(f.var)[f.rank].label + "\"";
  }

 private:
  static Feature value_feature(const TypicalitySpec& spec, std::pair<std::size_t, Value> p) {
    const auto& vals = spec.typical.at(p.first);
    std::size_t r = static_cast<std::size_t>(std::find(vals.begin(), vals.end(), p.second) - vals.begin());
    return {Feature::Kind::value, p.first, r};
  }

  static void validate(const CausalModel& model, const TypicalitySpec& spec) {
    const auto endo = model.endogenous();
    for (const auto& [var, vals] : spec.typical) {
      if (var >= endo.size()) throw NormalityError("typicality for unknown variable");
      auto a = vals;
      auto b = endo[var].range;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) {
        throw NormalityError("typicality ranking of '" + endo[var].name +
                             "' must list each value of its range exactly once");
      }
    }
    for (const auto& chain : spec.severity) {
      for (auto [var, v] : chain) {
        if (var >= endo.size()) throw NormalityError("severity for unknown variable");
        auto it = spec.typical.find(var);
        if (it == spec.typical.end()) {
          throw NormalityError("severity mentions '" + endo[var].name + "', which has no typicality ranking");
        }
        if (!endo[var].in_range(v)) {
          throw NormalityError("severity value " + std::to_string(v) + " outside the range of '" +
                               endo[var].name + "'");
        }
        if (it->second.front() == v) {
          throw NormalityError("severity mentions the most typical value of '" + endo[var].name + "'");
        }
      }
    }
    for (const auto& [var, bs] : spec.behaviors) {
      if (var >= endo.size()) throw NormalityError("behaviors for unknown variable");
      if (bs.empty()) throw NormalityError("'" + endo[var].name + "' lists no behaviors");
      for (const auto& b : bs) {
        for (VarRef r : b.body.references()) {
          if (r.kind != VarKind::endogenous) {
            throw NormalityError("behavior \"" + b.label + "\" of '" + endo[var].name +
                                 "' may only read endogenous variables");
          }
        }
        if (b.body.references().size() != b.body.referenced_names().size()) {
          throw NormalityError("behavior \"" + b.label + "\" has unresolved references");
        }
      }
    }
  }

  std::size_t feature_id(const Feature& f) const {
    auto it = std::lower_bound(universe_.begin(), universe_.end(), f);
    if (it == universe_.end() || *it != f) throw NormalityError("feature outside the order");
    return static_cast<std::size_t>(it - universe_.begin());
  }

  bool augment(std::size_t i, const std::vector<std::size_t>& fid, const std::vector<std::size_t>& gid,
               std::vector<std::size_t>& match, std::vector<char>& seen) const {
    for (std::size_t j = 0; j < gid.size(); ++j) {
      if (seen[j] || !leq_[fid[i]][gid[j]]) continue;
      seen[j] = 1;
      if (match[j] == fid.size() || augment(match[j], fid, gid, match, seen)) {
        match[j] = i;
        return true;
      }
    }
    return false;
  }

  std::optional<std::size_t> find_world(const World& w) const {
    auto it = std::find(worlds_.begin(), worlds_.end(), w);
    if (it == worlds_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - worlds_.begin());
  }

  Kind kind_ = Kind::trivial;
  std::optional<std::size_t> arity_;
  // explicit
  std::vector<World> worlds_;
  std::vector<std::vector<char>> ge_;
  // derived
  TypicalitySpec spec_;
  std::vector<Feature> universe_;
  std::vector<std::vector<char>> leq_;
};

inline NormalityOrder derive_from_typicality(const CausalModel& model, TypicalitySpec spec) {
  return NormalityOrder::derived(model, std::move(spec));
}

// Label of the most typical behavior of `var` consistent with `w`.
inline std::string assign_behavior(const NormalityOrder& order, const World& w, std::size_t var) {
  auto it = order.spec().behaviors.find(var);
  if (it == order.spec().behaviors.end()) throw NormalityError("variable has no declared behaviors");
  auto lookup = [&](VarRef ref) { return w[ref.index]; };
  for (const auto& b : it->second)
    if (b.body.eval(lookup) == w[var]) return b.label;
  throw NormalityError("no declared behavior matches the world");
}

}  // namespace actcause
