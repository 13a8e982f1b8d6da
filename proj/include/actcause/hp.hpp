#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "actcause/formula.hpp"
#include "actcause/model.hpp"

namespace actcause {

class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

struct SearchLimits {
  // Upper bound on (W, w, x') candidate triples per witness search.
  std::uint64_t max_candidates = std::uint64_t{1} << 24;
};

// Nonempty conjunction of primitive events over distinct variables, kept
// sorted by variable index.
class CandidateCause {
 public:
  explicit CandidateCause(std::vector<PrimitiveEvent> conjuncts) : conjuncts_(std::move(conjuncts)) {
    if (conjuncts_.empty()) throw FormulaError("a cause needs at least one conjunct");
    std::sort(conjuncts_.begin(), conjuncts_.end());
    for (std::size_t i = 1; i < conjuncts_.size(); ++i) {
      if (conjuncts_[i].var == conjuncts_[i - 1].var) {
        throw FormulaError("cause conjuncts must mention distinct variables");
      }
    }
  }
  CandidateCause(std::initializer_list<PrimitiveEvent> c)
      : CandidateCause(std::vector<PrimitiveEvent>(c)) {}

  std::span<const PrimitiveEvent> conjuncts() const { return conjuncts_; }
  std::size_t size() const { return conjuncts_.size(); }

  friend bool operator==(const CandidateCause&, const CandidateCause&) = default;

 private:
  std::vector<PrimitiveEvent> conjuncts_;
};

inline std::string to_string(const CausalModel& model, const CandidateCause& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += " & ";
    out += to_string(model, c.conjuncts()[i]);
  }
  return out;
}

struct WitnessRecord {
  std::vector<std::size_t> w_set;  // ascending endogenous indices
  std::vector<Value> w_values;     // parallel to w_set
  std::vector<Value> x_prime;      // parallel to the cause's conjuncts
  World world;                     // solution under X <- x', W <- w

  friend bool operator==(const WitnessRecord&, const WitnessRecord&) = default;
};

struct WitnessList {
  bool ac1 = false;
  std::vector<WitnessRecord> records;
};

// Accepts or rejects a witness world; an empty filter accepts everything.
using WorldFilter = std::function<bool(const World&)>;

enum class Clause { none, ac1, ac2, ac3 };

inline const char* to_string(Clause c) {
  switch (c) {
    case Clause::none: return "none";
    case Clause::ac1: return "AC1";
    case Clause::ac2: return "AC2";
    case Clause::ac3: return "AC3";
  }
  return "?";
}

struct CauseVerdict {
  CauseVerdict(CandidateCause c, BooleanFormula f) : cause(std::move(c)), effect(std::move(f)) {}

  CandidateCause cause;
  BooleanFormula effect;
  bool ac1 = false;
  std::vector<WitnessRecord> hp_witnesses;
  std::vector<WitnessRecord> admissible_witnesses;
  bool ac3_hp = false;
  bool ac3_extended = false;
  bool is_cause_hp = false;
  bool is_cause_extended = false;
  Clause failed_hp = Clause::none;
  Clause failed_extended = Clause::none;
  // Maximal admissible witness worlds, duplicates collapsed, in order of
  // first appearance among the witnesses.
  std::vector<World> best_witnesses;
};

// Witness search for one (model, context).  Solutions are memoized across
// calls, so reuse one instance for many queries against the same context.
class CauseSearch {
 public:
  CauseSearch(const CausalModel& model, const Context& context, SearchLimits limits = {})
      : solver_(model, context), limits_(limits) {}

  const CausalModel& model() const { return solver_.model(); }
  const World& actual() const { return solver_.actual(); }
  const SearchLimits& limits() const { return limits_; }

  // Number of (W, w, x') triples an exhaustive search would visit,
  // saturating at uint64 max.
  std::uint64_t candidate_count(std::span<const PrimitiveEvent> cause) const {
    if (cause.empty()) return 0;
    const auto endo = model().endogenous();
    auto sat_mul = [](std::uint64_t a, std::uint64_t b) {
      if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
      }
      return a * b;
    };
    std::uint64_t xs = 1;
    for (const auto& e : cause) xs = sat_mul(xs, endo[e.var].range.size());
    std::uint64_t ws = 1;
    for (std::size_t v = 0; v < endo.size(); ++v) {
      if (!in_cause(cause, v)) ws = sat_mul(ws, endo[v].range.size() + 1);
    }
    return sat_mul(ws, xs - 1);
  }

  bool ac1(std::span<const PrimitiveEvent> cause, const BooleanFormula& phi) const {
    for (const auto& e : cause)
      if (actual()[e.var] != e.value) return false;
    return phi.eval(actual());
  }

  // AC2(a) and AC2(b) for one explicit choice of W, w and x'.
  bool ac2(std::span<const PrimitiveEvent> cause, const BooleanFormula& phi,
           std::span<const std::size_t> w_set, std::span<const Value> w_values,
           std::span<const Value> x_prime) {
    check_settings(cause, w_set, w_values, x_prime);
    const std::size_t n = model().endogenous().size();
    Intervention iv(n);
    for (std::size_t i = 0; i < cause.size(); ++i) iv.set(cause[i].var, x_prime[i]);
    for (std::size_t i = 0; i < w_set.size(); ++i) iv.set(w_set[i], w_values[i]);
    if (phi.eval(solver_.solve(iv))) return false;
    std::vector<Value> target = actual().values;
    for (std::size_t i = 0; i < w_set.size(); ++i) target[w_set[i]] = w_values[i];
    return ac2b(cause, phi, target);
  }

  // Every (W, w, x') passing AC2 whose witness world passes `filter`, in
  // search order: |W| ascending, then W lexicographically, then w, then x'.
  // Stops after `limit` records.
  WitnessList witnesses(std::span<const PrimitiveEvent> cause, const BooleanFormula& phi,
                        const WorldFilter& filter = {},
                        std::size_t limit = std::numeric_limits<std::size_t>::max()) {
    WitnessList out;
    out.ac1 = ac1(cause, phi);
    if (!out.ac1 || cause.empty()) return out;
    std::uint64_t count = candidate_count(cause);
    if (count > limits_.max_candidates) {
      throw ResourceLimitError("witness search needs " + std::to_string(count) +
                               " candidate settings, above the cap of " +
                               std::to_string(limits_.max_candidates));
    }

    const auto endo = model().endogenous();
    const std::size_t n = endo.size();
    std::vector<std::size_t> free_vars;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_cause(cause, v)) free_vars.push_back(v);

    std::vector<const std::vector<Value>*> x_ranges;
    for (const auto& e : cause) x_ranges.push_back(&endo[e.var].range);
    std::vector<std::vector<Value>> x_primes;
    detail::for_each_tuple(x_ranges, [&](const std::vector<Value>& xs) {
      for (std::size_t i = 0; i < cause.size(); ++i) {
        if (xs[i] != cause[i].value) {
          x_primes.push_back(xs);
          break;
        }
      }
      return true;
    });

    std::unordered_map<std::vector<Value>, bool, detail::SlotsHash> ac2b_cache;
    Intervention iv(n);
    const std::size_t m = free_vars.size();
    std::vector<std::size_t> pick;
    for (std::size_t k = 0; k <= m; ++k) {
      // Lexicographic k-combinations of free_vars.
      pick.resize(k);
      for (std::size_t i = 0; i < k; ++i) pick[i] = i;
      while (true) {
        std::vector<std::size_t> w_set(k);
        std::vector<const std::vector<Value>*> w_ranges(k);
        for (std::size_t i = 0; i < k; ++i) {
          w_set[i] = free_vars[pick[i]];
          w_ranges[i] = &endo[w_set[i]].range;
        }
        bool stop = false;
        detail::for_each_tuple(w_ranges, [&](const std::vector<Value>& w_values) {
          std::vector<Value> target;
          bool target_known = false;
          bool target_ok = false;
          for (const auto& xp : x_primes) {
            iv = Intervention(n);
            for (std::size_t i = 0; i < cause.size(); ++i) iv.set(cause[i].var, xp[i]);
            for (std::size_t i = 0; i < k; ++i) iv.set(w_set[i], w_values[i]);
            const World& world = solver_.solve(iv);
            if (phi.eval(world)) continue;
            if (!target_known) {
              target = actual().values;
              for (std::size_t i = 0; i < k; ++i) target[w_set[i]] = w_values[i];
              auto it = ac2b_cache.find(target);
              if (it == ac2b_cache.end()) {
                it = ac2b_cache.emplace(target, ac2b(cause, phi, target)).first;
              }
              target_ok = it->second;
              target_known = true;
            }
            if (!target_ok) break;
            if (filter && !filter(world)) continue;
            out.records.push_back(WitnessRecord{w_set, w_values, xp, world});
            if (out.records.size() >= limit) {
              stop = true;
              return false;
            }
          }
          return true;
        });
        if (stop) return out;
        if (!next_combination(pick, m)) break;
      }
    }
    return out;
  }

  // AC3: no strict nonempty sub-conjunction has a witness passing `filter`.
  bool ac3(std::span<const PrimitiveEvent> cause, const BooleanFormula& phi,
           const WorldFilter& filter = {}) {
    const std::size_t k = cause.size();
    if (k <= 1) return true;
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << k); ++mask) {
      std::vector<PrimitiveEvent> sub;
      for (std::size_t i = 0; i < k; ++i)
        if (mask & (std::uint64_t{1} << i)) sub.push_back(cause[i]);
      if (!witnesses(sub, phi, filter, 1).records.empty()) return false;
    }
    return true;
  }

 private:
  static bool in_cause(std::span<const PrimitiveEvent> cause, std::size_t v) {
    for (const auto& e : cause)
      if (e.var == v) return true;
    return false;
  }

  static bool next_combination(std::vector<std::size_t>& pick, std::size_t m) {
    const std::size_t k = pick.size();
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (pick[i] < m - k + i) {
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        return true;
      }
    }
    return false;
  }

  // AC2(b) for a target vector t: for every subset S of V \ X,
  // [X <- x, S <- t|S] phi.  t is the actual world overwritten by w on W.
  bool ac2b(std::span<const PrimitiveEvent> cause, const BooleanFormula& phi,
            const std::vector<Value>& target) {
    const std::size_t n = model().endogenous().size();
    std::vector<std::size_t> free_vars;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_cause(cause, v)) free_vars.push_back(v);
    const std::size_t m = free_vars.size();
    if (m >= 63) throw ResourceLimitError("too many variables for AC2(b) subset check");
    Intervention iv(n);
    for (const auto& e : cause) iv.set(e.var, e.value);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      for (std::size_t i = 0; i < m; ++i) {
        if (mask & (std::uint64_t{1} << i)) {
          iv.set(free_vars[i], target[free_vars[i]]);
        } else {
          iv.clear(free_vars[i]);
        }
      }
      if (!phi.eval(solver_.solve(iv))) return false;
    }
    return true;
  }

  void check_settings(std::span<const PrimitiveEvent> cause, std::span<const std::size_t> w_set,
                      std::span<const Value> w_values, std::span<const Value> x_prime) const {
    const auto endo = model().endogenous();
    if (w_set.size() != w_values.size()) throw FormulaError("W and w differ in length");
    if (x_prime.size() != cause.size()) throw FormulaError("x' does not match the cause");
    for (std::size_t i = 0; i < w_set.size(); ++i) {
      if (w_set[i] >= endo.size()) throw FormulaError("W mentions an unknown variable");
      if (in_cause(cause, w_set[i])) throw FormulaError("W must be disjoint from the cause");
      for (std::size_t j = 0; j < i; ++j)
        if (w_set[j] == w_set[i]) throw FormulaError("W repeats a variable");
      if (!endo[w_set[i]].in_range(w_values[i])) throw FormulaError("w value out of range");
    }
    bool differs = false;
    for (std::size_t i = 0; i < cause.size(); ++i) {
      if (!endo[cause[i].var].in_range(x_prime[i])) throw FormulaError("x' value out of range");
      differs |= x_prime[i] != cause[i].value;
    }
    if (!differs) throw FormulaError("x' must differ from the cause's values");
  }

  Solver solver_;
  SearchLimits limits_;
};

inline bool check_ac1(const CausalModel& model, const Context& context, const CandidateCause& cause,
                      const BooleanFormula& phi) {
  return CauseSearch(model, context).ac1(cause.conjuncts(), phi);
}

inline bool check_ac2(const CausalModel& model, const Context& context, const CandidateCause& cause,
                      const BooleanFormula& phi, std::span<const std::size_t> w_set,
                      std::span<const Value> w_values, std::span<const Value> x_prime) {
  return CauseSearch(model, context).ac2(cause.conjuncts(), phi, w_set, w_values, x_prime);
}

inline WitnessList enumerate_witnesses(const CausalModel& model, const Context& context,
                                       std::span<const PrimitiveEvent> cause,
                                       const BooleanFormula& phi, SearchLimits limits = {}) {
  return CauseSearch(model, context, limits).witnesses(cause, phi);
}

inline WitnessList enumerate_witnesses(const CausalModel& model, const Context& context,
                                       const CandidateCause& cause, const BooleanFormula& phi,
                                       SearchLimits limits = {}) {
  return enumerate_witnesses(model, context, cause.conjuncts(), phi, limits);
}

namespace detail {

inline std::vector<World> distinct_worlds(const std::vector<WitnessRecord>& records) {
  std::vector<World> out;
  for (const auto& r : records)
    if (std::find(out.begin(), out.end(), r.world) == out.end()) out.push_back(r.world);
  return out;
}

}  // namespace detail

// Plain HP verdict.  With no normality order every witness is admissible,
// so the extended fields mirror the plain ones.
inline CauseVerdict is_actual_cause(CauseSearch& search, const CandidateCause& cause,
                                    const BooleanFormula& phi) {
  CauseVerdict v(cause, phi);
  WitnessList wl = search.witnesses(cause.conjuncts(), phi);
  v.ac1 = wl.ac1;
  v.hp_witnesses = std::move(wl.records);
  v.admissible_witnesses = v.hp_witnesses;
  if (!v.ac1) {
    v.failed_hp = Clause::ac1;
  } else if (v.hp_witnesses.empty()) {
    v.failed_hp = Clause::ac2;
  } else {
    v.ac3_hp = search.ac3(cause.conjuncts(), phi);
    if (!v.ac3_hp) v.failed_hp = Clause::ac3;
  }
  v.is_cause_hp = v.failed_hp == Clause::none;
  v.ac3_extended = v.ac3_hp;
  v.is_cause_extended = v.is_cause_hp;
  v.failed_extended = v.failed_hp;
  v.best_witnesses = detail::distinct_worlds(v.admissible_witnesses);
  return v;
}

inline CauseVerdict is_actual_cause(const CausalModel& model, const Context& context,
                                    const CandidateCause& cause, const BooleanFormula& phi,
                                    SearchLimits limits = {}) {
  CauseSearch search(model, context, limits);
  return is_actual_cause(search, cause, phi);
}

// Calls fn(cause) for every conjunction of at most `max_conjuncts` actual
// values, ordered by size then by variable indices.  Only actual values can
// pass AC1, so no other candidates are worth checking.
template <class Fn>
void for_each_actual_conjunction(const World& actual, std::size_t max_conjuncts, Fn&& fn) {
  const std::size_t n = actual.size();
  for (std::size_t k = 1; k <= std::min(max_conjuncts, n); ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<PrimitiveEvent> conj;
      for (std::size_t i : pick) conj.push_back({i, actual[i]});
      fn(CandidateCause(std::move(conj)));
      std::size_t i = k;
      bool more = false;
      while (i > 0) {
        --i;
        if (pick[i] < n - k + i) {
          ++pick[i];
          for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
          more = true;
          break;
        }
      }
      if (!more) break;
    }
  }
}

// Every plain-HP cause of phi with at most `max_conjuncts` conjuncts.
inline std::vector<CandidateCause> find_all_causes(const CausalModel& model, const Context& context,
                                                   const BooleanFormula& phi,
                                                   std::size_t max_conjuncts,
                                                   SearchLimits limits = {}) {
  if (max_conjuncts < 1) throw FormulaError("max_conjuncts must be at least 1");
  CauseSearch search(model, context, limits);
  std::vector<CandidateCause> out;
  for_each_actual_conjunction(search.actual(), max_conjuncts, [&](const CandidateCause& c) {
    if (is_actual_cause(search, c, phi).is_cause_hp) out.push_back(c);
  });
  return out;
}

}  // namespace actcause
