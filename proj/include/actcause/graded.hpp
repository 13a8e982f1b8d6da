#pragma once

#include <utility>
#include <vector>

#include "actcause/hp.hpp"
#include "actcause/normality.hpp"

namespace actcause {

struct ExtendedCausalModel {
  CausalModel model;
  NormalityOrder order;
};

// Worlds from `worlds` not strictly dominated by another, duplicates
// collapsed, in order of first appearance.
inline std::vector<World> best_witnesses(const NormalityOrder& order, const std::vector<World>& worlds) {
  std::vector<World> distinct;
  for (const auto& w : worlds)
    if (std::find(distinct.begin(), distinct.end(), w) == distinct.end()) distinct.push_back(w);
  std::vector<World> out;
  for (const auto& w : distinct) {
    bool dominated = false;
    for (const auto& other : distinct) {
      if (order.compare(other, w) == Normality::more_normal) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(w);
  }
  return out;
}

inline std::vector<World> best_witnesses(const NormalityOrder& order,
                                         const std::vector<WitnessRecord>& records) {
  std::vector<World> worlds;
  for (const auto& r : records) worlds.push_back(r.world);
  return best_witnesses(order, worlds);
}

// Full verdict under both plain and normality-restricted semantics.  A
// witness is admissible when its world is at least as normal as the actual
// world.
inline CauseVerdict is_extended_cause(CauseSearch& search, const NormalityOrder& order,
                                      const CandidateCause& cause, const BooleanFormula& phi) {
  CauseVerdict v(cause, phi);
  WitnessList wl = search.witnesses(cause.conjuncts(), phi);
  v.ac1 = wl.ac1;
  v.hp_witnesses = std::move(wl.records);
  const World& actual = search.actual();
  WorldFilter admissible = [&](const World& w) { return order.at_least_as_normal(w, actual); };
  for (const auto& r : v.hp_witnesses)
    if (admissible(r.world)) v.admissible_witnesses.push_back(r);

  if (!v.ac1) {
    v.failed_hp = v.failed_extended = Clause::ac1;
  } else {
    if (v.hp_witnesses.empty()) {
      v.failed_hp = Clause::ac2;
    } else {
      v.ac3_hp = search.ac3(cause.conjuncts(), phi);
      if (!v.ac3_hp) v.failed_hp = Clause::ac3;
    }
    if (v.admissible_witnesses.empty()) {
      v.failed_extended = Clause::ac2;
    } else {
      v.ac3_extended = search.ac3(cause.conjuncts(), phi, admissible);
      if (!v.ac3_extended) v.failed_extended = Clause::ac3;
    }
  }
  v.is_cause_hp = v.failed_hp == Clause::none;
  v.is_cause_extended = v.failed_extended == Clause::none;
  v.best_witnesses = best_witnesses(order, v.admissible_witnesses);
  return v;
}

inline CauseVerdict is_extended_cause(const ExtendedCausalModel& m, const Context& context,
                                      const CandidateCause& cause, const BooleanFormula& phi,
                                      SearchLimits limits = {}) {
  CauseSearch search(m.model, context, limits);
  return is_extended_cause(search, m.order, cause, phi);
}

// `a` is at least as good a cause as `b`: every best witness of b is matched
// by some best witness of a that is at least as normal.
inline bool at_least_as_good(const NormalityOrder& order, const std::vector<World>& a,
                             const std::vector<World>& b) {
  for (const auto& wb : b) {
    bool found = false;
    for (const auto& wa : a) {
      if (order.at_least_as_normal(wa, wb)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline bool strictly_better_somewhere(const NormalityOrder& order, const std::vector<World>& a,
                                     const std::vector<World>& b) {
  for (const auto& wa : a)
    for (const auto& wb : b)
      if (order.compare(wa, wb) == Normality::more_normal) return true;
  return false;
}

struct GradingEntry {
  enum class Relation { above, equal, incomparable };
  Relation relation = Relation::equal;
  // For `above`, first is the better candidate.  Indices into the candidate
  // list.
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const GradingEntry&, const GradingEntry&) = default;
};

struct Grading {
  std::vector<CauseVerdict> verdicts;
  std::vector<GradingEntry> entries;  // one per unordered pair, i < j order
};

// Causes outrank non-causes; two non-causes rank equal.  Between causes,
// `above` needs covering plus at least one strictly better pair.
inline GradingEntry grade_pair(const NormalityOrder& order, bool a_cause, const std::vector<World>& wa,
                               std::size_t ia, bool b_cause, const std::vector<World>& wb,
                               std::size_t ib) {
  using R = GradingEntry::Relation;
  if (a_cause != b_cause) return a_cause ? GradingEntry{R::above, ia, ib} : GradingEntry{R::above, ib, ia};
  if (!a_cause) return {R::equal, ia, ib};
  bool ab = at_least_as_good(order, wa, wb);
  bool ba = at_least_as_good(order, wb, wa);
  if (ab && ba) return {R::equal, ia, ib};
  if (ab && strictly_better_somewhere(order, wa, wb)) return {R::above, ia, ib};
  if (ba && strictly_better_somewhere(order, wb, wa)) return {R::above, ib, ia};
  return {R::incomparable, ia, ib};
}

inline GradingEntry grade_pair(const NormalityOrder& order, const CauseVerdict& a, std::size_t ia,
                               const CauseVerdict& b, std::size_t ib) {
  return grade_pair(order, a.is_cause_extended, a.best_witnesses, ia, b.is_cause_extended, b.best_witnesses,
                    ib);
}

inline Grading grade_candidates(CauseSearch& search, const NormalityOrder& order,
                                const std::vector<CandidateCause>& candidates, const BooleanFormula& phi) {
  Grading g;
  for (const auto& c : candidates) g.verdicts.push_back(is_extended_cause(search, order, c, phi));
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = i + 1; j < candidates.size(); ++j)
      g.entries.push_back(grade_pair(order, g.verdicts[i], i, g.verdicts[j], j));
  return g;
}

inline Grading grade_candidates(const ExtendedCausalModel& m, const Context& context,
                                const std::vector<CandidateCause>& candidates, const BooleanFormula& phi,
                                SearchLimits limits = {}) {
  CauseSearch search(m.model, context, limits);
  return grade_candidates(search, m.order, candidates, phi);
}

}  // namespace actcause
