// Builds a forest fire that needs both lightning and a dropped match, asks
// which events caused it, then grades the two candidates when lightning is
// the unusual one.

#include <iostream>

#include "actcause/graded.hpp"

using namespace actcause;

int main() {
  CausalModel m = CausalModel::Builder()
                      .exogenous("UL", {0, 1})
                      .exogenous("UM", {0, 1})
                      .endogenous("L", {0, 1}, Expr::var("UL"))
                      .endogenous("M", {0, 1}, Expr::var("UM"))
                      .endogenous("F", {0, 1}, Expr::nary(Expr::Op::min, {Expr::var("L"), Expr::var("M")}))
                      .build();
  if (!m.valid()) {
    for (const auto& v : m.report().violations) std::cerr << v.message << "\n";
    return 1;
  }
  Context u = make_context(m, {{"UL", 1}, {"UM", 1}});
  BooleanFormula fire = BooleanFormula::event(make_event(m, "F", 1));
  std::cout << "actual world " << to_string(m, solve(m, u)) << "\n";

  for (const CandidateCause& c : find_all_causes(m, u, fire, 2)) std::cout << "cause: " << to_string(m, c) << "\n";

  CausalFormula no_match{Assignment::from({{m.endogenous_index("M"), 0}}), BooleanFormula::negation(fire)};
  std::cout << to_string(m, no_match) << " holds: " << std::boolalpha << satisfies(m, u, no_match) << "\n";

  // Lightning is rare; nothing is assumed about matches.
  TypicalitySpec spec;
  spec.typical[m.endogenous_index("L")] = {0, 1};
  ExtendedCausalModel ext{m, NormalityOrder::derived(m, spec)};
  std::vector<CandidateCause> candidates{CandidateCause{make_event(m, "L", 1)}, CandidateCause{make_event(m, "M", 1)}};
  Grading g = grade_candidates(ext, u, candidates, fire);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const CauseVerdict& v = g.verdicts[i];
    std::cout << to_string(m, v.cause) << ": extended cause " << v.is_cause_extended << ", best witnesses";
    for (const World& w : v.best_witnesses) std::cout << " " << to_string(m, w);
    std::cout << "\n";
  }
  const GradingEntry& e = g.entries.front();
  switch (e.relation) {
    case GradingEntry::Relation::above:
      std::cout << to_string(m, candidates[e.first]) << " is the better cause\n";
      break;
    case GradingEntry::Relation::equal:
      std::cout << "equally good causes\n";
      break;
    case GradingEntry::Relation::incomparable:
      std::cout << "incomparable causes\n";
      break;
  }
}
