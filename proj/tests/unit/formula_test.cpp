#include <gtest/gtest.h>

#include "support/fixture_util.hpp"

using namespace actcause;
using namespace testutil;

TEST(Formula, EvaluatesConnectives) {
  ParsedDocument d = load("forest_fire");
  World w = world(d, {{"L", 1}, {"M", 0}, {"F", 1}});
  auto L1 = is(d, "L", 1), M1 = is(d, "M", 1);
  EXPECT_TRUE(L1.eval(w));
  EXPECT_FALSE(M1.eval(w));
  EXPECT_TRUE(BooleanFormula::disjunction(L1, M1).eval(w));
  EXPECT_FALSE(BooleanFormula::conjunction(L1, M1).eval(w));
  EXPECT_TRUE(BooleanFormula::negation(M1).eval(w));
}

TEST(Formula, InterventionFormulasInForestFire) {
  ParsedDocument d = load("forest_fire");
  const Context& u = context(d, "u11");
  // Fire still happens without the lightning; not without both.
  CausalFormula no_m{Assignment::from({{ev(d, "M", 0).var, 0}}), is(d, "F", 1)};
  EXPECT_TRUE(satisfies(d.model, u, no_m));
  CausalFormula neither{Assignment::from({{ev(d, "L", 0).var, 0}, {ev(d, "M", 0).var, 0}}), is(d, "F", 0)};
  EXPECT_TRUE(satisfies(d.model, u, neither));
  EXPECT_EQ(to_string(d.model, no_m), "[M<-0](F=1)");
}

TEST(Formula, PoisoningCounterfactual) {
  ParsedDocument d = load("poisoning");
  const Context& u = context(d, "u11");
  EXPECT_EQ(solve(d.model, u), world(d, {{"A", 1}, {"R", 1}, {"B", 0}, {"D", 1}}));
  CausalFormula f{Assignment::from({{ev(d, "A", 0).var, 0}, {ev(d, "B", 0).var, 0}}), is(d, "D", 1)};
  EXPECT_FALSE(satisfies(d.model, u, f));
}

TEST(Formula, RejectsIllFormedFormulas) {
  ParsedDocument d = load("forest_fire");
  const Context& u = context(d, "u11");
  EXPECT_THROW(make_event(d.model, "UL", 1), FormulaError);
  EXPECT_THROW(make_event(d.model, "F", 3), FormulaError);
  EXPECT_THROW(make_event(d.model, "Q", 0), FormulaError);
  CausalFormula bad{Assignment{{{0, 7}}}, is(d, "F", 1)};
  EXPECT_THROW(satisfies(d.model, u, bad), FormulaError);
  CausalFormula twice{Assignment{{{0, 0}, {0, 1}}}, is(d, "F", 1)};
  EXPECT_THROW(satisfies(d.model, u, twice), FormulaError);
}

TEST(Formula, PrintsWithMinimalParentheses) {
  ParsedDocument d = load("forest_fire");
  auto L = is(d, "L", 1), M = is(d, "M", 1), F = is(d, "F", 0);
  EXPECT_EQ(to_string(d.model, BooleanFormula::conjunction(BooleanFormula::disjunction(L, M), F)),
            "(L=1 | M=1) & F=0");
  EXPECT_EQ(to_string(d.model, BooleanFormula::disjunction(L, BooleanFormula::conjunction(M, F))),
            "L=1 | M=1 & F=0");
  EXPECT_EQ(to_string(d.model, BooleanFormula::negation(BooleanFormula::conjunction(L, M))), "!(L=1 & M=1)");
}

TEST(Formula, VariablesAreDistinctAndSorted) {
  ParsedDocument d = load("forest_fire");
  auto f = BooleanFormula::conjunction(is(d, "F", 1), BooleanFormula::disjunction(is(d, "L", 1), is(d, "F", 0)));
  EXPECT_EQ(f.variables(), (std::vector<std::size_t>{ev(d, "L", 1).var, ev(d, "F", 1).var}));
}
