#include <gtest/gtest.h>

#include "support/fixture_util.hpp"

using namespace actcause;
using namespace testutil;

namespace {

// Three binary variables, no equations of interest.
CausalModel three() {
  return CausalModel::Builder()
      .endogenous("A", {0, 1}, Expr::constant(0))
      .endogenous("B", {0, 1}, Expr::constant(0))
      .endogenous("C", {0, 1, 2}, Expr::constant(0))
      .build();
}

World w(std::vector<Value> v) { return World{std::move(v)}; }

}  // namespace

TEST(Normality, TrivialOrderMakesEverythingEqual) {
  NormalityOrder o = NormalityOrder::trivial();
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({1, 1, 2})), Normality::equally_normal);
  EXPECT_TRUE(o.features(w({1, 1, 2})).empty());
}

TEST(Normality, DominanceOverAtypicalValues) {
  CausalModel m = three();
  TypicalitySpec spec;
  spec.typical[0] = {0, 1};
  spec.typical[1] = {0, 1};
  NormalityOrder o = NormalityOrder::derived(m, spec);
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({1, 0, 0})), Normality::more_normal);
  EXPECT_EQ(o.compare(w({1, 0, 0}), w({1, 1, 0})), Normality::more_normal);
  // One atypical value each, on different variables.
  EXPECT_EQ(o.compare(w({1, 0, 0}), w({0, 1, 0})), Normality::incomparable);
  // C carries no typicality.
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({0, 0, 2})), Normality::equally_normal);
}

TEST(Normality, RanksWithinOneVariable) {
  CausalModel m = three();
  TypicalitySpec spec;
  spec.typical[2] = {1, 0, 2};
  NormalityOrder o = NormalityOrder::derived(m, spec);
  EXPECT_EQ(o.compare(w({0, 0, 1}), w({0, 0, 0})), Normality::more_normal);
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({0, 0, 2})), Normality::more_normal);
  EXPECT_EQ(o.features(w({0, 0, 2})), (std::vector<Feature>{{Feature::Kind::value, 2, 2}}));
}

TEST(Normality, SeverityLinksVariables) {
  CausalModel m = three();
  TypicalitySpec spec;
  spec.typical[0] = {0, 1};
  spec.typical[1] = {0, 1};
  spec.severity.push_back({{0, 1}, {1, 1}});  // A=1 is milder than B=1
  NormalityOrder o = NormalityOrder::derived(m, spec);
  EXPECT_EQ(o.compare(w({1, 0, 0}), w({0, 1, 0})), Normality::more_normal);
  EXPECT_TRUE(o.feature_leq({Feature::Kind::value, 0, 1}, {Feature::Kind::value, 1, 1}));
  EXPECT_FALSE(o.feature_leq({Feature::Kind::value, 1, 1}, {Feature::Kind::value, 0, 1}));
}

TEST(Normality, CoveringNeedsDistinctPartners) {
  CausalModel m = three();
  TypicalitySpec spec;
  spec.typical[0] = {0, 1};
  spec.typical[1] = {0, 1};
  spec.typical[2] = {0, 1, 2};
  spec.severity.push_back({{0, 1}, {2, 1}});
  spec.severity.push_back({{1, 1}, {2, 1}});
  NormalityOrder o = NormalityOrder::derived(m, spec);
  // Both A=1 and B=1 are milder than C=1, but C=1 can absorb only one.
  EXPECT_FALSE(o.at_least_as_normal(w({1, 1, 0}), w({0, 0, 1})));
  EXPECT_TRUE(o.at_least_as_normal(w({1, 0, 0}), w({0, 0, 1})));
}

TEST(Normality, RejectsBadSpecs) {
  CausalModel m = three();
  TypicalitySpec not_perm;
  not_perm.typical[0] = {0, 0};
  EXPECT_THROW(NormalityOrder::derived(m, not_perm), NormalityError);
  TypicalitySpec top_in_chain;
  top_in_chain.typical[0] = {0, 1};
  top_in_chain.typical[1] = {0, 1};
  top_in_chain.severity.push_back({{0, 0}, {1, 1}});
  EXPECT_THROW(NormalityOrder::derived(m, top_in_chain), NormalityError);
  TypicalitySpec circular;
  circular.typical[0] = {0, 1};
  circular.typical[1] = {0, 1};
  circular.severity.push_back({{0, 1}, {1, 1}, {0, 1}});
  EXPECT_THROW(NormalityOrder::derived(m, circular), NormalityError);
  TypicalitySpec unranked;
  unranked.typical[0] = {0, 1};
  unranked.severity.push_back({{0, 1}, {1, 1}});
  EXPECT_THROW(NormalityOrder::derived(m, unranked), NormalityError);
}

TEST(Normality, ExplicitOrderClosesTransitively) {
  std::vector<OrderStatement> s{{w({0, 0, 0}), w({1, 0, 0}), true},
                                {w({1, 0, 0}), w({1, 1, 0}), false},
                                {w({1, 1, 0}), w({1, 1, 1}), true}};
  NormalityOrder o = NormalityOrder::explicit_order(s);
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({1, 1, 1})), Normality::more_normal);
  EXPECT_EQ(o.compare(w({1, 1, 0}), w({1, 0, 0})), Normality::equally_normal);
  EXPECT_EQ(o.compare(w({0, 0, 0}), w({0, 1, 0})), Normality::incomparable);
  EXPECT_EQ(o.compare(w({0, 1, 0}), w({0, 1, 0})), Normality::equally_normal);
}

TEST(Normality, ExplicitOrderReportsCycle) {
  std::vector<OrderStatement> s{{w({0, 0, 0}), w({1, 0, 0}), true},
                                {w({1, 0, 0}), w({1, 1, 0}), false},
                                {w({1, 1, 0}), w({0, 0, 0}), false}};
  try {
    NormalityOrder::explicit_order(s);
    FAIL() << "cycle accepted";
  } catch (const InconsistentOrder& e) {
    ASSERT_GE(e.cycle.size(), 3u);
    EXPECT_EQ(e.cycle.front(), e.cycle.back());
  }
  // Equalities alone never conflict.
  std::vector<OrderStatement> eq{{w({0, 0, 0}), w({1, 0, 0}), false}, {w({1, 0, 0}), w({0, 0, 0}), false}};
  EXPECT_NO_THROW(NormalityOrder::explicit_order(eq));
}

TEST(Normality, SizeMismatchIsAnError) {
  CausalModel m = three();
  TypicalitySpec spec;
  spec.typical[0] = {0, 1};
  NormalityOrder o = NormalityOrder::derived(m, spec);
  EXPECT_THROW(o.compare(w({0, 0}), w({0, 0})), NormalityError);
  std::vector<OrderStatement> mixed{{w({0, 0}), w({0, 0, 0}), true}};
  EXPECT_THROW(NormalityOrder::explicit_order(mixed), NormalityError);
}

TEST(Normality, MechanismModeRanksBehaviors) {
  ParsedDocument d = load("short_circuit");
  ASSERT_TRUE(d.order.spec().mechanism);
  std::size_t p = ev(d, "P", 0).var;
  // P=1 with A=1 follows A; P=1 with A=0 is the atypical "one".
  EXPECT_EQ(assign_behavior(d.order, world(d, {{"A", 1}, {"P", 1}, {"VS", 1}}), p), "follows");
  EXPECT_EQ(assign_behavior(d.order, world(d, {{"A", 0}, {"P", 0}, {"VS", 1}}), p), "zero");
  EXPECT_EQ(assign_behavior(d.order, world(d, {{"A", 0}, {"P", 1}, {"VS", 0}}), p), "one");
  // The actual world (antidote, poison following it) is less normal than
  // the world with neither.
  EXPECT_EQ(d.order.compare(world(d, {{"A", 0}, {"P", 0}, {"VS", 1}}), world(d, {{"A", 1}, {"P", 1}, {"VS", 1}})),
            Normality::more_normal);
}

TEST(Normality, DescribeFeatures) {
  ParsedDocument d = load("short_circuit");
  std::size_t p = ev(d, "P", 0).var;
  std::size_t a = ev(d, "A", 0).var;
  EXPECT_EQ(NormalityOrder::describe(d.model, {Feature::Kind::behavior, p, 2}, d.order.spec()), "P:\"one\"");
  EXPECT_EQ(NormalityOrder::describe(d.model, {Feature::Kind::value, a, 1}, d.order.spec()), "A=1");
}

TEST(Normality, ReverseAndNames) {
  EXPECT_EQ(reverse(Normality::more_normal), Normality::less_normal);
  EXPECT_EQ(reverse(Normality::incomparable), Normality::incomparable);
  EXPECT_STREQ(to_string(Normality::equally_normal), "equally_normal");
}
