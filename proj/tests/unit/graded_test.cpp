#include <gtest/gtest.h>

#include "support/fixture_util.hpp"

using namespace actcause;
using namespace testutil;
using R = GradingEntry::Relation;

namespace {

Grading grade(const ParsedDocument& d, const std::string& ctx, std::vector<CandidateCause> cs,
              const std::string& var, Value v) {
  CauseSearch search(d.model, context(d, ctx));
  return grade_candidates(search, d.order, cs, is(d, var, v));
}

}  // namespace

TEST(Graded, BogusPreventionHasNoExtendedCauses) {
  ParsedDocument d = load("bogus_prevention");
  CauseVerdict b = verdict(d, "actual", {{"B", 1}}, "VS", 1);
  CauseVerdict a = verdict(d, "actual", {{"A", 0}}, "VS", 1);
  EXPECT_TRUE(b.is_cause_hp);
  EXPECT_TRUE(a.is_cause_hp);
  EXPECT_FALSE(b.is_cause_extended);
  EXPECT_FALSE(a.is_cause_extended);
  EXPECT_EQ(b.failed_extended, Clause::ac2);
  EXPECT_TRUE(b.admissible_witnesses.empty());
  EXPECT_TRUE(b.best_witnesses.empty());
}

TEST(Graded, BackgroundConditions) {
  ParsedDocument d = load("background_conditions");
  EXPECT_TRUE(verdict(d, "actual", {{"M", 1}}, "F", 1).is_cause_extended);
  CauseVerdict o = verdict(d, "actual", {{"O", 1}}, "F", 1);
  EXPECT_TRUE(o.is_cause_hp);
  EXPECT_FALSE(o.is_cause_extended);
}

TEST(Graded, ShortCircuitBothEncodings) {
  for (const char* name : {"short_circuit", "short_circuit_intentions"}) {
    ParsedDocument d = load(name);
    CauseVerdict v = verdict(d, "actual", {{"A", 1}}, "VS", 1);
    EXPECT_TRUE(v.is_cause_hp) << name;
    EXPECT_FALSE(v.is_cause_extended) << name;
  }
}

TEST(Graded, AdmissibleWitnessesAreAtLeastAsNormal) {
  ParsedDocument d = load("chain");
  CauseSearch search(d.model, context(d, "actual"));
  CauseVerdict v = is_extended_cause(search, d.order, cause(d, {{"LL", 1}}), is(d, "ES", 1));
  ASSERT_TRUE(v.is_cause_extended);
  for (const auto& r : v.admissible_witnesses) EXPECT_TRUE(d.order.at_least_as_normal(r.world, search.actual()));
  // Best witnesses are pairwise non-dominated and drawn from the admissible set.
  for (const auto& a : v.best_witnesses) {
    EXPECT_TRUE(std::any_of(v.admissible_witnesses.begin(), v.admissible_witnesses.end(),
                            [&](const WitnessRecord& r) { return r.world == a; }));
    for (const auto& b : v.best_witnesses) EXPECT_NE(d.order.compare(b, a), Normality::more_normal);
  }
}

TEST(Graded, KnobePens) {
  ParsedDocument d = load("knobe_pens");
  Grading g = grade(d, "actual", {cause(d, {{"PT", 1}}), cause(d, {{"AT", 1}})}, "PO", 1);
  ASSERT_EQ(g.entries.size(), 1u);
  EXPECT_EQ(g.entries[0], (GradingEntry{R::above, 0, 1}));
}

TEST(Graded, ChainProximateVersusDistal) {
  ParsedDocument d = load("chain");
  Grading g = grade(d, "actual", {cause(d, {{"LL", 1}}), cause(d, {{"M", 1}})}, "ES", 1);
  EXPECT_TRUE(g.verdicts[0].is_cause_extended);
  EXPECT_TRUE(g.verdicts[1].is_cause_extended);
  EXPECT_EQ(g.entries[0], (GradingEntry{R::above, 0, 1}));
}

TEST(Graded, LegalCases) {
  ParsedDocument careless = load("legal_careless");
  Grading g1 = grade(careless, "careless", {cause(careless, {{"AN", 1}}), cause(careless, {{"BC", 1}})}, "F", 1);
  EXPECT_EQ(g1.entries[0], (GradingEntry{R::above, 0, 1}));
  ParsedDocument malicious = load("legal_malicious");
  Grading g2 =
      grade(malicious, "malicious", {cause(malicious, {{"BM", 1}}), cause(malicious, {{"AN", 1}})}, "F", 1);
  EXPECT_EQ(g2.entries[0], (GradingEntry{R::above, 0, 1}));
}

TEST(Graded, OmissionViewpoints) {
  struct Expect {
    const char* fixture;
    bool h_cause, w_cause;
    GradingEntry entry;
  };
  const Expect cases[] = {
      {"omission_a", true, false, {R::above, 0, 1}},
      {"omission_b", true, true, {R::equal, 0, 1}},
      {"omission_c", true, true, {R::above, 0, 1}},
      {"omission_d", true, true, {R::incomparable, 0, 1}},
  };
  for (const auto& c : cases) {
    ParsedDocument d = load(c.fixture);
    Grading g = grade(d, "actual", {cause(d, {{"H", 1}}), cause(d, {{"W", 0}})}, "D", 1);
    EXPECT_EQ(g.verdicts[0].is_cause_extended, c.h_cause) << c.fixture;
    EXPECT_EQ(g.verdicts[1].is_cause_extended, c.w_cause) << c.fixture;
    EXPECT_EQ(g.entries[0], c.entry) << c.fixture;
  }
}

TEST(Graded, PairRules) {
  CausalModel m = CausalModel::Builder()
                      .endogenous("A", {0, 1}, Expr::constant(0))
                      .endogenous("B", {0, 1}, Expr::constant(0))
                      .build();
  TypicalitySpec spec;
  spec.typical[0] = {0, 1};
  spec.typical[1] = {0, 1};
  NormalityOrder o = NormalityOrder::derived(m, spec);
  World w00{{0, 0}}, w10{{1, 0}}, w01{{0, 1}}, w11{{1, 1}};
  // Non-causes rank below causes and equal to each other.
  EXPECT_EQ(grade_pair(o, false, {}, 0, true, {w11}, 1), (GradingEntry{R::above, 1, 0}));
  EXPECT_EQ(grade_pair(o, false, {}, 0, false, {}, 1), (GradingEntry{R::equal, 0, 1}));
  EXPECT_EQ(grade_pair(o, true, {w00}, 0, true, {w10}, 1), (GradingEntry{R::above, 0, 1}));
  EXPECT_EQ(grade_pair(o, true, {w10}, 0, true, {w01}, 1), (GradingEntry{R::incomparable, 0, 1}));
  EXPECT_EQ(grade_pair(o, true, {w10, w01}, 0, true, {w01, w10}, 1), (GradingEntry{R::equal, 0, 1}));
  // Covering with one strict improvement: a's {00, 01} against b's {01, 11}.
  EXPECT_EQ(grade_pair(o, true, {w01, w11}, 0, true, {w00, w01}, 1), (GradingEntry{R::above, 1, 0}));
}

TEST(Graded, BestWitnessesDeduplicateInOrder) {
  NormalityOrder o = NormalityOrder::explicit_order({{World{{0}}, World{{1}}, true}});
  std::vector<World> ws{World{{1}}, World{{2}}, World{{0}}, World{{2}}};
  EXPECT_EQ(best_witnesses(o, ws), (std::vector<World>{World{{2}}, World{{0}}}));
}

// A conjunction can be an extended cause without being a plain one: plain
// minimality is broken by a sub-conjunction whose only witnesses are less
// normal than the actual world.
TEST(Graded, ExtendedConjunctionNeedNotBePlain) {
  ParsedDocument d = parse_document(
      "exo U0 : {0, 1}\n"
      "exo U1 : {0, 1}\n"
      "var A : {0, 1} = 1\n"
      "var B : {0, 1} = U0 * (1 - A)\n"
      "var C : {0, 1} = U1 * (1 - A)\n"
      "var E : {0, 1} = max(A, ite(B == C, 1, 0))\n"
      "typical B = 0 > 1\n"
      "typical C = 1 > 0\n"
      "context u : U0=1, U1=0\n");
  CauseVerdict v = verdict(d, "u", {{"B", 0}, {"C", 0}}, "E", 1);
  EXPECT_TRUE(v.is_cause_extended);
  EXPECT_FALSE(v.is_cause_hp);
  EXPECT_EQ(v.failed_hp, Clause::ac3);
}
