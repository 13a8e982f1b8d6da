#include <gtest/gtest.h>

#include "support/fixture_util.hpp"
#include "support/suites.hpp"

// Smaller seeds than the acceptance run so that failures are cheap to
// reproduce; the acceptance binary runs the full-size versions.

TEST(Differential, MainCheckerMatchesOracle) {
  suites::DifferentialOptions opt;
  opt.seed = 0xd1ff;
  opt.models = 60;
  suites::Tally t = suites::differential(opt);
  EXPECT_TRUE(t.ok()) << t.failures << " disagreements; first: " << t.first_failure;
  EXPECT_GT(t.checked, 10000u);
}

TEST(Differential, OracleAgreesOnKnownVerdicts) {
  using namespace testutil;
  ParsedDocument ff = load("forest_fire");
  const Context& u = context(ff, "u11");
  EXPECT_TRUE(oracle::oracle_is_cause(ff.model, u, {ev(ff, "L", 1)}, is(ff, "F", 1)));
  EXPECT_FALSE(oracle::oracle_is_cause(ff.model, u, {ev(ff, "L", 1), ev(ff, "M", 1)}, is(ff, "F", 1)));
  ParsedDocument p = load("poisoning");
  EXPECT_FALSE(oracle::oracle_is_cause(p.model, context(p, "u11"), {ev(p, "R", 1)}, is(p, "D", 1)));
  ParsedDocument b = load("bogus_prevention");
  EXPECT_TRUE(oracle::oracle_is_cause(b.model, context(b, "actual"), {ev(b, "B", 1)}, is(b, "VS", 1)));
  EXPECT_FALSE(
      oracle::oracle_is_extended_cause(b.model, b.order, context(b, "actual"), {ev(b, "B", 1)}, is(b, "VS", 1)));
}

TEST(Differential, OracleConfirmsExtendedConjunctionWithoutPlainCause) {
  using namespace testutil;
  ParsedDocument d = actcause::parse_document(
      "exo U0 : {0, 1}\nexo U1 : {0, 1}\nvar A : {0, 1} = 1\nvar B : {0, 1} = U0 * (1 - A)\n"
      "var C : {0, 1} = U1 * (1 - A)\nvar E : {0, 1} = max(A, ite(B == C, 1, 0))\n"
      "typical B = 0 > 1\ntypical C = 1 > 0\ncontext u : U0=1, U1=0\n");
  std::vector<actcause::PrimitiveEvent> x{ev(d, "B", 0), ev(d, "C", 0)};
  EXPECT_TRUE(oracle::oracle_is_extended_cause(d.model, d.order, context(d, "u"), x, is(d, "E", 1)));
  EXPECT_FALSE(oracle::oracle_is_cause(d.model, context(d, "u"), x, is(d, "E", 1)));
}

class Properties : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    suites::PropertyOptions opt;
    opt.seed = 0x9e0;
    opt.models = 120;
    opt.fixture_dir = testutil::fixture_dir();
    report_ = new suites::PropertyReport(suites::properties(opt));
  }
  static void TearDownTestSuite() {
    delete report_;
    report_ = nullptr;
  }
  static void expect_green(const suites::Tally& t) {
    EXPECT_GT(t.checked, 0u);
    EXPECT_TRUE(t.ok()) << t.failures << " failures; first: " << t.first_failure;
  }
  static suites::PropertyReport* report_;
};

suites::PropertyReport* Properties::report_ = nullptr;

TEST_F(Properties, OrdersArePreorders) { expect_green(report_->preorder); }
TEST_F(Properties, ButForImpliesCause) { expect_green(report_->but_for); }
TEST_F(Properties, ExtendedImpliesPlain) { expect_green(report_->extended_implies_hp); }
TEST_F(Properties, EmptyPrefixIdentity) { expect_green(report_->empty_prefix); }
TEST_F(Properties, SolverSatisfiesEquations) { expect_green(report_->solver); }

TEST(Fuzz, ParserNeverThrows) {
  suites::FuzzOptions opt;
  opt.seed = 0xf022;
  opt.inputs = 3000;
  opt.fixture_dir = testutil::fixture_dir();
  suites::Tally t = suites::fuzz_parser(opt);
  EXPECT_TRUE(t.ok()) << t.first_failure;
}

TEST(Oracle, RefusesLargeModels) {
  std::mt19937_64 rng(1);
  testgen::ModelShape shape;
  shape.min_endo = shape.max_endo = 6;
  actcause::CausalModel m = testgen::random_model(rng, shape);
  actcause::Context u = actcause::all_contexts(m).front();
  EXPECT_THROW(oracle::oracle_is_cause(m, u, {{0, 0}}, actcause::BooleanFormula::event({0, 0})), std::length_error);
}
