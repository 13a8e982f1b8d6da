#include <gtest/gtest.h>

#include "support/fixture_util.hpp"

using namespace actcause;
using namespace testutil;

namespace {

std::vector<Diagnostic> errors(std::string_view text) { return parse(text).diagnostics; }

}  // namespace

TEST(Dsl, ParsesForestFire) {
  ParsedDocument d = load("forest_fire");
  EXPECT_EQ(d.model.exogenous().size(), 2u);
  EXPECT_EQ(d.model.endogenous().size(), 3u);
  EXPECT_EQ(d.contexts.size(), 2u);
  ASSERT_EQ(d.queries.size(), 7u);
  EXPECT_EQ(d.queries[0].kind, QueryKind::solve);
  EXPECT_EQ(d.queries[1].kind, QueryKind::satisfies);
  EXPECT_EQ(d.queries[3].kind, QueryKind::cause);
  EXPECT_EQ(d.queries[5].candidates.front().size(), 2u);
  EXPECT_EQ(d.queries[6].kind, QueryKind::witnesses);
  EXPECT_EQ(d.order.kind(), NormalityOrder::Kind::derived);
  EXPECT_EQ(solve(d.model, context(d, "u10")), world(d, {{"L", 1}, {"M", 0}, {"F", 1}}));
}

TEST(Dsl, ExplicitNormsBuildExplicitOrder) {
  ParsedDocument d = load("omission_b");
  EXPECT_EQ(d.order.kind(), NormalityOrder::Kind::explicit_edges);
  EXPECT_FALSE(d.typicality.has_value());
  EXPECT_EQ(d.norm_statements().size(), 2u);
}

TEST(Dsl, PrettyPrintIsAFixedPoint) {
  for (const Fixture& f : load_corpus(fixture_dir())) {
    std::string once = print_document(f.document);
    ParseResult again = parse(once);
    ASSERT_TRUE(again.ok()) << f.name << "\n" << once;
    EXPECT_EQ(print_document(*again.document), once) << f.name;
  }
}

TEST(Dsl, ExpressionForms) {
  ParsedDocument d = parse_document(
      "exo U : {0, 1, 2}\n"
      "var A : {0, 1, 2} = min(U, 1, 2)\n"
      "var B : {-2, -1, 0, 1, 2} = -U + A * 1\n"
      "var C : {0, 1} = table(U) { (0) -> 1, (1) -> 0, (2) -> 1 }\n"
      "var D : {0, 1} = ite(U == 2, 0, 1)\n"
      "context two : U=2\n");
  EXPECT_EQ(solve(d.model, context(d, "two")), world(d, {{"A", 1}, {"B", -1}, {"C", 1}, {"D", 0}}));
}

TEST(Dsl, NotEqualInFormulas) {
  ParsedDocument d = load("forest_fire");
  Query q = parse_query(d, "satisfies [L<-0](F != 0) @ u11");
  EXPECT_TRUE(satisfies(d.model, context(d, "u11"), q.formula));
}

TEST(Dsl, NewlinesInsideBracketsAreIgnored) {
  ParseResult r = parse("exo U : {0,\n 1}\nvar A : {0, 1} = max(\n  U,\n  0)\n");
  EXPECT_TRUE(r.ok());
}

TEST(Dsl, CommentsAndCarriageReturns) {
  ParseResult r = parse("# header\r\nexo U : {0, 1}   # trailing\r\nvar A : {0, 1} = U\r\n");
  EXPECT_TRUE(r.ok());
}

TEST(Dsl, ReportsCycleAtDeclaration) {
  auto diags = errors("exo U : {0,1}\nvar A : {0,1} = B\nvar B : {0,1} = A\n");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].span.line, 2u);
  EXPECT_NE(diags[0].message.find("cycle"), std::string::npos);
}

TEST(Dsl, ReportsNonTotalEquationWithWitness) {
  auto diags = errors("exo U : {0,1}\nvar A : {0,1} = U + 1\n");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].message.find("U=1"), std::string::npos);
}

TEST(Dsl, CollectsSeveralSyntaxErrors) {
  auto diags = errors("exo U : 0\nvar A : {0,1} = U +\nvar B : {0,1} = U\nvar C = 1\n");
  EXPECT_GE(diags.size(), 2u);
  for (std::size_t i = 1; i < diags.size(); ++i) EXPECT_LE(diags[i - 1].span.line, diags[i].span.line);
}

TEST(Dsl, RejectsIntegerOverflow) {
  auto diags = errors("var A : {0,1} = 99999999999999999999\n");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].message.find("out of range"), std::string::npos);
}

TEST(Dsl, RejectsContradictoryNorms) {
  auto diags = errors("exo U : {0,1}\nvar A : {0,1} = U\nnorm (A=1) > (A=0)\nnorm (A=0) > (A=1)\n");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].message.find("contradict"), std::string::npos);
}

TEST(Dsl, RejectsTypicalityMixedWithNorms) {
  auto diags = errors("exo U : {0,1}\nvar A : {0,1} = U\ntypical A = 0 > 1\nnorm (A=1) > (A=0)\n");
  EXPECT_FALSE(diags.empty());
}

TEST(Dsl, RejectsBadQueries) {
  EXPECT_FALSE(errors("exo U : {0,1}\nvar A : {0,1} = U\ncontext c : U=1\ncause A=1 for A=1 @ nowhere\n").empty());
  EXPECT_FALSE(errors("exo U : {0,1}\nvar A : {0,1} = U\ncontext c : U=1\ncause U=1 for A=1 @ c\n").empty());
  EXPECT_FALSE(errors("exo U : {0,1}\nvar A : {0,1} = U\ncontext c : U=1\ncause A=3 for A=1 @ c\n").empty());
  EXPECT_FALSE(errors("exo U : {0,1}\nvar A : {0,1} = U\ncontext c : U=1, U=0\n").empty());
  EXPECT_FALSE(errors("exo var : {0,1}\n").empty());
}

TEST(Dsl, DeepNestingIsAnErrorNotACrash) {
  std::string deep = "var A : {0,1} = " + std::string(5000, '(') + "1" + std::string(5000, ')') + "\n";
  EXPECT_FALSE(errors(deep).empty());
}

TEST(Dsl, SpansPointIntoInput) {
  std::string text = "exo U : {0,1}\nvar A : {0,1} = U +\n";
  for (const auto& d : errors(text)) {
    EXPECT_LE(d.span.begin, d.span.end);
    EXPECT_LE(d.span.end, text.size());
  }
}

TEST(Dsl, StandaloneQueries) {
  ParsedDocument d = load("legal_careless");
  Query q = parse_query(d, "grade {AN=1, BC=1} for F=1 @ careless");
  EXPECT_EQ(q.kind, QueryKind::grade);
  EXPECT_EQ(q.candidates.size(), 2u);
  EXPECT_EQ(q.context, "careless");
  EXPECT_EQ(to_string(d.model, q), "grade {AN=1, BC=1} for F=1 @ careless");

  ParsedDocument ff = load("forest_fire");
  Query s = parse_query(ff, "satisfies [M<-0](F=1) @ u11");
  EXPECT_TRUE(satisfies(ff.model, context(ff, "u11"), s.formula));
  // Default kind lets callers drop the keyword.
  Query c = parse_query(ff, "L=1 for F=1 @ u11", QueryKind::cause);
  EXPECT_EQ(c.kind, QueryKind::cause);
  EXPECT_THROW(parse_query(ff, "cause L=1 for F=1 @ nowhere"), ParseError);
}
