#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actcause/formula.hpp"
#include "actcause/graded.hpp"
#include "actcause/hp.hpp"
#include "actcause/model.hpp"
#include "actcause/normality.hpp"

namespace actcause {

// 1-based line and column of the first byte; [begin, end) byte offsets.
struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Diagnostic {
  SourceSpan span;
  std::string message;

  std::string to_string() const {
    return std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message;
  }
};

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diags)
      : Error(diags.empty() ? std::string("parse error") : diags.front().to_string()),
        diagnostics(std::move(diags)) {}
  std::vector<Diagnostic> diagnostics;
};

enum class QueryKind { cause, grade, witnesses, solve, satisfies };

inline const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::cause: return "cause";
    case QueryKind::grade: return "grade";
    case QueryKind::witnesses: return "witnesses";
    case QueryKind::solve: return "solve";
    case QueryKind::satisfies: return "satisfies";
  }
  return "?";
}

struct Query {
  QueryKind kind = QueryKind::cause;
  std::string context;  // empty: not named in the query
  std::vector<CandidateCause> candidates;
  bool all_causes = false;  // `cause * for ...`
  BooleanFormula effect;
  CausalFormula formula;  // satisfies
  SourceSpan span;
};

// w0 R1 w1 R2 w2 ... where each R is > (strict) or ==.
struct NormChain {
  std::vector<World> worlds;
  std::vector<bool> strict;
};

struct ParsedDocument {
  CausalModel model;
  std::optional<TypicalitySpec> typicality;
  std::vector<NormChain> norms;
  std::vector<std::pair<std::string, Context>> contexts;
  std::vector<Query> queries;
  NormalityOrder order;  // derived, explicit, or trivial

  bool has_normality() const { return typicality.has_value() || !norms.empty(); }

  std::vector<OrderStatement> norm_statements() const {
    std::vector<OrderStatement> out;
    for (const auto& c : norms)
      for (std::size_t i = 0; i + 1 < c.worlds.size(); ++i)
        out.push_back({c.worlds[i], c.worlds[i + 1], c.strict[i]});
    return out;
  }

  const Context* find_context(std::string_view name) const {
    for (const auto& [n, c] : contexts)
      if (n == name) return &c;
    return nullptr;
  }
};

struct ParseOptions {
  bool all_errors = true;
};

struct ParseResult {
  std::optional<ParsedDocument> document;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return document.has_value(); }
};

namespace dsl_detail {

constexpr std::size_t kMaxDepth = 256;

inline const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k{
      "exo",   "var",   "typical",   "severity", "mechanism", "behavior", "norm",
      "context", "cause", "grade",   "witnesses", "solve",   "satisfies", "for",
      "min",   "max",   "ite",       "table",    "on",        "off"};
  return k;
}

enum class Tok {
  ident, integer, string, lbrace, rbrace, lparen, rparen, lbracket, rbracket, comma, colon,
  eq, eqeq, neq, gt, lt, larrow, rarrow, plus, minus, star, bang, amp, pipe, at, newline, end
};

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::integer: return "integer";
    case Tok::string: return "string";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::comma: return "','";
    case Tok::colon: return "':'";
    case Tok::eq: return "'='";
    case Tok::eqeq: return "'=='";
    case Tok::neq: return "'!='";
    case Tok::gt: return "'>'";
    case Tok::lt: return "'<'";
    case Tok::larrow: return "'<-'";
    case Tok::rarrow: return "'->'";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::star: return "'*'";
    case Tok::bang: return "'!'";
    case Tok::amp: return "'&'";
    case Tok::pipe: return "'|'";
    case Tok::at: return "'@'";
    case Tok::newline: return "end of line";
    case Tok::end: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::int64_t value = 0;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        SourceSpan s = here(1);
        advance();
        if (depth == 0 && (out.empty() || out.back().kind != Tok::newline)) {
          out.push_back({Tok::newline, "\n", 0, s});
        }
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
        continue;
      }
      if (is_ident_start(c)) {
        SourceSpan s = here(0);
        std::size_t b = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        s.end = pos_;
        out.push_back({Tok::ident, std::string(src_.substr(b, pos_ - b)), 0, s});
        continue;
      }
      if (c >= '0' && c <= '9') {
        SourceSpan s = here(0);
        std::size_t b = pos_;
        std::int64_t v = 0;
        bool overflow = false;
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
          if (!overflow) {
            v = v * 10 + (src_[pos_] - '0');
            if (v > std::numeric_limits<Value>::max()) overflow = true;
          }
          advance();
        }
        s.end = pos_;
        if (overflow) {
          diags_.push_back({s, "integer literal out of range"});
          v = 0;
        }
        out.push_back({Tok::integer, std::string(src_.substr(b, pos_ - b)), v, s});
        continue;
      }
      if (c == '"') {
        SourceSpan s = here(0);
        advance();
        std::size_t b = pos_;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
        if (pos_ >= src_.size() || src_[pos_] != '"') {
          s.end = pos_;
          diags_.push_back({s, "unterminated string"});
          continue;
        }
        std::string text(src_.substr(b, pos_ - b));
        advance();
        s.end = pos_;
        out.push_back({Tok::string, std::move(text), 0, s});
        continue;
      }
      Tok k;
      std::size_t len = 1;
      auto next_is = [&](char d) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == d; };
      switch (c) {
        case '{': k = Tok::lbrace; ++depth; break;
        case '}': k = Tok::rbrace; depth = std::max(0, depth - 1); break;
        case '(': k = Tok::lparen; ++depth; break;
        case ')': k = Tok::rparen; depth = std::max(0, depth - 1); break;
        case '[': k = Tok::lbracket; ++depth; break;
        case ']': k = Tok::rbracket; depth = std::max(0, depth - 1); break;
        case ',': k = Tok::comma; break;
        case ':': k = Tok::colon; break;
        case '=':
          if (next_is('=')) { k = Tok::eqeq; len = 2; } else { k = Tok::eq; }
          break;
        case '!':
          if (next_is('=')) { k = Tok::neq; len = 2; } else { k = Tok::bang; }
          break;
        case '>': k = Tok::gt; break;
        case '<':
          if (next_is('-')) { k = Tok::larrow; len = 2; } else { k = Tok::lt; }
          break;
        case '-':
          if (next_is('>')) { k = Tok::rarrow; len = 2; } else { k = Tok::minus; }
          break;
        case '+': k = Tok::plus; break;
        case '*': k = Tok::star; break;
        case '&': k = Tok::amp; break;
        case '|': k = Tok::pipe; break;
        case '@': k = Tok::at; break;
        default: {
          SourceSpan s = here(1);
          std::string shown = (static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f)
                                  ? std::string("'") + c + "'"
                                  : "byte 0x" + hex(static_cast<unsigned char>(c));
          diags_.push_back({s, "unexpected character " + shown});
          advance();
          continue;
        }
      }
      SourceSpan s = here(len);
      std::string text(src_.substr(pos_, len));
      for (std::size_t i = 0; i < len; ++i) advance();
      out.push_back({k, std::move(text), 0, s});
    }
    out.push_back({Tok::end, "", 0, here(0)});
    return out;
  }

 private:
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
  static std::string hex(unsigned char c) {
    const char* d = "0123456789abcdef";
    return {d[c >> 4], d[c & 15]};
  }

  SourceSpan here(std::size_t len) const { return {line_, col_, pos_, std::min(pos_ + len, src_.size())}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

struct Failure {
  Diagnostic diag;
};

struct RawEvent {
  std::string name;
  Value value = 0;
  SourceSpan span;
};

struct RawFormula {
  enum class Op { event, neq, negation, conjunction, disjunction };
  Op op = Op::event;
  RawEvent event;
  std::vector<RawFormula> kids;
};

struct RawRef {
  std::string name;
  SourceSpan span;
};

struct RawVar {
  bool exo = false;
  std::string name;
  SourceSpan name_span;
  std::vector<Value> range;
  SourceSpan range_span;
  Expr body;
  std::vector<RawRef> refs;
};

struct RawTypical {
  std::string name;
  SourceSpan span;
  std::vector<Value> values;
};

struct RawBehavior {
  std::string label;
  Expr body;
  std::vector<RawRef> refs;
  SourceSpan span;
};

struct RawBehaviors {
  std::string name;
  SourceSpan span;
  std::vector<RawBehavior> items;
};

struct RawNorm {
  SourceSpan span;
  std::vector<std::vector<RawEvent>> worlds;
  std::vector<SourceSpan> world_spans;
  std::vector<bool> strict;
};

struct RawContext {
  std::string name;
  SourceSpan span;
  std::vector<RawEvent> values;
};

struct RawQuery {
  QueryKind kind = QueryKind::cause;
  SourceSpan span;
  std::vector<std::vector<RawEvent>> candidates;
  bool all_causes = false;
  RawFormula effect;
  std::vector<RawEvent> interventions;
  std::string context;
  SourceSpan context_span;
};

struct RawDocument {
  std::vector<RawVar> vars;
  std::vector<RawTypical> typicals;
  std::vector<std::pair<std::vector<RawEvent>, SourceSpan>> severities;
  std::optional<std::pair<bool, SourceSpan>> mechanism;
  std::vector<RawBehaviors> behaviors;
  std::vector<RawNorm> norms;
  std::vector<RawContext> contexts;
  std::vector<RawQuery> queries;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags, bool all_errors)
      : toks_(std::move(toks)), diags_(diags), all_errors_(all_errors) {}

  RawDocument document() {
    RawDocument doc;
    while (true) {
      skip_newlines();
      if (peek().kind == Tok::end) break;
      try {
        statement(doc);
        end_of_statement();
      } catch (const Failure& f) {
        diags_.push_back(f.diag);
        if (!all_errors_) break;
        while (peek().kind != Tok::newline && peek().kind != Tok::end) ++pos_;
      }
    }
    return doc;
  }

  // A single query statement; `default_kind` applies when the text does not
  // start with a query keyword.
  std::optional<RawQuery> lone_query(std::optional<QueryKind> default_kind) {
    try {
      skip_newlines();
      RawQuery q;
      auto k = query_keyword(peek());
      if (k) {
        q = query(*k, next().span);
      } else if (default_kind) {
        q = query(*default_kind, peek().span);
      } else {
        fail(peek().span, "expected a query");
      }
      end_of_statement();
      skip_newlines();
      if (peek().kind != Tok::end) fail(peek().span, "expected a single query");
      return q;
    } catch (const Failure& f) {
      diags_.push_back(f.diag);
      return std::nullopt;
    }
  }

 private:
  static std::optional<QueryKind> query_keyword(const Token& t) {
    if (t.kind != Tok::ident) return std::nullopt;
    if (t.text == "cause") return QueryKind::cause;
    if (t.text == "grade") return QueryKind::grade;
    if (t.text == "witnesses") return QueryKind::witnesses;
    if (t.text == "solve") return QueryKind::solve;
    if (t.text == "satisfies") return QueryKind::satisfies;
    return std::nullopt;
  }

  [[noreturn]] static void fail(SourceSpan s, std::string msg) { throw Failure{{s, std::move(msg)}}; }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const char* what = nullptr) {
    if (peek().kind != k) {
      fail(peek().span, std::string("expected ") + (what ? what : describe(k)) + ", found " + found(peek()));
    }
    return next();
  }
  static std::string found(const Token& t) {
    if (t.kind == Tok::ident || t.kind == Tok::integer) return "'" + t.text + "'";
    return describe(t.kind);
  }
  bool at_word(std::string_view w) const { return peek().kind == Tok::ident && peek().text == w; }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail(peek().span, "expected '" + std::string(w) + "', found " + found(peek()));
    next();
  }
  void skip_newlines() {
    while (peek().kind == Tok::newline) next();
  }
  void end_of_statement() {
    if (peek().kind != Tok::newline && peek().kind != Tok::end) {
      fail(peek().span, "expected end of line, found " + found(peek()));
    }
  }

  struct DepthGuard {
    Parser& p;
    DepthGuard(Parser& p, SourceSpan s) : p(p) {
      if (++p.depth_ > kMaxDepth) {
        --p.depth_;
        fail(s, "nesting too deep");
      }
    }
    ~DepthGuard() { --p.depth_; }
  };

  const Token& name(const char* what) {
    const Token& t = expect(Tok::ident, what);
    if (keywords().count(t.text)) fail(t.span, "'" + t.text + "' is a reserved word");
    return t;
  }

  Value value() {
    SourceSpan s = peek().span;
    bool neg = accept(Tok::minus);
    const Token& t = expect(Tok::integer, "integer value");
    std::int64_t v = neg ? -t.value : t.value;
    if (v < std::numeric_limits<Value>::min() || v > std::numeric_limits<Value>::max()) {
      fail(s, "integer value out of range");
    }
    return static_cast<Value>(v);
  }

  RawEvent event() {
    const Token& n = name("variable name");
    RawEvent e{n.text, 0, n.span};
    expect(Tok::eq);
    e.value = value();
    e.span.end = toks_[pos_ - 1].span.end;
    return e;
  }

  void statement(RawDocument& doc) {
    const Token& head = peek();
    if (head.kind != Tok::ident) fail(head.span, "expected a declaration or query, found " + found(head));
    if (auto k = query_keyword(head)) {
      SourceSpan s = next().span;
      doc.queries.push_back(query(*k, s));
      return;
    }
    const std::string& w = head.text;
    if (w == "exo" || w == "var") {
      next();
      RawVar v;
      v.exo = w == "exo";
      const Token& n = name("variable name");
      v.name = n.text;
      v.name_span = n.span;
      expect(Tok::colon);
      v.range_span = peek().span;
      expect(Tok::lbrace);
      if (peek().kind != Tok::rbrace) {
        do {
          v.range.push_back(value());
        } while (accept(Tok::comma));
      }
      v.range_span.end = expect(Tok::rbrace).span.end;
      if (!v.exo) {
        expect(Tok::eq);
        v.body = expr(v.refs);
      } else if (peek().kind == Tok::eq) {
        fail(peek().span, "exogenous variables take no equation");
      }
      doc.vars.push_back(std::move(v));
    } else if (w == "typical") {
      next();
      const Token& n = name("variable name");
      RawTypical t{n.text, n.span, {}};
      expect(Tok::eq);
      t.values.push_back(value());
      while (accept(Tok::gt)) t.values.push_back(value());
      doc.typicals.push_back(std::move(t));
    } else if (w == "severity") {
      SourceSpan s = next().span;
      std::vector<RawEvent> chain{event()};
      expect(Tok::lt);
      chain.push_back(event());
      while (accept(Tok::lt)) chain.push_back(event());
      s.end = toks_[pos_ - 1].span.end;
      doc.severities.emplace_back(std::move(chain), s);
    } else if (w == "mechanism") {
      SourceSpan s = next().span;
      bool on;
      if (at_word("on")) {
        on = true;
      } else if (at_word("off")) {
        on = false;
      } else {
        fail(peek().span, "expected 'on' or 'off', found " + found(peek()));
      }
      next();
      if (doc.mechanism) fail(s, "mechanism mode set twice");
      doc.mechanism = {on, s};
    } else if (w == "behavior") {
      next();
      const Token& n = name("variable name");
      RawBehaviors b{n.text, n.span, {}};
      expect(Tok::colon);
      do {
        RawBehavior item;
        const Token& label = expect(Tok::string, "behavior label");
        item.label = label.text;
        item.span = label.span;
        expect(Tok::eq);
        item.body = expr(item.refs);
        b.items.push_back(std::move(item));
      } while (accept(Tok::gt));
      doc.behaviors.push_back(std::move(b));
    } else if (w == "norm") {
      RawNorm n;
      n.span = next().span;
      norm_world(n);
      do {
        if (accept(Tok::gt)) {
          n.strict.push_back(true);
        } else if (accept(Tok::eqeq)) {
          n.strict.push_back(false);
        } else {
          fail(peek().span, "expected '>' or '==', found " + found(peek()));
        }
        norm_world(n);
      } while (peek().kind == Tok::gt || peek().kind == Tok::eqeq);
      n.span.end = toks_[pos_ - 1].span.end;
      doc.norms.push_back(std::move(n));
    } else if (w == "context") {
      next();
      const Token& n = expect(Tok::ident, "context name");
      RawContext c{n.text, n.span, {}};
      expect(Tok::colon);
      if (peek().kind == Tok::ident) {
        do {
          c.values.push_back(event());
        } while (accept(Tok::comma));
      }
      doc.contexts.push_back(std::move(c));
    } else {
      fail(head.span, "unknown statement '" + w + "'");
    }
  }

  void norm_world(RawNorm& n) {
    SourceSpan s = expect(Tok::lparen).span;
    std::vector<RawEvent> w;
    if (peek().kind != Tok::rparen) {
      do {
        w.push_back(event());
      } while (accept(Tok::comma));
    }
    s.end = expect(Tok::rparen).span.end;
    n.worlds.push_back(std::move(w));
    n.world_spans.push_back(s);
  }

  RawQuery query(QueryKind kind, SourceSpan start) {
    RawQuery q;
    q.kind = kind;
    q.span = start;
    switch (kind) {
      case QueryKind::cause:
      case QueryKind::witnesses:
        if (kind == QueryKind::cause && accept(Tok::star)) {
          q.all_causes = true;
        } else {
          q.candidates.push_back(conjunction());
        }
        expect_word("for");
        q.effect = formula();
        break;
      case QueryKind::grade:
        expect(Tok::lbrace);
        do {
          if (accept(Tok::lparen)) {
            q.candidates.push_back(conjunction());
            expect(Tok::rparen);
          } else {
            q.candidates.push_back({event()});
          }
        } while (accept(Tok::comma));
        expect(Tok::rbrace);
        expect_word("for");
        q.effect = formula();
        break;
      case QueryKind::solve:
        break;
      case QueryKind::satisfies:
        if (accept(Tok::lbracket)) {
          if (peek().kind != Tok::rbracket) {
            do {
              const Token& n = name("variable name");
              RawEvent e{n.text, 0, n.span};
              expect(Tok::larrow);
              e.value = value();
              e.span.end = toks_[pos_ - 1].span.end;
              q.interventions.push_back(e);
            } while (accept(Tok::comma));
          }
          expect(Tok::rbracket);
        }
        q.effect = formula();
        break;
    }
    if (accept(Tok::at)) {
      const Token& c = expect(Tok::ident, "context name");
      q.context = c.text;
      q.context_span = c.span;
    }
    q.span.end = toks_[pos_ - 1].span.end;
    return q;
  }

  std::vector<RawEvent> conjunction() {
    std::vector<RawEvent> out{event()};
    while (accept(Tok::amp)) out.push_back(event());
    return out;
  }

  RawFormula formula() {
    DepthGuard g(*this, peek().span);
    RawFormula f = formula_conj();
    while (accept(Tok::pipe)) {
      RawFormula r{RawFormula::Op::disjunction, {}, {std::move(f), formula_conj()}};
      f = std::move(r);
    }
    return f;
  }

  RawFormula formula_conj() {
    RawFormula f = formula_unary();
    while (accept(Tok::amp)) {
      RawFormula r{RawFormula::Op::conjunction, {}, {std::move(f), formula_unary()}};
      f = std::move(r);
    }
    return f;
  }

  RawFormula formula_unary() {
    DepthGuard g(*this, peek().span);
    if (accept(Tok::bang)) return {RawFormula::Op::negation, {}, {formula_unary()}};
    if (accept(Tok::lparen)) {
      RawFormula f = formula();
      expect(Tok::rparen);
      return f;
    }
    const Token& n = name("variable name");
    RawEvent e{n.text, 0, n.span};
    RawFormula::Op op = RawFormula::Op::event;
    if (accept(Tok::neq)) {
      op = RawFormula::Op::neq;
    } else {
      expect(Tok::eq, "'=' or '!='");
    }
    e.value = value();
    e.span.end = toks_[pos_ - 1].span.end;
    return {op, e, {}};
  }

  Expr expr(std::vector<RawRef>& refs) {
    DepthGuard g(*this, peek().span);
    Expr e = term(refs);
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      Expr::Op op = next().kind == Tok::plus ? Expr::Op::add : Expr::Op::sub;
      e = Expr::nary(op, {e, term(refs)});
    }
    return e;
  }

  Expr term(std::vector<RawRef>& refs) {
    Expr e = unary(refs);
    while (accept(Tok::star)) e = Expr::nary(Expr::Op::mul, {e, unary(refs)});
    return e;
  }

  Expr unary(std::vector<RawRef>& refs) {
    DepthGuard g(*this, peek().span);
    if (peek().kind == Tok::minus) {
      SourceSpan s = next().span;
      if (peek().kind == Tok::integer) {
        std::int64_t v = -next().value;
        if (v < std::numeric_limits<Value>::min()) fail(s, "integer value out of range");
        return Expr::constant(static_cast<Value>(v));
      }
      return Expr::nary(Expr::Op::sub, {Expr::constant(0), unary(refs)});
    }
    return atom(refs);
  }

  Expr atom(std::vector<RawRef>& refs) {
    const Token& t = peek();
    if (t.kind == Tok::integer) {
      next();
      return Expr::constant(static_cast<Value>(t.value));
    }
    if (accept(Tok::lparen)) {
      Expr e = expr(refs);
      expect(Tok::rparen);
      return e;
    }
    if (t.kind != Tok::ident) fail(t.span, "expected an expression, found " + found(t));
    if ((t.text == "min" || t.text == "max") && peek(1).kind == Tok::lparen) {
      Expr::Op op = t.text == "min" ? Expr::Op::min : Expr::Op::max;
      SourceSpan s = next().span;
      next();
      std::vector<Expr> args{expr(refs)};
      while (accept(Tok::comma)) args.push_back(expr(refs));
      expect(Tok::rparen);
      if (args.size() < 2) fail(s, t.text + " needs at least two arguments");
      return Expr::nary(op, std::move(args));
    }
    if (t.text == "ite" && peek(1).kind == Tok::lparen) {
      next();
      next();
      Expr lhs = expr(refs);
      expect(Tok::eqeq);
      Expr rhs = expr(refs);
      expect(Tok::comma);
      Expr then = expr(refs);
      expect(Tok::comma);
      Expr otherwise = expr(refs);
      expect(Tok::rparen);
      return Expr::ite(lhs, rhs, then, otherwise);
    }
    if (t.text == "table" && peek(1).kind == Tok::lparen) {
      next();
      next();
      std::vector<Expr> args{expr(refs)};
      while (accept(Tok::comma)) args.push_back(expr(refs));
      expect(Tok::rparen);
      expect(Tok::lbrace);
      std::map<std::vector<Value>, Value> rows;
      if (peek().kind != Tok::rbrace) {
        do {
          SourceSpan rs = peek().span;
          std::vector<Value> key;
          if (accept(Tok::lparen)) {
            key.push_back(value());
            while (accept(Tok::comma)) key.push_back(value());
            expect(Tok::rparen);
          } else {
            key.push_back(value());
          }
          if (key.size() != args.size()) {
            fail(rs, "table row has " + std::to_string(key.size()) + " entries, expected " +
                         std::to_string(args.size()));
          }
          expect(Tok::rarrow);
          Value v = value();
          if (!rows.emplace(key, v).second) fail(rs, "table row listed twice");
        } while (accept(Tok::comma));
      }
      expect(Tok::rbrace);
      return Expr::table(std::move(args), std::move(rows));
    }
    const Token& n = name("variable name");
    refs.push_back({n.text, n.span});
    return Expr::var(n.text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
  std::vector<Diagnostic>& diags_;
  bool all_errors_;
};

inline std::string join_world(const CausalModel& model, const World& w) { return to_string(model, w); }

// Turns raw statements into checked objects against a built model.
class Resolver {
 public:
  Resolver(const CausalModel& model, std::vector<Diagnostic>& diags) : model_(model), diags_(diags) {}

  std::optional<PrimitiveEvent> event(const RawEvent& e) {
    auto r = model_.find(e.name);
    if (!r) return error(e.span, "unknown variable '" + e.name + "'");
    if (r->kind != VarKind::endogenous) return error(e.span, "'" + e.name + "' is exogenous");
    if (!model_.endogenous()[r->index].in_range(e.value)) {
      return error(e.span, "value " + std::to_string(e.value) + " outside the range of '" + e.name + "'");
    }
    return PrimitiveEvent{r->index, e.value};
  }

  std::optional<BooleanFormula> formula(const RawFormula& f) {
    using Op = RawFormula::Op;
    switch (f.op) {
      case Op::event:
      case Op::neq: {
        auto e = event(f.event);
        if (!e) return std::nullopt;
        auto b = BooleanFormula::event(*e);
        return f.op == Op::neq ? BooleanFormula::negation(b) : b;
      }
      case Op::negation: {
        auto k = formula(f.kids[0]);
        if (!k) return std::nullopt;
        return BooleanFormula::negation(*k);
      }
      case Op::conjunction:
      case Op::disjunction: {
        auto a = formula(f.kids[0]);
        auto b = formula(f.kids[1]);
        if (!a || !b) return std::nullopt;
        return f.op == Op::conjunction ? BooleanFormula::conjunction(*a, *b)
                                       : BooleanFormula::disjunction(*a, *b);
      }
    }
    return std::nullopt;
  }

  std::optional<CandidateCause> cause(const std::vector<RawEvent>& conj) {
    std::vector<PrimitiveEvent> evs;
    bool ok = true;
    for (const auto& e : conj) {
      auto p = event(e);
      if (!p) {
        ok = false;
        continue;
      }
      for (const auto& q : evs)
        if (q.var == p->var) {
          error(e.span, "cause mentions '" + e.name + "' twice");
          ok = false;
        }
      evs.push_back(*p);
    }
    if (!ok) return std::nullopt;
    return CandidateCause(std::move(evs));
  }

  std::optional<World> world(const std::vector<RawEvent>& assign, SourceSpan span) {
    const std::size_t n = model_.endogenous().size();
    std::vector<std::optional<Value>> vals(n);
    bool ok = true;
    for (const auto& e : assign) {
      auto p = event(e);
      if (!p) {
        ok = false;
        continue;
      }
      if (vals[p->var]) {
        error(e.span, "'" + e.name + "' assigned twice");
        ok = false;
      }
      vals[p->var] = p->value;
    }
    if (!ok) return std::nullopt;
    World w;
    for (std::size_t i = 0; i < n; ++i) {
      if (!vals[i]) return error(span, "world leaves '" + model_.endogenous()[i].name + "' unassigned");
      w.values.push_back(*vals[i]);
    }
    return w;
  }

  std::optional<Query> query(const RawQuery& q, const ParsedDocument& doc) {
    Query out;
    out.kind = q.kind;
    out.span = q.span;
    out.all_causes = q.all_causes;
    bool ok = true;
    for (const auto& c : q.candidates) {
      auto cc = cause(c);
      if (cc) {
        out.candidates.push_back(*cc);
      } else {
        ok = false;
      }
    }
    if (q.kind != QueryKind::solve) {
      auto f = formula(q.effect);
      if (f) {
        out.effect = *f;
      } else {
        ok = false;
      }
    }
    if (q.kind == QueryKind::satisfies) {
      std::vector<std::pair<std::size_t, Value>> iv;
      for (const auto& e : q.interventions) {
        auto p = event(e);
        if (!p) {
          ok = false;
          continue;
        }
        for (auto [v, x] : iv)
          if (v == p->var) {
            error(e.span, "intervention sets '" + e.name + "' twice");
            ok = false;
          }
        iv.emplace_back(p->var, p->value);
      }
      if (ok) out.formula = CausalFormula{Assignment::from(iv), out.effect};
    }
    if (!q.context.empty()) {
      if (!doc.find_context(q.context)) {
        error(q.context_span, "unknown context '" + q.context + "'");
        ok = false;
      }
      out.context = q.context;
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::nullopt_t error(SourceSpan s, std::string msg) {
    diags_.push_back({s, std::move(msg)});
    return std::nullopt;
  }

 private:
  const CausalModel& model_;
  std::vector<Diagnostic>& diags_;
};

inline bool model_level_ok(const RawDocument& raw, std::vector<Diagnostic>& diags) {
  bool ok = true;
  std::map<std::string, const RawVar*, std::less<>> seen;
  for (const auto& v : raw.vars) {
    auto [it, fresh] = seen.emplace(v.name, &v);
    if (!fresh) {
      diags.push_back({v.name_span, "variable '" + v.name + "' declared twice"});
      ok = false;
    }
    if (v.range.empty()) {
      diags.push_back({v.range_span, "range of '" + v.name + "' is empty"});
      ok = false;
    }
    std::set<Value> vs(v.range.begin(), v.range.end());
    if (vs.size() != v.range.size()) {
      diags.push_back({v.range_span, "range of '" + v.name + "' repeats a value"});
      ok = false;
    }
  }
  for (const auto& v : raw.vars) {
    for (const auto& r : v.refs) {
      if (!seen.count(r.name)) {
        diags.push_back({r.span, "undeclared variable '" + r.name + "'"});
        ok = false;
      }
    }
  }
  return ok;
}

inline void check_behavior_totality(const CausalModel& model, const Behavior& b, SourceSpan span,
                                    std::vector<Diagnostic>& diags) {
  auto refs = b.body.references();
  std::vector<const std::vector<Value>*> ranges;
  std::uint64_t combos = 1;
  for (VarRef r : refs) {
    ranges.push_back(&model.variable(r).range);
    combos *= model.variable(r).range.size();
    if (combos > detail::kMaxTotalityCombos) {
      diags.push_back({span, "behavior \"" + b.label + "\" has too many input combinations to verify"});
      return;
    }
  }
  detail::for_each_tuple(ranges, [&](const std::vector<Value>& vals) {
    auto lookup = [&](VarRef r) {
      for (std::size_t k = 0; k < refs.size(); ++k)
        if (refs[k] == r) return vals[k];
      return Value{0};
    };
    try {
      b.body.eval(lookup);
    } catch (const EvalError& e) {
      diags.push_back({span, "behavior \"" + b.label + "\": " + e.what()});
      return false;
    }
    return true;
  });
}

inline std::optional<ParsedDocument> resolve_document(const RawDocument& raw, std::vector<Diagnostic>& diags) {
  if (!model_level_ok(raw, diags)) return std::nullopt;

  CausalModel::Builder b;
  std::map<std::string, SourceSpan> decl_span;
  for (const auto& v : raw.vars) {
    decl_span[v.name] = v.name_span;
    if (v.exo) {
      b.exogenous(v.name, v.range);
    } else {
      b.endogenous(v.name, v.range, v.body);
    }
  }
  ParsedDocument doc;
  doc.model = b.build();
  if (!doc.model.valid()) {
    for (const auto& viol : doc.model.report().violations) {
      diags.push_back({decl_span[viol.variable], viol.message});
    }
    return std::nullopt;
  }
  const CausalModel& model = doc.model;
  const std::size_t before = diags.size();
  Resolver res(model, diags);

  auto endogenous_var = [&](const std::string& n, SourceSpan s) -> std::optional<std::size_t> {
    auto r = model.find(n);
    if (!r) return res.error(s, "unknown variable '" + n + "'");
    if (r->kind != VarKind::endogenous) return res.error(s, "'" + n + "' is exogenous");
    return r->index;
  };

  // Normality declarations.
  bool any_typicality = !raw.typicals.empty() || !raw.severities.empty() || raw.mechanism || !raw.behaviors.empty();
  if (any_typicality && !raw.norms.empty()) {
    res.error(raw.norms.front().span, "a document may declare typicality or explicit norms, not both");
  }
  std::optional<SourceSpan> typicality_span;
  if (any_typicality) {
    TypicalitySpec spec;
    for (const auto& t : raw.typicals) {
      if (!typicality_span) typicality_span = t.span;
      auto v = endogenous_var(t.name, t.span);
      if (!v) continue;
      if (spec.typical.count(*v)) {
        res.error(t.span, "typicality of '" + t.name + "' declared twice");
        continue;
      }
      auto a = t.values;
      auto r = model.endogenous()[*v].range;
      std::sort(a.begin(), a.end());
      std::sort(r.begin(), r.end());
      if (a != r) {
        res.error(t.span, "typicality of '" + t.name + "' must rank each value of its range exactly once");
        continue;
      }
      spec.typical[*v] = t.values;
    }
    for (const auto& [chain, span] : raw.severities) {
      if (!typicality_span) typicality_span = span;
      std::vector<std::pair<std::size_t, Value>> c;
      bool ok = true;
      for (const auto& e : chain) {
        auto p = res.event(e);
        if (!p) {
          ok = false;
          continue;
        }
        auto it = spec.typical.find(p->var);
        if (it == spec.typical.end()) {
          res.error(e.span, "'" + e.name + "' has no typicality ranking");
          ok = false;
        } else if (it->second.front() == p->value) {
          res.error(e.span, "'" + e.name + "=" + std::to_string(p->value) + "' is the most typical value");
          ok = false;
        }
        c.emplace_back(p->var, p->value);
      }
      if (ok) spec.severity.push_back(std::move(c));
    }
    if (raw.mechanism) spec.mechanism = raw.mechanism->first;
    for (const auto& bs : raw.behaviors) {
      if (!typicality_span) typicality_span = bs.span;
      auto v = endogenous_var(bs.name, bs.span);
      if (!v) continue;
      if (spec.behaviors.count(*v)) {
        res.error(bs.span, "behaviors of '" + bs.name + "' declared twice");
        continue;
      }
      std::vector<Behavior> items;
      std::set<std::string> labels;
      for (const auto& item : bs.items) {
        if (!labels.insert(item.label).second) res.error(item.span, "behavior label \"" + item.label + "\" repeated");
        std::vector<std::string> unknown;
        auto lookup = [&](const std::string& n) { return model.find(n); };
        Expr body = item.body.resolve(lookup, unknown);
        bool ok = true;
        for (const auto& r : item.refs) {
          auto ref = model.find(r.name);
          if (!ref) {
            res.error(r.span, "undeclared variable '" + r.name + "'");
            ok = false;
          } else if (ref->kind != VarKind::endogenous) {
            res.error(r.span, "behaviors may only read endogenous variables; '" + r.name + "' is exogenous");
            ok = false;
          }
        }
        if (!ok) continue;
        Behavior beh{item.label, body};
        check_behavior_totality(model, beh, item.span, diags);
        items.push_back(std::move(beh));
      }
      spec.behaviors[*v] = std::move(items);
    }
    if (diags.size() == before) {
      try {
        doc.order = NormalityOrder::derived(model, spec);
      } catch (const NormalityError& e) {
        res.error(typicality_span.value_or(SourceSpan{}), e.what());
      }
    }
    doc.typicality = std::move(spec);
  }

  std::vector<SourceSpan> norm_spans;
  for (const auto& n : raw.norms) {
    NormChain chain;
    bool ok = true;
    for (std::size_t i = 0; i < n.worlds.size(); ++i) {
      auto w = res.world(n.worlds[i], n.world_spans[i]);
      if (w) {
        chain.worlds.push_back(*w);
      } else {
        ok = false;
      }
    }
    chain.strict = n.strict;
    if (ok) {
      doc.norms.push_back(std::move(chain));
      norm_spans.push_back(n.span);
    }
  }
  if (!raw.norms.empty() && !any_typicality && diags.size() == before) {
    try {
      doc.order = NormalityOrder::explicit_order(doc.norm_statements());
    } catch (const InconsistentOrder& e) {
      std::string msg = std::string(e.what()) + ":";
      for (std::size_t i = 0; i < e.cycle.size(); ++i) {
        msg += (i ? " >= " : " ") + to_string(model, e.cycle[i]);
      }
      res.error(norm_spans.front(), msg);
    }
  }

  std::set<std::string> context_names;
  for (const auto& c : raw.contexts) {
    if (!context_names.insert(c.name).second) {
      res.error(c.span, "context '" + c.name + "' declared twice");
      continue;
    }
    const std::size_t n = model.exogenous().size();
    std::vector<std::optional<Value>> vals(n);
    bool ok = true;
    for (const auto& e : c.values) {
      auto r = model.find(e.name);
      if (!r) {
        res.error(e.span, "unknown variable '" + e.name + "'");
        ok = false;
        continue;
      }
      if (r->kind != VarKind::exogenous) {
        res.error(e.span, "contexts assign exogenous variables; '" + e.name + "' is endogenous");
        ok = false;
        continue;
      }
      if (!model.exogenous()[r->index].in_range(e.value)) {
        res.error(e.span, "value " + std::to_string(e.value) + " outside the range of '" + e.name + "'");
        ok = false;
        continue;
      }
      if (vals[r->index]) {
        res.error(e.span, "'" + e.name + "' assigned twice");
        ok = false;
      }
      vals[r->index] = e.value;
    }
    if (!ok) continue;
    Context ctx;
    for (std::size_t i = 0; i < n; ++i) {
      if (!vals[i]) {
        res.error(c.span, "context '" + c.name + "' leaves '" + model.exogenous()[i].name + "' unset");
        ok = false;
        break;
      }
      ctx.values.push_back(*vals[i]);
    }
    if (ok) doc.contexts.emplace_back(c.name, std::move(ctx));
  }

  for (const auto& q : raw.queries) {
    auto r = res.query(q, doc);
    if (r) doc.queries.push_back(std::move(*r));
  }
  if (diags.size() != before) return std::nullopt;
  return doc;
}

}  // namespace dsl_detail

inline ParseResult parse(std::string_view text, ParseOptions opts = {}) {
  ParseResult out;
  std::vector<Diagnostic> diags;
  dsl_detail::Lexer lexer(text, diags);
  auto toks = lexer.run();
  if (!diags.empty() && !opts.all_errors) {
    out.diagnostics = {diags.front()};
    return out;
  }
  dsl_detail::Parser parser(std::move(toks), diags, opts.all_errors);
  auto raw = parser.document();
  if (diags.empty()) {
    out.document = dsl_detail::resolve_document(raw, diags);
  }
  std::stable_sort(diags.begin(), diags.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.span.begin < b.span.begin; });
  if (!opts.all_errors && diags.size() > 1) diags.resize(1);
  out.diagnostics = std::move(diags);
  if (!out.diagnostics.empty()) out.document.reset();
  return out;
}

inline ParsedDocument parse_document(std::string_view text, ParseOptions opts = {}) {
  ParseResult r = parse(text, opts);
  if (!r.ok()) throw ParseError(std::move(r.diagnostics));
  return std::move(*r.document);
}

// Parses one query against `doc`.  When the text does not begin with a query
// keyword, `default_kind` supplies it (so "@ u11" is a solve query under
// default_kind = solve).
inline Query parse_query(const ParsedDocument& doc, std::string_view text,
                         std::optional<QueryKind> default_kind = std::nullopt) {
  std::vector<Diagnostic> diags;
  dsl_detail::Lexer lexer(text, diags);
  auto toks = lexer.run();
  if (!diags.empty()) throw ParseError(std::move(diags));
  dsl_detail::Parser parser(std::move(toks), diags, false);
  auto raw = parser.lone_query(default_kind);
  if (!raw) throw ParseError(std::move(diags));
  dsl_detail::Resolver res(doc.model, diags);
  auto q = res.query(*raw, doc);
  if (!q) throw ParseError(std::move(diags));
  return std::move(*q);
}

inline std::string to_string(const CausalModel& model, const Query& q) {
  std::string out = to_string(q.kind);
  switch (q.kind) {
    case QueryKind::cause:
    case QueryKind::witnesses:
      out += " " + (q.all_causes ? std::string("*") : to_string(model, q.candidates.front()));
      out += " for " + to_string(model, q.effect);
      break;
    case QueryKind::grade:
      out += " {";
      for (std::size_t i = 0; i < q.candidates.size(); ++i) {
        if (i) out += ", ";
        const auto& c = q.candidates[i];
        out += c.size() == 1 ? to_string(model, c) : "(" + to_string(model, c) + ")";
      }
      out += "} for " + to_string(model, q.effect);
      break;
    case QueryKind::solve:
      break;
    case QueryKind::satisfies:
      out += " " + to_string(model, q.formula);
      break;
  }
  if (!q.context.empty()) out += " @ " + q.context;
  return out;
}

inline std::string print_document(const ParsedDocument& doc) {
  const CausalModel& m = doc.model;
  std::string out;
  auto range = [](const std::vector<Value>& r) {
    std::string s = "{";
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? ", " : "") + std::to_string(r[i]);
    return s + "}";
  };
  for (const auto& v : m.exogenous()) out += "exo " + v.name + " : " + range(v.range) + "\n";
  for (std::size_t i = 0; i < m.endogenous().size(); ++i) {
    const auto& v = m.endogenous()[i];
    out += "var " + v.name + " : " + range(v.range) + " = " + m.equation(i).to_string() + "\n";
  }
  if (doc.typicality) {
    const TypicalitySpec& t = *doc.typicality;
    if (!t.typical.empty() || !t.severity.empty() || !t.behaviors.empty() || t.mechanism) out += "\n";
    for (const auto& [var, vals] : t.typical) {
      out += "typical " + m.endogenous()[var].name + " =";
      for (std::size_t i = 0; i < vals.size(); ++i) out += (i ? " > " : " ") + std::to_string(vals[i]);
      out += "\n";
    }
    for (const auto& chain : t.severity) {
      out += "severity";
      for (std::size_t i = 0; i < chain.size(); ++i) {
        out += (i ? " < " : " ") + m.endogenous()[chain[i].first].name + "=" + std::to_string(chain[i].second);
      }
      out += "\n";
    }
    out += std::string("mechanism ") + (t.mechanism ? "on" : "off") + "\n";
    for (const auto& [var, bs] : t.behaviors) {
      out += "behavior " + m.endogenous()[var].name + " :";
      for (std::size_t i = 0; i < bs.size(); ++i) {
        out += (i ? " > " : " ") + ("\"" + bs[i].label + "\" = ") + bs[i].body.to_string();
      }
      out += "\n";
    }
  }
  if (!doc.norms.empty()) out += "\n";
  for (const auto& n : doc.norms) {
    out += "norm " + to_string(m, n.worlds[0]);
    for (std::size_t i = 1; i < n.worlds.size(); ++i) {
      out += (n.strict[i - 1] ? " > " : " == ") + to_string(m, n.worlds[i]);
    }
    out += "\n";
  }
  if (!doc.contexts.empty()) out += "\n";
  for (const auto& [name, ctx] : doc.contexts) {
    out += "context " + name + " :";
    for (std::size_t i = 0; i < ctx.values.size(); ++i) {
      out += (i ? ", " : " ") + m.exogenous()[i].name + "=" + std::to_string(ctx.values[i]);
    }
    out += "\n";
  }
  if (!doc.queries.empty()) out += "\n";
  for (const auto& q : doc.queries) out += to_string(m, q) + "\n";
  return out;
}

}  // namespace actcause
