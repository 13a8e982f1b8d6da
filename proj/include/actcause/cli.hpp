#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "actcause/dsl.hpp"
#include "actcause/graded.hpp"
#include "actcause/hp.hpp"
#include "actcause/normality.hpp"

namespace actcause::cli {

using Json = nlohmann::ordered_json;

enum class Command { validate, solve, satisfies, check, witnesses, grade };
enum class Mode { hp, extended };
enum class Format { text, json };

enum ExitCode : int { kAnswered = 0, kUsage = 1, kResource = 2, kInternal = 3 };

struct RunConfig {
  Command command = Command::check;
  std::vector<std::string> inputs;
  std::vector<std::string> queries;  // empty: run the document's own queries
  std::optional<std::string> context;
  Format format = Format::text;
  Mode mode = Mode::hp;
  std::uint64_t max_search = SearchLimits{}.max_candidates;
  std::size_t all_causes = 1;  // conjunct bound for `cause *` queries
};

struct RunOutput {
  int exit_code = kAnswered;
  std::string out;
  std::string err;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class InvariantFailure : public Error {
 public:
  using Error::Error;
};

inline const char* to_string(Mode m) { return m == Mode::hp ? "hp" : "extended"; }

namespace detail {

inline Json world_json(const CausalModel& m, const World& w) {
  Json j = Json::object();
  for (std::size_t i = 0; i < w.size(); ++i) j[m.endogenous()[i].name] = w[i];
  return j;
}

inline std::string indices_text(const CausalModel& m, const std::vector<std::size_t>& vars,
                                const std::vector<Value>& vals) {
  std::string s = "(";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    s += (i ? ", " : "") + m.endogenous()[vars[i]].name + "=" + std::to_string(vals[i]);
  }
  return s + ")";
}

struct Session {
  const ParsedDocument& doc;
  const RunConfig& cfg;
  Json json = Json::array();
  std::string text;

  const CausalModel& model() const { return doc.model; }
  SearchLimits limits() const { return SearchLimits{cfg.max_search}; }

  std::pair<std::string, Context> context_for(const Query& q) const {
    std::string name = !q.context.empty() ? q.context : cfg.context.value_or("");
    if (!name.empty()) {
      const Context* c = doc.find_context(name);
      if (!c) throw UsageError("unknown context '" + name + "'");
      return {name, *c};
    }
    if (doc.contexts.size() == 1) return doc.contexts.front();
    if (model().exogenous().empty()) return {"", Context{}};
    throw UsageError("query '" + to_string(model(), q) + "' needs a context (use @ NAME or --context)");
  }

  std::string label(const Query& q, const std::string& ctx) const {
    std::string s = to_string(model(), q);
    if (q.context.empty() && !ctx.empty()) s += " @ " + ctx;
    return s;
  }

  void solve_query(const Query& q) {
    auto [name, ctx] = context_for(q);
    World w = solve(model(), ctx);
    json.push_back(Json{{"query", label(q, name)}, {"world", world_json(model(), w)}});
    text += label(q, name) + "\n  " + to_string(model(), w) + "\n";
  }

  void satisfies_query(const Query& q) {
    auto [name, ctx] = context_for(q);
    bool v = satisfies(model(), ctx, q.formula);
    json.push_back(Json{{"query", label(q, name)}, {"satisfied", v}});
    text += label(q, name) + "\n  " + (v ? "true" : "false") + "\n";
  }

  // Verdict fields as seen from the configured mode.
  struct View {
    bool is_cause;
    bool ac3;
    Clause failed;
    std::vector<World> best;
  };

  View view(const CauseVerdict& v) const {
    if (cfg.mode == Mode::extended) return {v.is_cause_extended, v.ac3_extended, v.failed_extended, v.best_witnesses};
    return {v.is_cause_hp, v.ac3_hp, v.failed_hp, best_witnesses(doc.order, v.hp_witnesses)};
  }

  void check_invariants(const CauseVerdict& v) const {
    for (const auto& a : v.admissible_witnesses)
      if (std::find(v.hp_witnesses.begin(), v.hp_witnesses.end(), a) == v.hp_witnesses.end())
        throw InvariantFailure("admissible witness missing from the witness list");
    if (v.cause.size() == 1 && v.is_cause_extended && !v.is_cause_hp)
      throw InvariantFailure("extended cause that is not an HP cause");
  }

  CauseVerdict verdict(CauseSearch& search, const CandidateCause& c, const BooleanFormula& phi) const {
    CauseVerdict v = is_extended_cause(search, doc.order, c, phi);
    check_invariants(v);
    return v;
  }

  Json verdict_json(const std::string& query, const CauseVerdict& v, const World& actual) const {
    View s = view(v);
    Json ws = Json::array();
    for (const auto& r : v.hp_witnesses) {
      Json w;
      Json wset = Json::array();
      Json wvals = Json::object();
      for (std::size_t i = 0; i < r.w_set.size(); ++i) {
        wset.push_back(model().endogenous()[r.w_set[i]].name);
        wvals[model().endogenous()[r.w_set[i]].name] = r.w_values[i];
      }
      Json xp = Json::object();
      for (std::size_t i = 0; i < r.x_prime.size(); ++i)
        xp[model().endogenous()[v.cause.conjuncts()[i].var].name] = r.x_prime[i];
      w["w_set"] = wset;
      w["w_values"] = wvals;
      w["x_prime"] = xp;
      w["world"] = world_json(model(), r.world);
      w["admissible"] = doc.order.at_least_as_normal(r.world, actual);
      if (doc.has_normality()) {
        w["relation_to_actual"] = actcause::to_string(doc.order.compare(r.world, actual));
      } else {
        w["relation_to_actual"] = nullptr;
      }
      ws.push_back(std::move(w));
    }
    Json best = Json::array();
    for (const auto& b : s.best) best.push_back(world_json(model(), b));
    return Json{{"query", query},
                {"mode", to_string(cfg.mode)},
                {"actual", world_json(model(), actual)},
                {"ac1", v.ac1},
                {"is_cause", s.is_cause},
                {"witnesses", std::move(ws)},
                {"best_witnesses", std::move(best)},
                {"ac3", s.ac3}};
  }

  void verdict_text(const std::string& query, const CauseVerdict& v, const World& actual, bool all_witnesses) {
    View s = view(v);
    text += query + "  [" + to_string(cfg.mode) + "]\n";
    text += "  actual: " + to_string(model(), actual) + "\n";
    text += std::string("  verdict: ") + (s.is_cause ? "cause" : "not a cause");
    if (!s.is_cause) text += std::string(" (") + to_string(s.failed) + " fails)";
    text += "\n";
    const std::size_t shown = all_witnesses ? v.hp_witnesses.size() : std::min<std::size_t>(v.hp_witnesses.size(), 8);
    text += "  witnesses: " + std::to_string(v.hp_witnesses.size());
    if (cfg.mode == Mode::extended) text += ", admissible: " + std::to_string(v.admissible_witnesses.size());
    text += "\n";
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& r = v.hp_witnesses[i];
      std::vector<std::size_t> xs;
      for (const auto& e : v.cause.conjuncts()) xs.push_back(e.var);
      text += "    W=" + indices_text(model(), r.w_set, r.w_values) + " x'=" + indices_text(model(), xs, r.x_prime) +
              " -> " + to_string(model(), r.world);
      if (doc.has_normality()) text += std::string("  ") + actcause::to_string(doc.order.compare(r.world, actual));
      text += "\n";
    }
    if (shown < v.hp_witnesses.size()) {
      text += "    ... " + std::to_string(v.hp_witnesses.size() - shown) + " more (use the witnesses command)\n";
    }
    if (!s.best.empty()) {
      text += "  best witnesses:";
      for (const auto& b : s.best) text += " " + to_string(model(), b);
      text += "\n";
    }
  }

  void cause_query(const Query& q, bool all_witnesses) {
    auto [name, ctx] = context_for(q);
    CauseSearch search(model(), ctx, limits());
    if (q.all_causes) {
      Json causes = Json::array();
      std::string lines;
      for_each_actual_conjunction(search.actual(), cfg.all_causes, [&](const CandidateCause& c) {
        CauseVerdict v = verdict(search, c, q.effect);
        if (view(v).is_cause) {
          causes.push_back(to_string(model(), c));
          lines += "  " + to_string(model(), c) + "\n";
        }
      });
      json.push_back(Json{{"query", label(q, name)},
                          {"mode", to_string(cfg.mode)},
                          {"max_conjuncts", cfg.all_causes},
                          {"causes", std::move(causes)}});
      text += label(q, name) + "  [" + to_string(cfg.mode) + "]\n" + (lines.empty() ? "  no causes\n" : lines);
      return;
    }
    CauseVerdict v = verdict(search, q.candidates.front(), q.effect);
    json.push_back(verdict_json(label(q, name), v, search.actual()));
    verdict_text(label(q, name), v, search.actual(), all_witnesses);
  }

  void grade_query(const Query& q) {
    auto [name, ctx] = context_for(q);
    CauseSearch search(model(), ctx, limits());
    std::vector<CauseVerdict> verdicts;
    std::vector<View> views;
    for (const auto& c : q.candidates) {
      verdicts.push_back(verdict(search, c, q.effect));
      views.push_back(view(verdicts.back()));
    }
    Json vj = Json::array();
    for (const auto& v : verdicts) vj.push_back(verdict_json(to_string(model(), v.cause), v, search.actual()));
    Json grading = Json::array();
    std::string lines;
    auto cname = [&](std::size_t i) { return to_string(model(), q.candidates[i]); };
    for (std::size_t i = 0; i < views.size(); ++i) {
      for (std::size_t j = i + 1; j < views.size(); ++j) {
        GradingEntry e = grade_pair(doc.order, views[i].is_cause, views[i].best, i, views[j].is_cause, views[j].best, j);
        switch (e.relation) {
          case GradingEntry::Relation::above:
            grading.push_back(Json{{"above", cname(e.first)}, {"below", cname(e.second)}});
            lines += "  " + cname(e.first) + " above " + cname(e.second) + "\n";
            break;
          case GradingEntry::Relation::equal:
            grading.push_back(Json{{"equal", Json::array({cname(e.first), cname(e.second)})}});
            lines += "  " + cname(e.first) + " equal to " + cname(e.second) + "\n";
            break;
          case GradingEntry::Relation::incomparable:
            grading.push_back(Json{{"incomparable", Json::array({cname(e.first), cname(e.second)})}});
            lines += "  " + cname(e.first) + " incomparable with " + cname(e.second) + "\n";
            break;
        }
      }
    }
    json.push_back(Json{{"query", label(q, name)},
                        {"mode", to_string(cfg.mode)},
                        {"verdicts", std::move(vj)},
                        {"grading", std::move(grading)}});
    text += label(q, name) + "  [" + to_string(cfg.mode) + "]\n";
    for (std::size_t i = 0; i < views.size(); ++i) {
      text += "  " + cname(i) + ": " + (views[i].is_cause ? "cause" : "not a cause");
      if (!views[i].best.empty()) {
        text += "; best witnesses:";
        for (const auto& b : views[i].best) text += " " + to_string(model(), b);
      }
      text += "\n";
    }
    text += lines;
  }
};

inline std::optional<QueryKind> default_kind(Command c) {
  switch (c) {
    case Command::solve: return QueryKind::solve;
    case Command::satisfies: return QueryKind::satisfies;
    case Command::check: return QueryKind::cause;
    case Command::witnesses: return QueryKind::witnesses;
    case Command::grade: return QueryKind::grade;
    case Command::validate: return std::nullopt;
  }
  return std::nullopt;
}

inline bool accepts(Command c, QueryKind k) {
  switch (c) {
    case Command::solve: return k == QueryKind::solve;
    case Command::satisfies: return k == QueryKind::satisfies;
    case Command::check:
    case Command::witnesses: return k == QueryKind::cause || k == QueryKind::witnesses;
    case Command::grade: return k == QueryKind::grade;
    case Command::validate: return false;
  }
  return false;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// Answers the configured queries against one parsed document, appending to
// `json` (an array) and `text`.
inline void run_document(const RunConfig& cfg, const ParsedDocument& doc, Json& json, std::string& text) {
  if (cfg.mode == Mode::extended && !doc.has_normality()) {
    throw UsageError("--mode extended needs typicality or norm declarations in the document");
  }
  detail::Session s{doc, cfg, Json::array(), {}};
  if (cfg.command == Command::validate) {
    s.json.push_back(Json{{"valid", true},
                          {"exogenous", doc.model.exogenous().size()},
                          {"endogenous", doc.model.endogenous().size()},
                          {"contexts", doc.contexts.size()},
                          {"queries", doc.queries.size()}});
    s.text += "ok: " + std::to_string(doc.model.exogenous().size()) + " exogenous, " +
              std::to_string(doc.model.endogenous().size()) + " endogenous, " +
              std::to_string(doc.contexts.size()) + " contexts, " + std::to_string(doc.queries.size()) +
              " queries\n";
  } else {
    std::vector<Query> queries;
    for (const auto& q : cfg.queries) {
      Query parsed = parse_query(doc, q, detail::default_kind(cfg.command));
      if (!detail::accepts(cfg.command, parsed.kind)) {
        throw UsageError(std::string("a ") + to_string(parsed.kind) + " query does not fit this command");
      }
      queries.push_back(std::move(parsed));
    }
    if (cfg.queries.empty()) {
      for (const auto& q : doc.queries)
        if (detail::accepts(cfg.command, q.kind) &&
            (cfg.command != Command::witnesses || q.kind == QueryKind::witnesses))
          queries.push_back(q);
      if (cfg.command == Command::witnesses && queries.empty()) {
        for (const auto& q : doc.queries)
          if (q.kind == QueryKind::cause && !q.all_causes) queries.push_back(q);
      }
      if (cfg.command == Command::solve && queries.empty()) {
        for (const auto& [name, ctx] : doc.contexts) {
          Query q;
          q.kind = QueryKind::solve;
          q.context = name;
          queries.push_back(q);
        }
      }
    }
    for (const auto& q : queries) {
      switch (q.kind) {
        case QueryKind::solve: s.solve_query(q); break;
        case QueryKind::satisfies: s.satisfies_query(q); break;
        case QueryKind::cause:
        case QueryKind::witnesses: s.cause_query(q, cfg.command == Command::witnesses); break;
        case QueryKind::grade: s.grade_query(q); break;
      }
    }
  }
  for (auto& j : s.json) json.push_back(std::move(j));
  text += s.text;
}

// Reads every input file and answers its queries.  Errors map to exit codes
// and stop the run.
inline RunOutput run(const RunConfig& cfg) {
  RunOutput out;
  Json json = Json::array();
  std::string text;
  try {
    if (cfg.inputs.empty()) throw UsageError("no input file");
    for (const auto& path : cfg.inputs) {
      ParseResult parsed = parse(detail::read_file(path));
      if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics) out.err += path + ":" + d.to_string() + "\n";
        out.exit_code = kUsage;
        return out;
      }
      if (cfg.inputs.size() > 1 && cfg.format == Format::text) text += "== " + path + "\n";
      run_document(cfg, *parsed.document, json, text);
    }
  } catch (const ParseError& e) {
    for (const auto& d : e.diagnostics) out.err += "query:" + d.to_string() + "\n";
    out.exit_code = kUsage;
    return out;
  } catch (const ResourceLimitError& e) {
    out.err = std::string("resource limit: ") + e.what() + "\n";
    out.exit_code = kResource;
    return out;
  } catch (const InvariantFailure& e) {
    out.err = std::string("internal error: ") + e.what() + "\n";
    out.exit_code = kInternal;
    return out;
  } catch (const EvalError& e) {
    out.err = std::string("internal error: ") + e.what() + "\n";
    out.exit_code = kInternal;
    return out;
  } catch (const Error& e) {
    out.err = std::string("error: ") + e.what() + "\n";
    out.exit_code = kUsage;
    return out;
  } catch (const std::exception& e) {
    out.err = std::string("internal error: ") + e.what() + "\n";
    out.exit_code = kInternal;
    return out;
  }
  out.out = cfg.format == Format::json ? json.dump(2) + "\n" : text;
  return out;
}

// Full command line handling; returns the process exit status.
inline int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decide and grade actual causation in structural causal models"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string mode = "hp";
  std::string format = "text";
  std::string context;

  struct Spec {
    const char* name;
    Command command;
    const char* help;
  };
  const Spec specs[] = {
      {"validate", Command::validate, "Parse and validate model files"},
      {"solve", Command::solve, "Solve a model in a context"},
      {"satisfies", Command::satisfies, "Evaluate causal formulas"},
      {"check", Command::check, "Decide whether a conjunction is an actual cause"},
      {"witnesses", Command::witnesses, "List every witness for a candidate cause"},
      {"grade", Command::grade, "Grade candidate causes against each other"},
  };
  std::vector<std::string> positional;
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("file", positional, "model file followed by optional query strings")->required();
    sub->add_option("--mode", mode, "hp or extended")->check(CLI::IsMember({"hp", "extended"}));
    sub->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--max-search", cfg.max_search, "cap on candidate witness settings")->check(CLI::PositiveNumber);
    sub->add_option("--context", context, "context used by queries that name none");
    sub->add_option("--all-causes", cfg.all_causes, "conjunct bound for 'cause *' queries")->check(CLI::PositiveNumber);
    Command c = spec.command;
    sub->callback([&cfg, c] { cfg.command = c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kAnswered : kUsage;
  }
  cfg.mode = mode == "extended" ? Mode::extended : Mode::hp;
  cfg.format = format == "json" ? Format::json : Format::text;
  if (!context.empty()) cfg.context = context;
  // The first positional is the model file; the rest are queries.  A
  // positional that names a readable .scm.txt file is treated as another
  // input.
  for (std::size_t i = 0; i < positional.size(); ++i) {
    const auto& p = positional[i];
    bool is_file = i == 0 || (p.size() > 8 && p.ends_with(".scm.txt"));
    (is_file ? cfg.inputs : cfg.queries).push_back(p);
  }
  RunOutput r = run(cfg);
  out << r.out;
  err << r.err;
  return r.exit_code;
}

}  // namespace actcause::cli
