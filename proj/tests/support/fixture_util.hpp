#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "actcause/corpus.hpp"
#include "actcause/graded.hpp"

#ifndef ACTCAUSE_FIXTURE_DIR
#error "ACTCAUSE_FIXTURE_DIR must point at the fixture directory"
#endif

namespace testutil {

using namespace actcause;

inline std::filesystem::path fixture_dir() { return ACTCAUSE_FIXTURE_DIR; }

inline ParsedDocument load(const std::string& name) {
  return load_fixture(fixture_dir() / (name + std::string(kFixtureSuffix))).document;
}

inline const Context& context(const ParsedDocument& doc, const std::string& name) {
  const Context* c = doc.find_context(name);
  if (!c) throw std::invalid_argument("no context '" + name + "'");
  return *c;
}

inline PrimitiveEvent ev(const ParsedDocument& doc, const std::string& var, Value v) {
  return make_event(doc.model, var, v);
}

inline BooleanFormula is(const ParsedDocument& doc, const std::string& var, Value v) {
  return BooleanFormula::event(ev(doc, var, v));
}

inline CandidateCause cause(const ParsedDocument& doc, std::vector<std::pair<std::string, Value>> conj) {
  std::vector<PrimitiveEvent> evs;
  for (const auto& [n, v] : conj) evs.push_back(ev(doc, n, v));
  return CandidateCause(std::move(evs));
}

inline World world(const ParsedDocument& doc, std::vector<std::pair<std::string, Value>> vals) {
  return make_world(doc.model, vals);
}

// Verdict with the document's own order (trivial when it declares none).
inline CauseVerdict verdict(const ParsedDocument& doc, const std::string& ctx,
                            std::vector<std::pair<std::string, Value>> conj, const std::string& var, Value v) {
  CauseSearch search(doc.model, context(doc, ctx));
  return is_extended_cause(search, doc.order, cause(doc, std::move(conj)), is(doc, var, v));
}

}  // namespace testutil
