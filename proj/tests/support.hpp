#pragma once

#include <set>
#include <string>
#include <vector>

#include "tmonad/equations.hpp"
#include "tmonad/languages.hpp"
#include "tmonad/sexpr.hpp"
#include "tmonad/spec.hpp"
#include "tmonad/syntax.hpp"
#include "tmonad/transitions.hpp"

namespace testing_support {

using namespace tmonad;

inline Type ty(const std::string& text) { return parse_type(read_sexpr(text)); }

inline NamedContext named(const std::string& text) { return parse_named_context(read_sexpr(text)); }

inline Term term(const LanguageBundle& lang, NamedContext& ctx, const std::string& text,
                 const std::optional<Type>& type = std::nullopt) {
  return parse_any(lang, text, Expect::Term, type, ctx);
}

inline Term state(const LanguageBundle& lang, NamedContext& ctx, const std::string& text,
                  const std::optional<Type>& type = std::nullopt) {
  return parse_any(lang, text, Expect::S1, type, ctx);
}

// printed normal form of a source or target state
inline std::string nstate(const LanguageBundle& lang, NamedContext& ctx, const std::string& text,
                          const std::optional<Type>& type = std::nullopt, Expect what = Expect::S1) {
  Term s = parse_any(lang, text, what, type, ctx);
  return to_sexpr(normalize_state(lang, ctx.types, s));
}

inline std::set<std::string> targets(const LanguageBundle& lang, const Context& ctx, const Term& s,
                                     std::size_t fuel = 8) {
  std::set<std::string> out;
  for (const auto& [t, p] : derive(lang, source_type(lang, ctx, s), ctx, s, DeriveConfig{fuel, 1}))
    out.insert(to_sexpr(t));
  return out;
}

inline std::set<std::set<std::string>> classes(const Partition& p) {
  std::set<std::set<std::string>> out;
  for (const auto& c : p.classes) {
    std::set<std::string> s;
    for (const auto& t : c) s.insert(to_sexpr(t));
    out.insert(s);
  }
  return out;
}

}  // namespace testing_support
