#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmonad/gsos.hpp"
#include "tmonad/sexpr.hpp"

namespace tmonad {

// Throws Error(Parse) on malformed text and Error(Validation) on ill-typed,
// ill-moded or unresolved declarations; messages start with line:col.
LanguageBundle parse_spec(const std::string& text);
LanguageBundle bundle_from_sexpr(const SExpr& doc);
std::string print_spec(const LanguageBundle& lang);
SExpr spec_sexpr(const LanguageBundle& lang);

struct Document {
  LanguageBundle lang;                 // compiled, for gsos systems
  std::optional<GSOSSystem> gsos;
};
Document parse_document(const std::string& text);
std::string print_document(const Document& doc);

// indented rendering, one datum per line beyond the width
std::string layout(const SExpr& e, std::size_t width = 96);

// ---------------------------------------------------------------- named terms

struct NamedContext {
  std::vector<std::string> names;
  Context types;
};

// ((x A) (f (-> A A)) ...)
NamedContext parse_named_context(const SExpr& e);
SExpr named_context_sexpr(const NamedContext& ctx);

enum class Expect { Term, S1, S2 };

// Named syntax: binders are written as a name list before the argument,
// type arguments are inferred (or given as (: T...)), bare terms are coerced
// into a state signature through its injection. Unknown names extend ctx
// with types inferred from their use; unresolved types default to the first
// atom of the universe.
Term parse_named(const LanguageBundle& lang, const SExpr& e, Expect what, const std::optional<Type>& type,
                 NamedContext& ctx);
// accepts either the named or the canonical (op ...) / (var i) / (state ...) form
Term parse_any(const LanguageBundle& lang, const std::string& text, Expect what, const std::optional<Type>& type,
               NamedContext& ctx);
SExpr named_sexpr(const LanguageBundle& lang, const NamedContext& ctx, const Term& t, bool elide = true);
std::string named_str(const LanguageBundle& lang, const NamedContext& ctx, const Term& t, bool elide = true);

}  // namespace tmonad
