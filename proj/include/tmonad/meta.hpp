#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>

#include "tmonad/syntax.hpp"

namespace tmonad {

// Images of metavariables. Term and state metavariables hold Val::of(term);
// shape metavariables hold a whole value. The image of x lives over the
// ambient context extended by binders(x).
struct Assignment {
  TypeMap types;
  std::map<std::string, Val> values;

  bool operator==(const Assignment&) const;
};

// Primitive (built-in) morphisms usable in rule targets. They receive the
// context of their occurrence and the raw images of their arguments; a
// metavariable argument is passed over its own binder-extended context.
using PrimFn = std::function<Term(const Context& ctx, const std::vector<Val>& args, const std::vector<Context>& argCtx)>;
const PrimFn* find_prim(const std::string& name);

struct EvalScope {
  std::size_t gamma = 0;  // length of the ambient context; (bvar i) is level gamma + i
  Context ctx;            // full context at the evaluation point
  const std::vector<MetaVarDecl>* decls = nullptr;  // needed by primitives only
};

Term eval_metaterm(const MetaTerm& mt, const Assignment& asg, const EvalScope& scope);
Val eval_mval(const MVal& v, const Assignment& asg, const EvalScope& scope);
// convenience for equations: ambient context ctx, no binders in scope
Term eval_metaterm(const MetaTerm& mt, const Assignment& asg, const Context& ctx);

void collect_mvars(const MetaTerm& mt, std::set<std::string>& out);
void collect_mvars(const MVal& v, std::set<std::string>& out);
bool has_subst_or_prim(const MetaTerm& mt);
bool has_subst_or_prim(const MVal& v);

// ---------------------------------------------------------------- static checking

struct MetaEnv {
  const MonadSignature* monad = nullptr;
  const StateSignature* s1 = nullptr;
  const StateSignature* s2 = nullptr;
  const std::vector<MetaVarDecl>* decls = nullptr;
  std::vector<Type> base;  // judgement binders
};

// Type() is returned for primitive nodes whose type is not known statically
Type check_term_mt(const MetaEnv& env, const MetaTerm& mt, const std::vector<Type>& stack);
Type check_state_mt(const MetaEnv& env, const StateSignature& st, const MetaTerm& mt, const std::vector<Type>& stack);

// binders of the first metavariable occurrence, minus its local binder stack
std::vector<Type> infer_premise_binders(const MetaTerm& src, const std::vector<MetaVarDecl>& decls);

void validate_equation(const MonadSignature& sig, const EquationSpec& eq);
void validate_state_equation(const MonadSignature& sig, const StateSignature& st, const EquationSpec& eq);
// typechecks premises and conclusion, fills in inferred premise binders and
// performs the moding check
void validate_rule(const LanguageBundle& lang, RuleSpec& rule);
void validate_bundle(LanguageBundle& lang);

}  // namespace tmonad
