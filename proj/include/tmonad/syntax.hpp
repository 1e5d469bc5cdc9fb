#pragma once

#include <functional>
#include <map>
#include <optional>
#include <tuple>

#include "tmonad/model.hpp"

namespace tmonad {

Type typecheck_term(const MonadSignature& sig, const Context& ctx, const Term& t);
Type typecheck_state(const MonadSignature& sig, const StateSignature& st, const Context& ctx, const Term& s);
// own: signature that Rec shapes refer to (null outside state operations)
void typecheck_val(const MonadSignature& sig, const StateSignature* own, const Context& ctx, const Val& v,
                   const Shape& shape);

Term mk_var(const Context& ctx, std::size_t index);
Term mk_op(const MonadSignature& sig, const Context& ctx, const std::string& name, std::vector<Type> typeArgs,
           std::vector<Val> argValues);

// re-sorts every bag in the tree
Term canonicalize(const Term& t);
Val canonicalize(const Val& v);

Context extend(Context ctx, const std::vector<Type>& binders);

// ---------------------------------------------------------------- renaming

struct Renaming {
  Context source, target;
  std::vector<std::size_t> map;
};

Term rename(const Term& t, const Renaming& f);
// unchecked: f maps [0,n) into [0,m); bound levels shift from n to m.
// Returns null if f is undefined on a free variable that occurs.
Term rename_raw(const Term& t, std::size_t n, std::size_t m,
                const std::function<std::optional<std::size_t>(std::size_t)>& f);
Val rename_raw(const Val& v, std::size_t n, std::size_t m,
               const std::function<std::optional<std::size_t>(std::size_t)>& f);
// inclusion of a context of length n into one with k more trailing entries
Term weaken(const Term& t, std::size_t n, std::size_t k);
Val weaken(const Val& v, std::size_t n, std::size_t k);
// inverse of weaken; null when one of the k dropped variables occurs
Term strengthen(const Term& t, std::size_t n, std::size_t k);
Val strengthen(const Val& v, std::size_t n, std::size_t k);
bool mentions(const Term& t, std::size_t index);
bool mentions(const Val& v, std::size_t index);
std::size_t count_occurrences(const Term& t, std::size_t index);

// ---------------------------------------------------------------- substitution

struct Substitution {
  Context source, target;
  std::vector<Term> images;

  static Substitution identity(const Context& ctx);
};

Substitution lift_subst(const Substitution& s, const std::vector<Type>& binders);
Term substitute(const Term& t, const Substitution& s);
Val substitute(const Val& v, const Substitution& s);
// (s ; t)(i) = substitute(s(i), t)
Substitution compose(const Substitution& s, const Substitution& t);
void check_substitution(const MonadSignature& sig, const Substitution& s);
Substitution renaming_subst(const Renaming& f);

// ---------------------------------------------------------------- enumeration

struct EnumConfig {
  std::size_t bagBound = 2;            // maximal bag cardinality
  std::vector<Type> typeCandidates;    // admissible instantiations of free type parameters
  std::size_t limit = 4000000;         // NotEnumerable beyond this many nodes
};

class Enumerator {
 public:
  Enumerator(const MonadSignature& sig, EnumConfig cfg = {});

  const std::vector<Term>& terms(const Context& ctx, const Type& ty, std::size_t depth);
  const std::vector<Term>& states(const StateSignature& st, const Context& ctx, const Type& ty, std::size_t depth);
  std::vector<Val> values(const StateSignature* own, const Context& ctx, const Shape& shape, std::size_t depth);

 private:
  std::vector<Term> build(const std::vector<OperationScheme>& ops, Node::Kind kind, const StateSignature* own,
                          const Context& ctx, const Type& ty, std::size_t depth);

  const MonadSignature& sig_;
  EnumConfig cfg_;
  std::size_t produced_ = 0;
  std::map<std::tuple<const void*, Context, Type, std::size_t>, std::vector<Term>> memo_;
};

std::vector<Term> enumerate_terms(const MonadSignature& sig, const Context& ctx, const Type& ty, std::size_t depth,
                                  const EnumConfig& cfg = {});

// deterministic order used for enumeration output: (depth, structural order)
bool enum_less(const Term& a, const Term& b);

}  // namespace tmonad
