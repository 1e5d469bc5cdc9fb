#include "tmonad/syntax.hpp"

#include <algorithm>
#include <set>

#include "tmonad/sexpr.hpp"

namespace tmonad {

namespace {

[[noreturn]] void type_error(const std::string& msg) { throw Error(ErrorKind::Type, msg); }

bool in_universe(const MonadSignature& sig, const Type& t) {
  if (sig.universe.contains(t)) return true;
  return sig.embedded && sig.embedded->universe.contains(t);
}

const std::vector<OperationScheme>& state_ops(const StateSignature& st) { return st.ops; }

TypeMap bind_params(const OperationScheme& sch, const std::vector<Type>& tyargs) {
  if (tyargs.size() != sch.typeParams.size())
    throw Error(ErrorKind::Arity, "operation " + sch.name + " expects " + std::to_string(sch.typeParams.size()) +
                                      " type arguments, got " + std::to_string(tyargs.size()));
  TypeMap m;
  for (std::size_t i = 0; i < tyargs.size(); ++i) m[sch.typeParams[i]] = tyargs[i];
  return m;
}

Type check_node(const MonadSignature& sig, const StateSignature* own, const OperationScheme& sch, const Context& ctx,
                const Term& t, const std::function<bool(const Type&)>& okType) {
  TypeMap m = bind_params(sch, t->tyargs);
  for (const auto& ty : t->tyargs)
    if (!okType(ty)) type_error("type argument " + ty.str() + " of " + sch.name + " outside the type universe");
  if (t->args.size() != sch.args.size())
    throw Error(ErrorKind::Arity, "operation " + sch.name + " expects " + std::to_string(sch.args.size()) +
                                      " arguments, got " + std::to_string(t->args.size()));
  for (std::size_t i = 0; i < sch.args.size(); ++i) {
    auto binders = instantiate(sch.args[i].binders, m);
    if (binders != t->args[i].binders) type_error("binder mismatch in argument " + std::to_string(i) + " of " + sch.name);
    typecheck_val(sig, own, extend(ctx, binders), t->args[i].value, instantiate(sch.args[i].shape, m));
  }
  return instantiate(sch.output, m);
}

}  // namespace

Context extend(Context ctx, const std::vector<Type>& binders) {
  ctx.insert(ctx.end(), binders.begin(), binders.end());
  return ctx;
}

Type typecheck_term(const MonadSignature& sig, const Context& ctx, const Term& t) {
  if (t->kind == Node::Kind::Var) {
    if (t->index >= ctx.size())
      throw Error(ErrorKind::Scope, "variable " + std::to_string(t->index) + " outside context of length " +
                                        std::to_string(ctx.size()));
    return ctx[t->index];
  }
  if (t->kind == Node::Kind::State) type_error("state node " + t->op + " where a term is expected");
  const OperationScheme* sch = find_op(sig.ops, t->op);
  if (!sch) throw Error(ErrorKind::UnknownOperation, t->op);
  return check_node(sig, nullptr, *sch, ctx, t, [&](const Type& ty) { return in_universe(sig, ty); });
}

Type typecheck_state(const MonadSignature& sig, const StateSignature& st, const Context& ctx, const Term& s) {
  if (st.identity) return typecheck_term(sig, ctx, s);
  if (s->kind != Node::Kind::State) type_error("expected a state, got " + to_sexpr(s));
  const OperationScheme* sch = find_op(state_ops(st), s->op);
  if (!sch) throw Error(ErrorKind::UnknownOperation, s->op);
  return check_node(sig, &st, *sch, ctx, s,
                    [&](const Type& ty) { return in_universe(sig, ty) || st.universe.contains(ty); });
}

void typecheck_val(const MonadSignature& sig, const StateSignature* own, const Context& ctx, const Val& v,
                   const Shape& shape) {
  auto expect = [&](Val::Kind k) {
    if (v.kind != k) type_error("value does not fit its shape: " + to_sexpr(v));
  };
  switch (shape.kind) {
    case Shape::Kind::Term: {
      expect(Val::Kind::Term);
      Type ty = typecheck_term(sig, ctx, v.term);
      if (!(ty == shape.type)) type_error("expected " + shape.type.str() + ", got " + ty.str() + " for " + to_sexpr(v));
      return;
    }
    case Shape::Kind::Rec:
    case Shape::Kind::Embed: {
      expect(Val::Kind::Term);
      const StateSignature* st = shape.kind == Shape::Kind::Rec ? own : sig.embedded.get();
      if (!st) type_error("state hole without a state signature");
      Type ty = typecheck_state(sig, *st, ctx, v.term);
      if (!(ty == shape.type)) type_error("expected state of " + shape.type.str() + ", got " + ty.str());
      return;
    }
    case Shape::Kind::Const:
      expect(Val::Kind::Const);
      if (std::find(shape.labels.begin(), shape.labels.end(), v.label) == shape.labels.end())
        throw Error(ErrorKind::UnknownLabel, v.label);
      return;
    case Shape::Kind::Prod:
      expect(Val::Kind::Prod);
      if (v.parts.size() != shape.parts.size()) throw Error(ErrorKind::Arity, "tuple size mismatch");
      for (std::size_t i = 0; i < v.parts.size(); ++i) typecheck_val(sig, own, ctx, v.parts[i], shape.parts[i]);
      return;
    case Shape::Kind::Sum: {
      expect(Val::Kind::Sum);
      auto it = std::find(shape.labels.begin(), shape.labels.end(), v.label);
      if (it == shape.labels.end()) throw Error(ErrorKind::UnknownLabel, v.label);
      typecheck_val(sig, own, ctx, v.parts[0], shape.parts[it - shape.labels.begin()]);
      return;
    }
    case Shape::Kind::Bag:
      expect(Val::Kind::Bag);
      for (std::size_t i = 0; i < v.parts.size(); ++i) {
        typecheck_val(sig, own, ctx, v.parts[i], shape.parts[0]);
        if (i && compare(v.parts[i - 1], v.parts[i]) > 0) type_error("bag not in canonical order");
      }
      return;
  }
}

Term mk_var(const Context& ctx, std::size_t index) {
  if (index >= ctx.size())
    throw Error(ErrorKind::Scope, "index " + std::to_string(index) + " outside context of length " +
                                      std::to_string(ctx.size()));
  return make_var(index);
}

Term mk_op(const MonadSignature& sig, const Context& ctx, const std::string& name, std::vector<Type> typeArgs,
           std::vector<Val> argValues) {
  const OperationScheme* sch = find_op(sig.ops, name);
  if (!sch) throw Error(ErrorKind::UnknownOperation, name);
  if (argValues.size() != sch->args.size())
    throw Error(ErrorKind::Arity, "operation " + name + " expects " + std::to_string(sch->args.size()) + " arguments");
  TypeMap m = bind_params(*sch, typeArgs);
  std::vector<Arg> args;
  for (std::size_t i = 0; i < argValues.size(); ++i)
    args.push_back(Arg{instantiate(sch->args[i].binders, m), canonicalize(argValues[i])});
  Term t = make_node(Node::Kind::Op, name, std::move(typeArgs), std::move(args));
  typecheck_term(sig, ctx, t);
  return t;
}

Val canonicalize(const Val& v) {
  switch (v.kind) {
    case Val::Kind::Term: return Val::of(canonicalize(v.term));
    case Val::Kind::Const: return v;
    case Val::Kind::Sum: return Val::sum(v.label, canonicalize(v.parts[0]));
    case Val::Kind::Prod:
    case Val::Kind::Bag: {
      std::vector<Val> parts;
      for (const auto& p : v.parts) parts.push_back(canonicalize(p));
      return v.kind == Val::Kind::Prod ? Val::prod(std::move(parts)) : Val::bag(std::move(parts));
    }
  }
  return v;
}

Term canonicalize(const Term& t) {
  if (t->kind == Node::Kind::Var) return t;
  std::vector<Arg> args;
  for (const auto& a : t->args) args.push_back(Arg{a.binders, canonicalize(a.value)});
  return make_node(t->kind, t->op, t->tyargs, std::move(args));
}

// ---------------------------------------------------------------- renaming

namespace {

template <class F>
Val map_val(const Val& v, F&& f) {
  switch (v.kind) {
    case Val::Kind::Term: {
      Term t = f(v.term, std::size_t{0});
      return t ? Val::of(t) : Val{};
    }
    case Val::Kind::Const: return v;
    default: break;
  }
  std::vector<Val> parts;
  for (const auto& p : v.parts) {
    Val q = map_val(p, f);
    if (q.kind == Val::Kind::Term && !q.term) return Val{};
    parts.push_back(std::move(q));
  }
  if (v.kind == Val::Kind::Prod) return Val::prod(std::move(parts));
  if (v.kind == Val::Kind::Sum) return Val::sum(v.label, std::move(parts[0]));
  return Val::bag(std::move(parts));
}

inline bool failed(const Val& v) { return v.kind == Val::Kind::Term && !v.term; }

}  // namespace

Term rename_raw(const Term& t, std::size_t n, std::size_t m,
                const std::function<std::optional<std::size_t>(std::size_t)>& f) {
  if (t->kind == Node::Kind::Var) {
    if (t->index < n) {
      auto j = f(t->index);
      return j ? make_var(*j) : nullptr;
    }
    return make_var(m + (t->index - n));
  }
  std::vector<Arg> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    Val v = rename_raw(a.value, n, m, f);
    if (failed(v)) return nullptr;
    args.push_back(Arg{a.binders, std::move(v)});
  }
  return make_node(t->kind, t->op, t->tyargs, std::move(args));
}

Val rename_raw(const Val& v, std::size_t n, std::size_t m,
               const std::function<std::optional<std::size_t>(std::size_t)>& f) {
  return map_val(v, [&](const Term& t, std::size_t) { return rename_raw(t, n, m, f); });
}

Term rename(const Term& t, const Renaming& f) {
  if (f.map.size() != f.source.size()) throw Error(ErrorKind::Type, "renaming does not cover its source context");
  for (std::size_t i = 0; i < f.map.size(); ++i) {
    if (f.map[i] >= f.target.size()) throw Error(ErrorKind::Scope, "renaming image out of range");
    if (!(f.source[i] == f.target[f.map[i]])) throw Error(ErrorKind::Type, "renaming is not type-preserving");
  }
  Term r = rename_raw(t, f.source.size(), f.target.size(),
                      [&](std::size_t i) -> std::optional<std::size_t> { return f.map[i]; });
  if (!r) throw Error(ErrorKind::Scope, "renaming undefined");
  return r;
}

Term weaken(const Term& t, std::size_t n, std::size_t k) {
  if (k == 0) return t;
  return rename_raw(t, n, n + k, [](std::size_t i) -> std::optional<std::size_t> { return i; });
}

Val weaken(const Val& v, std::size_t n, std::size_t k) {
  if (k == 0) return v;
  return rename_raw(v, n, n + k, [](std::size_t i) -> std::optional<std::size_t> { return i; });
}

Term strengthen(const Term& t, std::size_t n, std::size_t k) {
  if (k == 0) return t;
  return rename_raw(t, n + k, n, [n](std::size_t i) -> std::optional<std::size_t> {
    if (i < n) return i;
    return std::nullopt;
  });
}

Val strengthen(const Val& v, std::size_t n, std::size_t k) {
  if (k == 0) return v;
  Val r = rename_raw(v, n + k, n, [n](std::size_t i) -> std::optional<std::size_t> {
    if (i < n) return i;
    return std::nullopt;
  });
  return r;
}

std::size_t count_occurrences(const Term& t, std::size_t index) {
  if (t->kind == Node::Kind::Var) return t->index == index ? 1 : 0;
  std::size_t c = 0;
  std::function<void(const Val&)> walk = [&](const Val& v) {
    if (v.kind == Val::Kind::Term) {
      c += count_occurrences(v.term, index);
      return;
    }
    for (const auto& p : v.parts) walk(p);
  };
  for (const auto& a : t->args) walk(a.value);
  return c;
}

bool mentions(const Term& t, std::size_t index) { return count_occurrences(t, index) > 0; }

bool mentions(const Val& v, std::size_t index) {
  if (v.kind == Val::Kind::Term) return mentions(v.term, index);
  for (const auto& p : v.parts)
    if (mentions(p, index)) return true;
  return false;
}

// ---------------------------------------------------------------- substitution

Substitution Substitution::identity(const Context& ctx) {
  Substitution s;
  s.source = ctx;
  s.target = ctx;
  for (std::size_t i = 0; i < ctx.size(); ++i) s.images.push_back(make_var(i));
  return s;
}

Substitution lift_subst(const Substitution& s, const std::vector<Type>& binders) {
  Substitution out;
  out.source = extend(s.source, binders);
  out.target = extend(s.target, binders);
  std::size_t m = s.target.size();
  out.images.reserve(out.source.size());
  for (const auto& img : s.images) out.images.push_back(weaken(img, m, binders.size()));
  for (std::size_t j = 0; j < binders.size(); ++j) out.images.push_back(make_var(m + j));
  return out;
}

Term substitute(const Term& t, const Substitution& s) {
  if (t->kind == Node::Kind::Var) {
    if (t->index >= s.images.size())
      throw Error(ErrorKind::Scope, "variable " + std::to_string(t->index) + " not covered by substitution");
    return s.images[t->index];
  }
  std::vector<Arg> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    if (a.binders.empty()) {
      args.push_back(Arg{a.binders, substitute(a.value, s)});
    } else {
      args.push_back(Arg{a.binders, substitute(a.value, lift_subst(s, a.binders))});
    }
  }
  return make_node(t->kind, t->op, t->tyargs, std::move(args));
}

Val substitute(const Val& v, const Substitution& s) {
  return map_val(v, [&](const Term& t, std::size_t) { return substitute(t, s); });
}

Substitution compose(const Substitution& s, const Substitution& t) {
  Substitution out;
  out.source = s.source;
  out.target = t.target;
  for (const auto& img : s.images) out.images.push_back(substitute(img, t));
  return out;
}

void check_substitution(const MonadSignature& sig, const Substitution& s) {
  if (s.images.size() != s.source.size()) throw Error(ErrorKind::Type, "substitution does not cover its source");
  for (std::size_t i = 0; i < s.images.size(); ++i) {
    Type ty = typecheck_term(sig, s.target, s.images[i]);
    if (!(ty == s.source[i]))
      throw Error(ErrorKind::Type, "substitution image " + std::to_string(i) + " has type " + ty.str() +
                                       ", expected " + s.source[i].str());
  }
}

Substitution renaming_subst(const Renaming& f) {
  Substitution s;
  s.source = f.source;
  s.target = f.target;
  for (auto j : f.map) s.images.push_back(make_var(j));
  return s;
}

// ---------------------------------------------------------------- enumeration

bool enum_less(const Term& a, const Term& b) {
  if (a->depth != b->depth) return a->depth < b->depth;
  return compare(a, b) < 0;
}

Enumerator::Enumerator(const MonadSignature& sig, EnumConfig cfg) : sig_(sig), cfg_(std::move(cfg)) {
  if (cfg_.typeCandidates.empty()) {
    cfg_.typeCandidates = sig_.universe.default_candidates();
    if (sig_.embedded)
      for (const auto& t : sig_.embedded->universe.default_candidates())
        if (std::find(cfg_.typeCandidates.begin(), cfg_.typeCandidates.end(), t) == cfg_.typeCandidates.end())
          cfg_.typeCandidates.push_back(t);
  }
}

const std::vector<Term>& Enumerator::terms(const Context& ctx, const Type& ty, std::size_t depth) {
  auto key = std::make_tuple(static_cast<const void*>(&sig_), ctx, ty, depth);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  std::vector<Term> out;
  for (std::size_t i = 0; i < ctx.size(); ++i)
    if (ctx[i] == ty) out.push_back(make_var(i));
  if (depth > 0) {
    auto built = build(sig_.ops, Node::Kind::Op, nullptr, ctx, ty, depth);
    out.insert(out.end(), built.begin(), built.end());
  }
  std::sort(out.begin(), out.end(), enum_less);
  out.erase(std::unique(out.begin(), out.end(), [](const Term& a, const Term& b) { return same(a, b); }), out.end());
  return memo_.emplace(key, std::move(out)).first->second;
}

const std::vector<Term>& Enumerator::states(const StateSignature& st, const Context& ctx, const Type& ty,
                                            std::size_t depth) {
  if (st.identity) return terms(ctx, ty, depth);
  auto key = std::make_tuple(static_cast<const void*>(&st), ctx, ty, depth);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  std::vector<Term> out;
  if (depth > 0) out = build(st.ops, Node::Kind::State, &st, ctx, ty, depth);
  std::sort(out.begin(), out.end(), enum_less);
  out.erase(std::unique(out.begin(), out.end(), [](const Term& a, const Term& b) { return same(a, b); }), out.end());
  return memo_.emplace(key, std::move(out)).first->second;
}

std::vector<Val> Enumerator::values(const StateSignature* own, const Context& ctx, const Shape& shape,
                                    std::size_t depth) {
  std::vector<Val> out;
  switch (shape.kind) {
    case Shape::Kind::Term:
      for (const auto& t : terms(ctx, shape.type, depth)) out.push_back(Val::of(t));
      break;
    case Shape::Kind::Rec:
    case Shape::Kind::Embed: {
      const StateSignature* st = shape.kind == Shape::Kind::Rec ? own : sig_.embedded.get();
      if (!st) throw Error(ErrorKind::NotEnumerable, "state hole without a state signature");
      for (const auto& t : states(*st, ctx, shape.type, depth)) out.push_back(Val::of(t));
      break;
    }
    case Shape::Kind::Const:
      for (const auto& l : shape.labels) out.push_back(Val::constant(l));
      break;
    case Shape::Kind::Prod: {
      std::vector<std::vector<Val>> acc{{}};
      for (const auto& p : shape.parts) {
        auto vs = values(own, ctx, p, depth);
        std::vector<std::vector<Val>> next;
        for (const auto& prefix : acc)
          for (const auto& v : vs) {
            next.push_back(prefix);
            next.back().push_back(v);
          }
        acc = std::move(next);
      }
      for (auto& parts : acc) out.push_back(Val::prod(std::move(parts)));
      break;
    }
    case Shape::Kind::Sum:
      for (std::size_t i = 0; i < shape.parts.size(); ++i)
        for (auto& v : values(own, ctx, shape.parts[i], depth)) out.push_back(Val::sum(shape.labels[i], std::move(v)));
      break;
    case Shape::Kind::Bag: {
      auto elems = values(own, ctx, shape.parts[0], depth);
      std::vector<std::size_t> idx;
      std::function<void(std::size_t)> rec = [&](std::size_t from) {
        std::vector<Val> parts;
        for (auto i : idx) parts.push_back(elems[i]);
        out.push_back(Val::bag(std::move(parts)));
        if (idx.size() == cfg_.bagBound) return;
        for (std::size_t i = from; i < elems.size(); ++i) {
          idx.push_back(i);
          rec(i);
          idx.pop_back();
        }
      };
      rec(0);
      break;
    }
  }
  if (out.size() > cfg_.limit) throw Error(ErrorKind::NotEnumerable, "enumeration limit exceeded");
  return out;
}

std::vector<Term> Enumerator::build(const std::vector<OperationScheme>& ops, Node::Kind kind,
                                    const StateSignature* own, const Context& ctx, const Type& ty,
                                    std::size_t depth) {
  std::vector<Term> out;
  for (const auto& sch : ops) {
    std::set<std::string> params(sch.typeParams.begin(), sch.typeParams.end());
    TypeMap bound;
    if (!match_type(sch.output, ty, params, bound)) continue;
    std::vector<std::string> free;
    for (const auto& p : sch.typeParams)
      if (!bound.count(p)) free.push_back(p);
    std::vector<TypeMap> insts{bound};
    for (const auto& p : free) {
      std::vector<TypeMap> next;
      for (const auto& m : insts)
        for (const auto& c : cfg_.typeCandidates) {
          next.push_back(m);
          next.back()[p] = c;
        }
      insts = std::move(next);
    }
    for (const auto& m : insts) {
      std::vector<Type> tyargs;
      for (const auto& p : sch.typeParams) tyargs.push_back(m.at(p));
      std::vector<std::vector<Val>> choices;
      std::vector<std::vector<Type>> binders;
      bool empty = false;
      for (const auto& a : sch.args) {
        binders.push_back(instantiate(a.binders, m));
        choices.push_back(values(own, extend(ctx, binders.back()), instantiate(a.shape, m), depth - 1));
        if (choices.back().empty()) empty = true;
      }
      if (empty) continue;
      std::vector<std::size_t> pos(choices.size(), 0);
      for (;;) {
        std::vector<Arg> args;
        for (std::size_t i = 0; i < choices.size(); ++i) args.push_back(Arg{binders[i], choices[i][pos[i]]});
        out.push_back(make_node(kind, sch.name, tyargs, std::move(args)));
        if (++produced_ > cfg_.limit) throw Error(ErrorKind::NotEnumerable, "enumeration limit exceeded");
        std::size_t i = 0;
        for (; i < pos.size(); ++i) {
          if (++pos[i] < choices[i].size()) break;
          pos[i] = 0;
        }
        if (i == pos.size()) break;
      }
    }
  }
  return out;
}

std::vector<Term> enumerate_terms(const MonadSignature& sig, const Context& ctx, const Type& ty, std::size_t depth,
                                  const EnumConfig& cfg) {
  Enumerator e(sig, cfg);
  return e.terms(ctx, ty, depth);
}

}  // namespace tmonad
