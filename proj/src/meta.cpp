#include "tmonad/meta.hpp"

#include <algorithm>

#include "tmonad/equations.hpp"
#include "tmonad/sexpr.hpp"

namespace tmonad {

bool Assignment::operator==(const Assignment& o) const {
  if (types != o.types || values.size() != o.values.size()) return false;
  for (const auto& [k, v] : values) {
    auto it = o.values.find(k);
    if (it == o.values.end() || !same(v, it->second)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- evaluation

namespace {

const Val& lookup(const Assignment& asg, const std::string& name) {
  auto it = asg.values.find(name);
  if (it == asg.values.end()) throw Error(ErrorKind::UnboundMetavariable, name);
  return it->second;
}

Context prefix(const Context& ctx, std::size_t n) { return Context(ctx.begin(), ctx.begin() + n); }

}  // namespace

Term eval_metaterm(const MetaTerm& mt, const Assignment& asg, const EvalScope& scope) {
  switch (mt->kind) {
    case MNode::Kind::MVar: {
      const Val& v = lookup(asg, mt->name);
      if (v.kind != Val::Kind::Term) throw Error(ErrorKind::Type, "shape metavariable " + mt->name + " used as a term");
      return v.term;
    }
    case MNode::Kind::Var: {
      std::size_t level = scope.gamma + mt->index;
      if (level >= scope.ctx.size()) throw Error(ErrorKind::Scope, "bound variable " + std::to_string(mt->index) + " out of scope");
      return make_var(level);
    }
    case MNode::Kind::Op:
    case MNode::Kind::State: {
      std::vector<Arg> args;
      args.reserve(mt->args.size());
      for (const auto& a : mt->args) {
        auto binders = instantiate(a.binders, asg.types);
        EvalScope inner{scope.gamma, extend(scope.ctx, binders), scope.decls};
        args.push_back(Arg{std::move(binders), eval_mval(a.value, asg, inner)});
      }
      return make_node(mt->kind == MNode::Kind::Op ? Node::Kind::Op : Node::Kind::State, mt->name,
                       instantiate(mt->tyargs, asg.types), std::move(args));
    }
    case MNode::Kind::Subst: {
      const Val& v = lookup(asg, mt->name);
      if (v.kind != Val::Kind::Term) throw Error(ErrorKind::Type, "shape metavariable " + mt->name + " substituted");
      Substitution s;
      s.target = scope.ctx;
      s.source = scope.ctx;
      for (std::size_t i = 0; i < scope.ctx.size(); ++i) s.images.push_back(make_var(i));
      for (const auto& img : mt->images) {
        s.source.push_back(Type());
        s.images.push_back(eval_metaterm(img, asg, scope));
      }
      return substitute(v.term, s);
    }
    case MNode::Kind::Weaken: {
      auto ws = instantiate(mt->binders, asg.types);
      if (ws.size() > scope.ctx.size() - scope.gamma) throw Error(ErrorKind::Scope, "weakening beyond the binder stack");
      std::size_t n = scope.ctx.size() - ws.size();
      EvalScope inner{scope.gamma, prefix(scope.ctx, n), scope.decls};
      return weaken(eval_metaterm(mt->body, asg, inner), n, ws.size());
    }
    case MNode::Kind::Prim: {
      const PrimFn* fn = find_prim(mt->name);
      if (!fn) throw Error(ErrorKind::UnknownOperation, "primitive " + mt->name);
      std::vector<Val> args;
      std::vector<Context> ctxs;
      for (const auto& a : mt->primArgs) {
        const MetaVarDecl* d = nullptr;
        if (a.kind == MVal::Kind::Term && a.term->kind == MNode::Kind::MVar && scope.decls)
          d = find_decl(*scope.decls, a.term->name);
        if (d) {
          args.push_back(lookup(asg, d->name));
          ctxs.push_back(extend(prefix(scope.ctx, scope.gamma), instantiate(d->binders, asg.types)));
        } else {
          args.push_back(eval_mval(a, asg, scope));
          ctxs.push_back(scope.ctx);
        }
      }
      return (*fn)(scope.ctx, args, ctxs);
    }
  }
  throw Error(ErrorKind::Type, "malformed metaterm");
}

Val eval_mval(const MVal& v, const Assignment& asg, const EvalScope& scope) {
  switch (v.kind) {
    case MVal::Kind::Term:
      if (v.term->kind == MNode::Kind::MVar) {
        const Val& img = lookup(asg, v.term->name);
        if (img.kind != Val::Kind::Term) return img;
      }
      return Val::of(eval_metaterm(v.term, asg, scope));
    case MVal::Kind::Const: return Val::constant(v.label);
    case MVal::Kind::Sum: return Val::sum(v.label, eval_mval(v.parts[0], asg, scope));
    case MVal::Kind::Prod: {
      std::vector<Val> parts;
      for (const auto& p : v.parts) parts.push_back(eval_mval(p, asg, scope));
      return Val::prod(std::move(parts));
    }
    case MVal::Kind::Bag: {
      std::vector<Val> parts;
      for (const auto& p : v.parts) parts.push_back(eval_mval(p, asg, scope));
      if (!v.rest.empty()) {
        const Val& r = lookup(asg, v.rest);
        if (r.kind != Val::Kind::Bag) throw Error(ErrorKind::Type, "bag remainder " + v.rest + " is not a bag");
        parts.insert(parts.end(), r.parts.begin(), r.parts.end());
      }
      return Val::bag(std::move(parts));
    }
  }
  return {};
}

Term eval_metaterm(const MetaTerm& mt, const Assignment& asg, const Context& ctx) {
  return eval_metaterm(mt, asg, EvalScope{ctx.size(), ctx, nullptr});
}

void collect_mvars(const MetaTerm& mt, std::set<std::string>& out) {
  switch (mt->kind) {
    case MNode::Kind::MVar: out.insert(mt->name); return;
    case MNode::Kind::Var: return;
    case MNode::Kind::Op:
    case MNode::Kind::State:
      for (const auto& a : mt->args) collect_mvars(a.value, out);
      return;
    case MNode::Kind::Subst:
      out.insert(mt->name);
      for (const auto& i : mt->images) collect_mvars(i, out);
      return;
    case MNode::Kind::Weaken: collect_mvars(mt->body, out); return;
    case MNode::Kind::Prim:
      for (const auto& a : mt->primArgs) collect_mvars(a, out);
      return;
  }
}

void collect_mvars(const MVal& v, std::set<std::string>& out) {
  if (v.kind == MVal::Kind::Term) {
    collect_mvars(v.term, out);
    return;
  }
  for (const auto& p : v.parts) collect_mvars(p, out);
  if (!v.rest.empty()) out.insert(v.rest);
}

bool has_subst_or_prim(const MetaTerm& mt) {
  switch (mt->kind) {
    case MNode::Kind::Subst:
    case MNode::Kind::Prim: return true;
    case MNode::Kind::Weaken: return has_subst_or_prim(mt->body);
    case MNode::Kind::Op:
    case MNode::Kind::State:
      for (const auto& a : mt->args)
        if (has_subst_or_prim(a.value)) return true;
      return false;
    default: return false;
  }
}

bool has_subst_or_prim(const MVal& v) {
  if (v.kind == MVal::Kind::Term) return has_subst_or_prim(v.term);
  for (const auto& p : v.parts)
    if (has_subst_or_prim(p)) return true;
  return false;
}

// ---------------------------------------------------------------- static checking

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::Validation, msg); }

std::string show(const std::vector<Type>& ts) {
  std::string s = "(";
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? " " : "") + ts[i].str();
  return s + ")";
}

const MetaVarDecl& decl_of(const MetaEnv& env, const std::string& name) {
  const MetaVarDecl* d = env.decls ? find_decl(*env.decls, name) : nullptr;
  if (!d) invalid("undeclared metavariable " + name);
  return *d;
}

void expect_binders(const MetaEnv& env, const MetaVarDecl& d, const std::vector<Type>& stack,
                    const std::vector<Type>& extra = {}) {
  auto want = extend(extend(env.base, stack), extra);
  if (d.binders != want)
    invalid("metavariable " + d.name + " declared with binders " + show(d.binders) + " but used under " + show(want));
}

bool sort_fits(const MetaEnv& env, const StateSignature* st, MetaVarDecl::Sort sort) {
  if (!st || st->identity) return sort == MetaVarDecl::Sort::Term || (st && sort != MetaVarDecl::Sort::Shape);
  bool is1 = env.s1 && *st == *env.s1;
  bool is2 = env.s2 && *st == *env.s2;
  return (is1 && sort == MetaVarDecl::Sort::State1) || (is2 && sort == MetaVarDecl::Sort::State2);
}

Type check_node_mt(const MetaEnv& env, const StateSignature* own, const OperationScheme& sch, const MetaTerm& mt,
                   const std::vector<Type>& stack);

void check_mval(const MetaEnv& env, const StateSignature* own, const MVal& v, const Shape& shape,
                const std::vector<Type>& stack) {
  if (v.kind == MVal::Kind::Term && v.term->kind == MNode::Kind::MVar) {
    const MetaVarDecl& d = decl_of(env, v.term->name);
    if (d.sort == MetaVarDecl::Sort::Shape) {
      expect_binders(env, d, stack);
      if (!(d.shape == shape)) invalid("shape metavariable " + d.name + " used at a different shape");
      return;
    }
  }
  auto want_type = [&](const Type& got, const Type& ty) {
    if (!got.empty() && !(got == ty)) invalid("expected " + ty.str() + ", got " + got.str());
  };
  switch (shape.kind) {
    case Shape::Kind::Term:
      if (v.kind != MVal::Kind::Term) invalid("expected a term argument");
      want_type(check_term_mt(env, v.term, stack), shape.type);
      return;
    case Shape::Kind::Rec:
    case Shape::Kind::Embed: {
      if (v.kind != MVal::Kind::Term) invalid("expected a state argument");
      const StateSignature* st = shape.kind == Shape::Kind::Rec ? own : env.monad->embedded.get();
      if (!st) invalid("state argument without a state signature");
      want_type(check_state_mt(env, *st, v.term, stack), shape.type);
      return;
    }
    case Shape::Kind::Const:
      if (v.kind != MVal::Kind::Const) invalid("expected a label");
      if (std::find(shape.labels.begin(), shape.labels.end(), v.label) == shape.labels.end())
        throw Error(ErrorKind::UnknownLabel, v.label);
      return;
    case Shape::Kind::Prod:
      if (v.kind != MVal::Kind::Prod || v.parts.size() != shape.parts.size()) invalid("tuple does not fit its shape");
      for (std::size_t i = 0; i < v.parts.size(); ++i) check_mval(env, own, v.parts[i], shape.parts[i], stack);
      return;
    case Shape::Kind::Sum: {
      if (v.kind != MVal::Kind::Sum) invalid("expected a tagged value");
      auto it = std::find(shape.labels.begin(), shape.labels.end(), v.label);
      if (it == shape.labels.end()) throw Error(ErrorKind::UnknownLabel, v.label);
      check_mval(env, own, v.parts[0], shape.parts[it - shape.labels.begin()], stack);
      return;
    }
    case Shape::Kind::Bag:
      if (v.kind != MVal::Kind::Bag) invalid("expected a bag");
      for (const auto& p : v.parts) check_mval(env, own, p, shape.parts[0], stack);
      if (!v.rest.empty()) {
        const MetaVarDecl& d = decl_of(env, v.rest);
        if (d.sort != MetaVarDecl::Sort::Shape || !(d.shape == shape)) invalid("bag remainder " + d.name + " must be a bag metavariable");
        expect_binders(env, d, stack);
      }
      return;
  }
}

Type check_node_mt(const MetaEnv& env, const StateSignature* own, const OperationScheme& sch, const MetaTerm& mt,
                   const std::vector<Type>& stack) {
  if (mt->tyargs.size() != sch.typeParams.size())
    invalid("operation " + sch.name + " expects " + std::to_string(sch.typeParams.size()) + " type arguments");
  if (mt->args.size() != sch.args.size())
    invalid("operation " + sch.name + " expects " + std::to_string(sch.args.size()) + " arguments");
  TypeMap m;
  for (std::size_t i = 0; i < mt->tyargs.size(); ++i) m[sch.typeParams[i]] = mt->tyargs[i];
  for (std::size_t i = 0; i < sch.args.size(); ++i) {
    auto binders = instantiate(sch.args[i].binders, m);
    if (mt->args[i].binders != binders) invalid("binder mismatch in argument " + std::to_string(i) + " of " + sch.name);
    check_mval(env, own, mt->args[i].value, instantiate(sch.args[i].shape, m), extend(stack, binders));
  }
  return instantiate(sch.output, m);
}

Type check_common(const MetaEnv& env, const StateSignature* st, const MetaTerm& mt, const std::vector<Type>& stack) {
  switch (mt->kind) {
    case MNode::Kind::MVar: {
      const MetaVarDecl& d = decl_of(env, mt->name);
      if (!sort_fits(env, st, d.sort)) invalid("metavariable " + d.name + " used at the wrong sort");
      expect_binders(env, d, stack);
      return d.type;
    }
    case MNode::Kind::Subst: {
      const MetaVarDecl& d = decl_of(env, mt->name);
      if (!sort_fits(env, st, d.sort)) invalid("metavariable " + d.name + " substituted at the wrong sort");
      std::vector<Type> extra;
      for (const auto& img : mt->images) {
        Type t = check_term_mt(env, img, stack);
        if (t.empty()) invalid("substitution image of unknown type");
        extra.push_back(t);
      }
      expect_binders(env, d, stack, extra);
      return d.type;
    }
    case MNode::Kind::Weaken: {
      auto full = extend(env.base, stack);
      if (mt->binders.size() > stack.size() ||
          !std::equal(mt->binders.begin(), mt->binders.end(), stack.end() - mt->binders.size()))
        invalid("weakening by " + show(mt->binders) + " does not match the binder stack " + show(full));
      std::vector<Type> inner(stack.begin(), stack.end() - mt->binders.size());
      return st ? check_state_mt(env, *st, mt->body, inner) : check_term_mt(env, mt->body, inner);
    }
    case MNode::Kind::Prim:
      if (!find_prim(mt->name)) invalid("unknown primitive " + mt->name);
      return Type();
    default: break;
  }
  invalid("malformed metaterm");
}

}  // namespace

Type check_term_mt(const MetaEnv& env, const MetaTerm& mt, const std::vector<Type>& stack) {
  switch (mt->kind) {
    case MNode::Kind::Var: {
      auto full = extend(env.base, stack);
      if (mt->index >= full.size()) invalid("bound variable " + std::to_string(mt->index) + " out of scope");
      return full[mt->index];
    }
    case MNode::Kind::Op: {
      const OperationScheme* sch = find_op(env.monad->ops, mt->name);
      if (!sch) throw Error(ErrorKind::UnknownOperation, mt->name);
      return check_node_mt(env, nullptr, *sch, mt, stack);
    }
    case MNode::Kind::State: invalid("state operation " + mt->name + " where a term is expected");
    default: return check_common(env, nullptr, mt, stack);
  }
}

Type check_state_mt(const MetaEnv& env, const StateSignature& st, const MetaTerm& mt, const std::vector<Type>& stack) {
  if (st.identity) {
    if (mt->kind == MNode::Kind::Var || mt->kind == MNode::Kind::Op) return check_term_mt(env, mt, stack);
    if (mt->kind == MNode::Kind::State) invalid("state operation " + mt->name + " in an identity state functor");
    return check_common(env, &st, mt, stack);
  }
  switch (mt->kind) {
    case MNode::Kind::Var:
    case MNode::Kind::Op: invalid("term where a state is expected");
    case MNode::Kind::State: {
      const OperationScheme* sch = find_op(st.ops, mt->name);
      if (!sch) throw Error(ErrorKind::UnknownOperation, mt->name);
      return check_node_mt(env, &st, *sch, mt, stack);
    }
    default: return check_common(env, &st, mt, stack);
  }
}

namespace {

bool first_mvar(const MetaTerm& mt, const std::vector<MetaVarDecl>& decls, std::vector<Type>& stack,
                std::vector<Type>& out);

bool first_mvar(const MVal& v, const std::vector<MetaVarDecl>& decls, std::vector<Type>& stack,
                std::vector<Type>& out) {
  if (v.kind == MVal::Kind::Term) return first_mvar(v.term, decls, stack, out);
  for (const auto& p : v.parts)
    if (first_mvar(p, decls, stack, out)) return true;
  if (!v.rest.empty())
    if (const MetaVarDecl* d = find_decl(decls, v.rest)) {
      if (d->binders.size() >= stack.size()) {
        out.assign(d->binders.begin(), d->binders.end() - stack.size());
        return true;
      }
    }
  return false;
}

bool first_mvar(const MetaTerm& mt, const std::vector<MetaVarDecl>& decls, std::vector<Type>& stack,
                std::vector<Type>& out) {
  switch (mt->kind) {
    case MNode::Kind::MVar:
    case MNode::Kind::Subst: {
      const MetaVarDecl* d = find_decl(decls, mt->name);
      if (!d) return false;
      std::size_t drop = stack.size() + (mt->kind == MNode::Kind::Subst ? mt->images.size() : 0);
      if (d->binders.size() < drop) return false;
      out.assign(d->binders.begin(), d->binders.end() - drop);
      return true;
    }
    case MNode::Kind::Op:
    case MNode::Kind::State:
      for (const auto& a : mt->args) {
        std::size_t n = stack.size();
        stack.insert(stack.end(), a.binders.begin(), a.binders.end());
        bool found = first_mvar(a.value, decls, stack, out);
        stack.resize(n);
        if (found) return true;
      }
      return false;
    case MNode::Kind::Weaken: {
      std::vector<Type> inner(stack.begin(), stack.end() - std::min(stack.size(), mt->binders.size()));
      return first_mvar(mt->body, decls, inner, out);
    }
    default: return false;
  }
}

void type_atoms(const Type& t, std::set<std::string>& out) {
  if (t.is_arrow()) {
    type_atoms(t.dom(), out);
    type_atoms(t.cod(), out);
  } else {
    out.insert(t.name());
  }
}

void mt_type_atoms(const MetaTerm& mt, std::set<std::string>& out);

void mv_type_atoms(const MVal& v, std::set<std::string>& out) {
  if (v.kind == MVal::Kind::Term) {
    mt_type_atoms(v.term, out);
    return;
  }
  for (const auto& p : v.parts) mv_type_atoms(p, out);
}

void mt_type_atoms(const MetaTerm& mt, std::set<std::string>& out) {
  for (const auto& t : mt->tyargs) type_atoms(t, out);
  for (const auto& t : mt->binders) type_atoms(t, out);
  for (const auto& a : mt->args) {
    for (const auto& b : a.binders) type_atoms(b, out);
    mv_type_atoms(a.value, out);
  }
  for (const auto& i : mt->images) mt_type_atoms(i, out);
  if (mt->body) mt_type_atoms(mt->body, out);
  for (const auto& p : mt->primArgs) mv_type_atoms(p, out);
}

void decl_type_atoms(const MetaVarDecl& d, std::set<std::string>& out) {
  type_atoms(d.type, out);
  for (const auto& b : d.binders) type_atoms(b, out);
}

}  // namespace

std::vector<Type> infer_premise_binders(const MetaTerm& src, const std::vector<MetaVarDecl>& decls) {
  std::vector<Type> stack, out;
  first_mvar(src, decls, stack, out);
  return out;
}

void validate_equation(const MonadSignature& sig, const EquationSpec& eq) {
  MetaEnv env{&sig, nullptr, nullptr, &eq.metaCtx, {}};
  try {
    for (const auto& d : eq.metaCtx)
      if (d.sort != MetaVarDecl::Sort::Term) invalid("equation metavariables must be term metavariables");
    Type l = check_term_mt(env, eq.lhs, {});
    Type r = check_term_mt(env, eq.rhs, {});
    if (!(l == eq.outType) || !(r == eq.outType)) invalid("sides do not have type " + eq.outType.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Validation, "equation " + eq.name + ": " + e.what());
  }
}

void validate_state_equation(const MonadSignature& sig, const StateSignature& st, const EquationSpec& eq) {
  MetaEnv env{&sig, &st, &st, &eq.metaCtx, {}};
  try {
    Type l = check_state_mt(env, st, eq.lhs, {});
    Type r = check_state_mt(env, st, eq.rhs, {});
    if (!(l == eq.outType) || !(r == eq.outType)) invalid("sides do not have type " + eq.outType.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Validation, "state equation " + eq.name + ": " + e.what());
  }
}

void validate_rule(const LanguageBundle& lang, RuleSpec& rule) {
  std::set<std::string> params(rule.typeParams.begin(), rule.typeParams.end());
  auto ctxmsg = [&](const std::string& m) { return "rule " + rule.name + ": " + m; };
  std::set<std::string> names;
  for (const auto& d : rule.metaCtx)
    if (!names.insert(d.name).second) throw Error(ErrorKind::Validation, ctxmsg("duplicate metavariable " + d.name));
  auto check_judgement = [&](Judgement& j, const std::string& what) {
    MetaEnv env{&lang.monad.base, &lang.s1, &lang.s2, &rule.metaCtx, j.binders};
    try {
      Type a = check_state_mt(env, lang.s1, j.src, {});
      Type b = check_state_mt(env, lang.s2, j.tgt, {});
      if (!a.empty() && !(a == j.type)) invalid("source has type " + a.str() + ", expected " + j.type.str());
      if (!b.empty() && !(b == j.type)) invalid("target has type " + b.str() + ", expected " + j.type.str());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::UnknownOperation ||
          e.kind() == ErrorKind::UnknownLabel)
        throw Error(e.kind(), ctxmsg(what + ": " + e.what()));
      throw;
    }
  };
  if (!rule.conclusion.binders.empty()) throw Error(ErrorKind::Validation, ctxmsg("conclusion cannot bind variables"));
  for (std::size_t i = 0; i < rule.premises.size(); ++i) {
    auto& p = rule.premises[i];
    if (p.binders.empty()) p.binders = infer_premise_binders(p.src, rule.metaCtx);
    check_judgement(p, "premise " + std::to_string(i + 1));
  }
  check_judgement(rule.conclusion, "conclusion");

  // moding
  auto ill = [&](const std::string& m) { throw Error(ErrorKind::IllModedRule, ctxmsg(m)); };
  std::set<std::string> bound, tyBound;
  auto bind_from_pattern = [&](const MetaTerm& pat, const std::string& where) {
    if (has_subst_or_prim(pat)) ill(where + " pattern contains a substitution or primitive");
    std::set<std::string> mvs;
    collect_mvars(pat, mvs);
    bound.insert(mvs.begin(), mvs.end());
    mt_type_atoms(pat, tyBound);
    for (const auto& n : mvs)
      if (const MetaVarDecl* d = find_decl(rule.metaCtx, n)) decl_type_atoms(*d, tyBound);
  };
  auto require = [&](const MetaTerm& mt, const std::vector<Type>& extraTypes, const std::string& where) {
    std::set<std::string> mvs;
    collect_mvars(mt, mvs);
    for (const auto& n : mvs)
      if (!bound.count(n)) ill(where + " uses undetermined metavariable " + n);
    std::set<std::string> atoms;
    mt_type_atoms(mt, atoms);
    for (const auto& t : extraTypes) type_atoms(t, atoms);
    for (const auto& a : atoms)
      if (params.count(a) && !tyBound.count(a)) ill(where + " uses undetermined type parameter " + a);
  };
  type_atoms(rule.conclusion.type, tyBound);
  bind_from_pattern(rule.conclusion.src, "conclusion source");
  for (std::size_t i = 0; i < rule.premises.size(); ++i) {
    const auto& p = rule.premises[i];
    auto extra = p.binders;
    extra.push_back(p.type);
    require(p.src, extra, "premise " + std::to_string(i + 1) + " source");
    bind_from_pattern(p.tgt, "premise " + std::to_string(i + 1) + " target");
  }
  require(rule.conclusion.tgt, {}, "conclusion target");
}

void validate_bundle(LanguageBundle& lang) {
  auto unique = [](const std::vector<OperationScheme>& ops, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& o : ops)
      if (!seen.insert(o.name).second) throw Error(ErrorKind::Validation, "duplicate " + what + " operation " + o.name);
  };
  unique(lang.monad.base.ops, "monad");
  unique(lang.s1.ops, "S1");
  unique(lang.s2.ops, "S2");
  std::function<bool(const Shape&)> embeds = [&](const Shape& s) {
    if (s.kind == Shape::Kind::Embed) return true;
    for (const auto& p : s.parts)
      if (embeds(p)) return true;
    return false;
  };
  bool needs = false;
  for (const auto& o : lang.monad.base.ops)
    for (const auto& a : o.args) needs = needs || embeds(a.shape);
  lang.monad.base.embedded = needs ? std::make_shared<StateSignature>(lang.s1) : nullptr;
  for (const auto& eq : lang.monad.equations) validate_equation(lang.monad.base, eq);
  for (const auto* st : {&lang.s1, &lang.s2}) {
    for (const auto& eq : st->equations) validate_state_equation(lang.monad.base, *st, eq);
    if (st->identity && !st->ops.empty()) throw Error(ErrorKind::Validation, "identity state functor with operations");
    make_backend(st->backend, st->backendArgs);
  }
  make_backend(lang.backend, lang.backendArgs);
  std::set<std::string> seen;
  for (auto& r : lang.rules) {
    if (!seen.insert(r.name).second) throw Error(ErrorKind::Validation, "duplicate rule " + r.name);
    validate_rule(lang, r);
  }
}

}  // namespace tmonad
