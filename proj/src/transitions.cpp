#include "tmonad/transitions.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tmonad/sexpr.hpp"

namespace tmonad {

std::size_t Proof::size() const {
  std::size_t n = 1;
  for (const auto& s : subproofs) n += s->size();
  return n;
}

std::size_t Proof::height() const {
  std::size_t h = 0;
  for (const auto& s : subproofs) h = std::max(h, s->height());
  return h + 1;
}

int compare(const Proof& a, const Proof& b) {
  if (&a == &b) return 0;
  if (a.rule != b.rule) return a.rule < b.rule ? -1 : 1;
  if (int c = compare(a.src, b.src)) return c;
  if (int c = compare(a.tgt, b.tgt)) return c;
  if (a.typeArgs != b.typeArgs) return a.typeArgs < b.typeArgs ? -1 : 1;
  if (a.assignment.size() != b.assignment.size()) return a.assignment.size() < b.assignment.size() ? -1 : 1;
  for (auto i = a.assignment.begin(), j = b.assignment.begin(); i != a.assignment.end(); ++i, ++j) {
    if (i->first != j->first) return i->first < j->first ? -1 : 1;
    if (int c = compare(i->second, j->second)) return c;
  }
  if (a.subproofs.size() != b.subproofs.size()) return a.subproofs.size() < b.subproofs.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.subproofs.size(); ++i)
    if (int c = compare(*a.subproofs[i], *b.subproofs[i])) return c;
  return 0;
}

// ---------------------------------------------------------------- matching

namespace {

using Cont = std::function<void(Assignment&)>;

struct Matcher {
  const LanguageBundle& lang;
  const Normalizer& nf;
  const RuleSpec& rule;
  std::set<std::string> params;
  std::size_t gamma;

  const MetaVarDecl& decl(const std::string& n) const {
    const MetaVarDecl* d = find_decl(rule.metaCtx, n);
    if (!d) throw Error(ErrorKind::UnboundMetavariable, n);
    return *d;
  }

  bool bind_type(const Type& pat, const Type& t, Assignment& a) const { return match_type(pat, t, params, a.types); }

  bool bind_types(const std::vector<Type>& pat, const std::vector<Type>& t, Assignment& a) const {
    if (pat.size() != t.size()) return false;
    for (std::size_t i = 0; i < pat.size(); ++i)
      if (!bind_type(pat[i], t[i], a)) return false;
    return true;
  }

  bool closed(const Type& t, const Assignment& a) const {
    if (t.is_arrow()) return closed(t.dom(), a) && closed(t.cod(), a);
    return !params.count(t.name()) || a.types.count(t.name());
  }

  Type type_of(const MetaVarDecl& d, const Term& t, const Context& ctx) const {
    if (t->kind != Node::Kind::State) return typecheck_term(lang.monad.base, ctx, t);
    return typecheck_state(lang.monad.base, d.sort == MetaVarDecl::Sort::State2 ? lang.s2 : lang.s1, ctx, t);
  }

  void bind_val(const std::string& name, const Val& v, const Context& ctx, Assignment& a, const Cont& k) const {
    auto it = a.values.find(name);
    if (it != a.values.end()) {
      if (same(it->second, v)) k(a);
      return;
    }
    const MetaVarDecl& d = decl(name);
    Assignment b = a;
    if (d.sort != MetaVarDecl::Sort::Shape && !closed(d.type, b)) {
      if (v.kind != Val::Kind::Term) return;
      if (!bind_type(d.type, type_of(d, v.term, ctx), b)) return;
    }
    b.values[name] = v;
    k(b);
  }

  void term(const MetaTerm& p, const Term& t, const Context& ctx, Assignment& a, const Cont& k) const {
    switch (p->kind) {
      case MNode::Kind::MVar: bind_val(p->name, Val::of(t), ctx, a, k); return;
      case MNode::Kind::Var:
        if (t->kind == Node::Kind::Var && t->index == gamma + p->index) k(a);
        return;
      case MNode::Kind::Op:
      case MNode::Kind::State: {
        Node::Kind want = p->kind == MNode::Kind::Op ? Node::Kind::Op : Node::Kind::State;
        if (t->kind != want) return;
        for (const auto& cand : nf.decompose(p->name, t, ctx.size())) {
          if (cand->op != p->name || cand->args.size() != p->args.size()) continue;
          Assignment b = a;
          if (!bind_types(p->tyargs, cand->tyargs, b)) continue;
          args(p, cand, 0, ctx, b, k);
        }
        return;
      }
      case MNode::Kind::Weaken: {
        std::size_t w = p->binders.size();
        if (w > ctx.size()) return;
        std::size_t n = ctx.size() - w;
        Term s = strengthen(t, n, w);
        if (!s) return;
        Context inner(ctx.begin(), ctx.begin() + n);
        term(p->body, s, inner, a, k);
        return;
      }
      default: throw Error(ErrorKind::IllModedRule, "rule " + rule.name + ": substitution or primitive in a pattern");
    }
  }

  void args(const MetaTerm& p, const Term& t, std::size_t i, const Context& ctx, Assignment& a, const Cont& k) const {
    if (i == p->args.size()) {
      k(a);
      return;
    }
    Assignment b = a;
    if (!bind_types(p->args[i].binders, t->args[i].binders, b)) return;
    val(p->args[i].value, t->args[i].value, extend(ctx, t->args[i].binders), b,
        [&](Assignment& c) { args(p, t, i + 1, ctx, c, k); });
  }

  void val(const MVal& p, const Val& v, const Context& ctx, Assignment& a, const Cont& k) const {
    if (p.kind == MVal::Kind::Term && p.term->kind == MNode::Kind::MVar &&
        decl(p.term->name).sort == MetaVarDecl::Sort::Shape) {
      bind_val(p.term->name, v, ctx, a, k);
      return;
    }
    switch (p.kind) {
      case MVal::Kind::Term:
        if (v.kind == Val::Kind::Term) term(p.term, v.term, ctx, a, k);
        return;
      case MVal::Kind::Const:
        if (v.kind == Val::Kind::Const && v.label == p.label) k(a);
        return;
      case MVal::Kind::Sum:
        if (v.kind == Val::Kind::Sum && v.label == p.label) val(p.parts[0], v.parts[0], ctx, a, k);
        return;
      case MVal::Kind::Prod:
        if (v.kind == Val::Kind::Prod && v.parts.size() == p.parts.size()) prod(p, v, 0, ctx, a, k);
        return;
      case MVal::Kind::Bag: {
        if (v.kind != Val::Kind::Bag) return;
        if (p.rest.empty() ? v.parts.size() != p.parts.size() : v.parts.size() < p.parts.size()) return;
        std::vector<bool> used(v.parts.size(), false);
        bag(p, v, 0, used, ctx, a, k);
        return;
      }
    }
  }

  void prod(const MVal& p, const Val& v, std::size_t i, const Context& ctx, Assignment& a, const Cont& k) const {
    if (i == p.parts.size()) {
      k(a);
      return;
    }
    val(p.parts[i], v.parts[i], ctx, a, [&](Assignment& b) { prod(p, v, i + 1, ctx, b, k); });
  }

  void bag(const MVal& p, const Val& v, std::size_t i, std::vector<bool>& used, const Context& ctx, Assignment& a,
           const Cont& k) const {
    if (i == p.parts.size()) {
      if (p.rest.empty()) {
        k(a);
        return;
      }
      std::vector<Val> rest;
      for (std::size_t j = 0; j < v.parts.size(); ++j)
        if (!used[j]) rest.push_back(v.parts[j]);
      bind_val(p.rest, Val::bag(std::move(rest)), ctx, a, k);
      return;
    }
    for (std::size_t j = 0; j < v.parts.size(); ++j) {
      if (used[j]) continue;
      // equal elements are interchangeable
      bool dup = false;
      for (std::size_t q = 0; q < j && !dup; ++q) dup = !used[q] && same(v.parts[q], v.parts[j]);
      if (dup) continue;
      used[j] = true;
      val(p.parts[i], v.parts[j], ctx, a, [&](Assignment& b) { bag(p, v, i + 1, used, ctx, b, k); });
      used[j] = false;
    }
  }
};

void unique_assignments(std::vector<Assignment>& out) {
  std::vector<Assignment> kept;
  for (auto& a : out) {
    bool dup = false;
    for (const auto& b : kept)
      if (a == b) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(std::move(a));
  }
  out = std::move(kept);
}

std::string rule_ctx(const RuleSpec& r) { return "rule " + r.name + ": "; }

}  // namespace

Engine::Engine(const LanguageBundle& lang) : lang_(lang), nf_(lang) {}

const RuleSpec& Engine::rule(const std::string& name) const {
  for (const auto& r : lang_.rules)
    if (r.name == name) return r;
  throw Error(ErrorKind::InvalidProof, "unknown rule " + name);
}

std::vector<Assignment> Engine::match(const RuleSpec& rule, const MetaTerm& pattern, const Term& s, const Context& ctx,
                                      std::size_t gamma, const Assignment& seed, bool) const {
  Matcher m{lang_, nf_, rule, {rule.typeParams.begin(), rule.typeParams.end()}, gamma};
  std::vector<Assignment> out;
  Assignment a = seed;
  m.term(pattern, s, ctx, a, [&](Assignment& b) { out.push_back(b); });
  unique_assignments(out);
  return out;
}

bool Engine::KeyLess::operator()(const Key& a, const Key& b) const {
  if (int c = compare(std::get<0>(a), std::get<0>(b))) return c < 0;
  if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
  if (int c = compare(std::get<2>(a), std::get<2>(b))) return c < 0;
  if (std::get<3>(a) != std::get<3>(b)) return std::get<3>(a) < std::get<3>(b);
  return std::get<4>(a) < std::get<4>(b);
}

namespace {

std::vector<Type> instantiate_checked(const RuleSpec& r, const std::vector<Type>& ts, const TypeMap& m) {
  std::set<std::string> params(r.typeParams.begin(), r.typeParams.end());
  std::function<void(const Type&)> check = [&](const Type& t) {
    if (t.is_arrow()) {
      check(t.dom());
      check(t.cod());
    } else if (params.count(t.name()) && !m.count(t.name())) {
      throw Error(ErrorKind::IllModedRule, rule_ctx(r) + "type parameter " + t.name() + " undetermined");
    }
  };
  for (const auto& t : ts) check(t);
  return instantiate(ts, m);
}

Type instantiate_checked(const RuleSpec& r, const Type& t, const TypeMap& m) {
  return instantiate_checked(r, std::vector<Type>{t}, m)[0];
}

}  // namespace

const std::vector<Derivation>& Engine::derive_rec(const Type& type, const Context& ctx, const Term& source,
                                                  std::size_t fuel, std::size_t cap) {
  Key key{type, ctx, source, fuel, cap};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  std::vector<Derivation> found;
  if (fuel > 0) {
    std::vector<ProofPtr> proofs;
    for (const auto& rule : lang_.rules) {
      std::set<std::string> params(rule.typeParams.begin(), rule.typeParams.end());
      Assignment seed;
      if (!match_type(rule.conclusion.type, type, params, seed.types)) continue;
      std::vector<ProofPtr> subs;
      std::function<void(std::size_t, const Assignment&)> solve = [&](std::size_t i, const Assignment& asg) {
        if (i == rule.premises.size()) {
          auto p = std::make_shared<Proof>();
          p->rule = rule.name;
          for (const auto& tp : rule.typeParams) {
            auto t = asg.types.find(tp);
            if (t == asg.types.end()) throw Error(ErrorKind::IllModedRule, rule_ctx(rule) + "type parameter " + tp + " undetermined");
            p->typeArgs.push_back(t->second);
          }
          p->ctx = ctx;
          p->type = type;
          p->assignment = asg.values;
          p->subproofs = subs;
          p->src = source;
          p->tgt = nf_(eval_metaterm(rule.conclusion.tgt, asg, EvalScope{ctx.size(), ctx, &rule.metaCtx}), ctx.size());
          proofs.push_back(p);
          return;
        }
        const Judgement& prem = rule.premises[i];
        Context pctx = extend(ctx, instantiate_checked(rule, prem.binders, asg.types));
        Type ptype = instantiate_checked(rule, prem.type, asg.types);
        Term psrc = nf_(eval_metaterm(prem.src, asg, EvalScope{ctx.size(), pctx, &rule.metaCtx}), pctx.size());
        // copy: the memo may rehash during recursion
        std::vector<Derivation> results = derive_rec(ptype, pctx, psrc, fuel - 1, cap);
        for (const auto& [tgt, proof] : results) {
          for (const auto& next : match(rule, prem.tgt, tgt, pctx, ctx.size(), asg, false)) {
            subs.push_back(proof);
            solve(i + 1, next);
            subs.pop_back();
          }
        }
      };
      for (const auto& asg : match(rule, rule.conclusion.src, source, ctx, ctx.size(), seed, true)) solve(0, asg);
    }
    std::sort(proofs.begin(), proofs.end(), [](const ProofPtr& a, const ProofPtr& b) {
      if (int c = compare(a->tgt, b->tgt)) return c < 0;
      if (a->size() != b->size()) return a->size() < b->size();
      return compare(*a, *b) < 0;
    });
    std::size_t run = 0;
    for (std::size_t i = 0; i < proofs.size(); ++i) {
      if (i && compare(*proofs[i], *proofs[i - 1]) == 0) continue;
      if (i && same(proofs[i]->tgt, proofs[i - 1]->tgt)) {
        ++run;
      } else {
        run = 0;
      }
      if (cap && run >= cap) continue;
      found.emplace_back(proofs[i]->tgt, proofs[i]);
    }
  }
  return memo_.emplace(key, std::move(found)).first->second;
}

std::vector<Derivation> Engine::derive(const Type& type, const Context& ctx, const Term& source,
                                       const DeriveConfig& cfg) {
  Type ty = typecheck_state(lang_.monad.base, lang_.s1, ctx, source);
  if (!(ty == type)) throw Error(ErrorKind::Type, "source has transition type " + ty.str() + ", expected " + type.str());
  return derive_rec(type, ctx, nf_(source, ctx.size()), cfg.fuel, cfg.proofsPerTarget);
}

std::vector<Assignment> match_state(const LanguageBundle& lang, const RuleSpec& rule, const MetaTerm& pattern,
                                    const Term& s, const Context& ctx) {
  Engine e(lang);
  return e.match(rule, pattern, e.normalizer()(s, ctx.size()), ctx, ctx.size(), Assignment{}, true);
}

std::vector<Derivation> derive(const LanguageBundle& lang, const Type& type, const Context& ctx, const Term& source,
                               const DeriveConfig& cfg) {
  Engine e(lang);
  return e.derive(type, ctx, source, cfg);
}

// ---------------------------------------------------------------- proof checking

namespace {

[[noreturn]] void invalid_proof(const Proof& p, const std::string& msg) {
  throw Error(ErrorKind::InvalidProof, "proof by " + p.rule + ": " + msg);
}

const RuleSpec* find_rule(const LanguageBundle& lang, const std::string& name) {
  for (const auto& r : lang.rules)
    if (r.name == name) return &r;
  return nullptr;
}

void check_image(const LanguageBundle& lang, const Proof& p, const MetaVarDecl& d, const Val& v, const TypeMap& m) {
  Context c = extend(p.ctx, instantiate(d.binders, m));
  const MonadSignature& sig = lang.monad.base;
  switch (d.sort) {
    case MetaVarDecl::Sort::Shape: typecheck_val(sig, &lang.s2, c, v, instantiate(d.shape, m)); return;
    case MetaVarDecl::Sort::Term: {
      if (v.kind != Val::Kind::Term) invalid_proof(p, "metavariable " + d.name + " is not assigned a term");
      Type t = typecheck_term(sig, c, v.term);
      if (!(t == instantiate(d.type, m))) invalid_proof(p, "metavariable " + d.name + " assigned a term of type " + t.str());
      return;
    }
    default: {
      if (v.kind != Val::Kind::Term) invalid_proof(p, "metavariable " + d.name + " is not assigned a state");
      Type t = typecheck_state(sig, d.sort == MetaVarDecl::Sort::State1 ? lang.s1 : lang.s2, c, v.term);
      if (!(t == instantiate(d.type, m))) invalid_proof(p, "metavariable " + d.name + " assigned a state of type " + t.str());
    }
  }
}

std::pair<Term, Term> check_rec(const LanguageBundle& lang, const Normalizer& nf, const Proof& p) {
  const RuleSpec* rule = find_rule(lang, p.rule);
  if (!rule) invalid_proof(p, "unknown rule");
  if (p.typeArgs.size() != rule->typeParams.size()) invalid_proof(p, "wrong number of type arguments");
  if (p.subproofs.size() != rule->premises.size()) invalid_proof(p, "wrong number of subproofs");
  Assignment asg;
  for (std::size_t i = 0; i < p.typeArgs.size(); ++i) asg.types[rule->typeParams[i]] = p.typeArgs[i];
  asg.values = p.assignment;
  std::set<std::string> used;
  collect_mvars(rule->conclusion.src, used);
  collect_mvars(rule->conclusion.tgt, used);
  for (const auto& pr : rule->premises) {
    collect_mvars(pr.src, used);
    collect_mvars(pr.tgt, used);
  }
  for (const auto& n : used)
    if (!asg.values.count(n)) invalid_proof(p, "metavariable " + n + " unassigned");
  for (const auto& [n, v] : asg.values) {
    const MetaVarDecl* d = find_decl(rule->metaCtx, n);
    if (!d) invalid_proof(p, "assignment to undeclared metavariable " + n);
    try {
      check_image(lang, p, *d, v, asg.types);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidProof) throw;
      invalid_proof(p, "metavariable " + n + ": " + e.what());
    }
  }
  if (!(instantiate(rule->conclusion.type, asg.types) == p.type)) invalid_proof(p, "transition type mismatch");
  try {
    EvalScope top{p.ctx.size(), p.ctx, &rule->metaCtx};
    Term src = nf(eval_metaterm(rule->conclusion.src, asg, top), p.ctx.size());
    if (!same(src, p.src)) invalid_proof(p, "source " + to_sexpr(src) + " differs from recorded " + to_sexpr(p.src));
    if (!(typecheck_state(lang.monad.base, lang.s1, p.ctx, src) == p.type)) invalid_proof(p, "source type mismatch");
    for (std::size_t i = 0; i < rule->premises.size(); ++i) {
      const Judgement& prem = rule->premises[i];
      const Proof& sub = *p.subproofs[i];
      Context pctx = extend(p.ctx, instantiate(prem.binders, asg.types));
      if (sub.ctx != pctx) invalid_proof(p, "premise " + std::to_string(i + 1) + " context mismatch");
      if (!(sub.type == instantiate(prem.type, asg.types)))
        invalid_proof(p, "premise " + std::to_string(i + 1) + " transition type mismatch");
      auto [ss, st] = check_rec(lang, nf, sub);
      EvalScope scope{p.ctx.size(), pctx, &rule->metaCtx};
      Term want_src = nf(eval_metaterm(prem.src, asg, scope), pctx.size());
      Term want_tgt = nf(eval_metaterm(prem.tgt, asg, scope), pctx.size());
      if (!same(ss, want_src)) invalid_proof(p, "premise " + std::to_string(i + 1) + " source mismatch");
      if (!same(st, want_tgt)) invalid_proof(p, "premise " + std::to_string(i + 1) + " target mismatch");
    }
    Term tgt = nf(eval_metaterm(rule->conclusion.tgt, asg, top), p.ctx.size());
    if (!same(tgt, p.tgt)) invalid_proof(p, "target " + to_sexpr(tgt) + " differs from recorded " + to_sexpr(p.tgt));
    if (!(typecheck_state(lang.monad.base, lang.s2, p.ctx, tgt) == p.type)) invalid_proof(p, "target type mismatch");
    return {src, tgt};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidProof) throw;
    invalid_proof(p, e.what());
  }
}

ProofPtr subst_rec(const LanguageBundle& lang, const Normalizer& nf, const Proof& p, const Substitution& sigma) {
  const RuleSpec* rule = find_rule(lang, p.rule);
  if (!rule) invalid_proof(p, "unknown rule");
  Assignment asg;
  for (std::size_t i = 0; i < p.typeArgs.size() && i < rule->typeParams.size(); ++i)
    asg.types[rule->typeParams[i]] = p.typeArgs[i];
  auto out = std::make_shared<Proof>();
  out->rule = p.rule;
  out->typeArgs = p.typeArgs;
  out->ctx = sigma.target;
  out->type = p.type;
  for (const auto& [n, v] : p.assignment) {
    const MetaVarDecl* d = find_decl(rule->metaCtx, n);
    auto binders = d ? instantiate(d->binders, asg.types) : std::vector<Type>{};
    out->assignment[n] = nf(substitute(v, lift_subst(sigma, binders)), sigma.target.size() + binders.size());
  }
  for (std::size_t i = 0; i < p.subproofs.size() && i < rule->premises.size(); ++i)
    out->subproofs.push_back(
        subst_rec(lang, nf, *p.subproofs[i], lift_subst(sigma, instantiate(rule->premises[i].binders, asg.types))));
  asg.values = out->assignment;
  EvalScope top{out->ctx.size(), out->ctx, &rule->metaCtx};
  out->src = nf(eval_metaterm(rule->conclusion.src, asg, top), out->ctx.size());
  out->tgt = nf(eval_metaterm(rule->conclusion.tgt, asg, top), out->ctx.size());
  return out;
}

}  // namespace

std::pair<Term, Term> check_proof(const LanguageBundle& lang, const Proof& p) {
  Normalizer nf(lang);
  return check_rec(lang, nf, p);
}

ProofPtr substitute_proof(const LanguageBundle& lang, const Proof& p, const Substitution& sigma) {
  if (sigma.source != p.ctx) throw Error(ErrorKind::Type, "substitution source differs from the proof context");
  check_substitution(lang.monad.base, sigma);
  Normalizer nf(lang);
  return subst_rec(lang, nf, p, sigma);
}

Term state_substitute(const LanguageBundle& lang, const Term& s, const Substitution& sigma) {
  return Normalizer(lang)(substitute(s, sigma), sigma.target.size());
}

// ---------------------------------------------------------------- saturation

Type source_type(const LanguageBundle& lang, const Context& ctx, const Term& s) {
  return typecheck_state(lang.monad.base, lang.s1, ctx, s);
}

namespace {

const OperationScheme* injection(const StateSignature& st) {
  const OperationScheme* found = nullptr;
  for (const auto& op : st.ops) {
    if (op.args.size() != 1 || !op.args[0].binders.empty() || op.args[0].shape.kind != Shape::Kind::Term) continue;
    if (!(op.args[0].shape.type == op.output)) continue;
    if (found) return nullptr;
    found = &op;
  }
  return found;
}

void leaves(const Term& t, std::vector<Term>& out);

void leaves(const Val& v, std::vector<Term>& out) {
  if (v.kind == Val::Kind::Term) {
    if (v.term->kind == Node::Kind::State) {
      leaves(v.term, out);
    } else {
      out.push_back(v.term);
    }
    return;
  }
  for (const auto& p : v.parts) leaves(p, out);
}

void leaves(const Term& t, std::vector<Term>& out) {
  for (const auto& a : t->args)
    if (a.binders.empty()) leaves(a.value, out);
}

}  // namespace

std::vector<Term> next_sources(const LanguageBundle& lang, const Context& ctx, const Term& target) {
  try {
    source_type(lang, ctx, target);
    return {target};
  } catch (const Error&) {
  }
  std::vector<Term> ls;
  if (target->kind == Node::Kind::State) {
    leaves(target, ls);
  } else {
    ls.push_back(target);
  }
  std::vector<Term> out;
  const OperationScheme* inj = lang.s1.identity ? nullptr : injection(lang.s1);
  if (!lang.s1.identity && !inj) return out;
  for (const auto& l : ls) {
    if (lang.s1.identity) {
      out.push_back(l);
      continue;
    }
    Type ty = typecheck_term(lang.monad.base, ctx, l);
    std::vector<Type> tyargs;
    if (!inj->typeParams.empty()) {
      TypeMap m;
      std::set<std::string> ps(inj->typeParams.begin(), inj->typeParams.end());
      if (!match_type(inj->output, ty, ps, m)) continue;
      for (const auto& p : inj->typeParams) tyargs.push_back(m.count(p) ? m[p] : ty);
    }
    Term s = make_node(Node::Kind::State, inj->name, tyargs, {Arg{{}, Val::of(l)}});
    try {
      source_type(lang, ctx, s);
      out.push_back(s);
    } catch (const Error&) {
    }
  }
  std::sort(out.begin(), out.end(), TermLess());
  out.erase(std::unique(out.begin(), out.end(), TermEq()), out.end());
  return out;
}

LTS saturate(Engine& engine, const Context& ctx, const std::vector<Term>& seeds, const SaturateConfig& cfg) {
  const LanguageBundle& lang = engine.lang();
  LTS lts;
  lts.ctx = ctx;
  std::set<Term, TermLess> seen;
  std::vector<Term> frontier;
  for (const auto& s : seeds) {
    source_type(lang, ctx, s);
    Term n = engine.normalizer()(s, ctx.size());
    if (seen.insert(n).second) frontier.push_back(n);
  }
  std::sort(frontier.begin(), frontier.end(), TermLess());
  std::map<std::tuple<Type, Term, Term>, std::size_t> edgeIndex;
  auto edge_less = [](const std::tuple<Type, Term, Term>& a, const std::tuple<Type, Term, Term>& b) {
    if (int c = compare(std::get<0>(a), std::get<0>(b))) return c < 0;
    if (int c = compare(std::get<1>(a), std::get<1>(b))) return c < 0;
    return compare(std::get<2>(a), std::get<2>(b)) < 0;
  };
  std::map<std::tuple<Type, Term, Term>, std::vector<ProofPtr>, decltype(edge_less)> edges(edge_less);
  for (std::size_t step = 0; step <= cfg.stepBound && !frontier.empty(); ++step) {
    std::vector<Term> next;
    for (const auto& s : frontier) {
      Type ty = source_type(lang, ctx, s);
      for (const auto& [tgt, proof] : engine.derive(ty, ctx, s, cfg.derive)) {
        edges[{ty, s, tgt}].push_back(proof);
        if (step == cfg.stepBound) continue;
        for (const auto& n : next_sources(lang, ctx, tgt)) {
          if (seen.size() >= cfg.maxStates) break;
          if (seen.insert(n).second) next.push_back(n);
        }
      }
    }
    std::sort(next.begin(), next.end(), TermLess());
    frontier = std::move(next);
  }
  lts.states.assign(seen.begin(), seen.end());
  for (auto& [k, proofs] : edges) {
    std::sort(proofs.begin(), proofs.end(), [](const ProofPtr& a, const ProofPtr& b) {
      if (a->size() != b->size()) return a->size() < b->size();
      return compare(*a, *b) < 0;
    });
    lts.edges.push_back(Edge{std::get<0>(k), std::get<1>(k), std::get<2>(k), std::move(proofs)});
  }
  return lts;
}

LTS saturate(const LanguageBundle& lang, const Context& ctx, const std::vector<Term>& seeds, const SaturateConfig& cfg) {
  Engine e(lang);
  return saturate(e, ctx, seeds, cfg);
}

bool RelationEdge::operator<(const RelationEdge& o) const {
  if (int c = compare(type, o.type)) return c < 0;
  if (int c = compare(src, o.src)) return c < 0;
  return compare(tgt, o.tgt) < 0;
}

bool RelationEdge::operator==(const RelationEdge& o) const {
  return type == o.type && same(src, o.src) && same(tgt, o.tgt);
}

Relation make_relation(std::vector<RelationEdge> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Relation extract_relation(const LTS& lts) {
  std::vector<RelationEdge> out;
  for (const auto& e : lts.edges)
    if (!e.proofs.empty()) out.push_back(RelationEdge{e.type, e.src, e.tgt});
  return make_relation(std::move(out));
}

// ---------------------------------------------------------------- export

std::string to_dot(const LTS& lts) {
  std::ostringstream os;
  os << "digraph {\n";
  for (const auto& s : lts.states) os << "  \"" << to_sexpr(s) << "\";\n";
  for (const auto& e : lts.edges)
    os << "  \"" << to_sexpr(e.src) << "\" -> \"" << to_sexpr(e.tgt) << "\" [label=\"" << e.proofs.front()->rule
       << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string edge_records(const LTS& lts) {
  std::ostringstream os;
  for (const auto& e : lts.edges)
    os << "edge " << e.type.str() << " " << to_sexpr(e.src) << " " << to_sexpr(e.tgt) << " " << e.proofs.front()->size()
       << "\n";
  return os.str();
}

std::string edge_records(const Relation& rel) {
  std::ostringstream os;
  for (const auto& e : rel) os << "edge " << e.type.str() << " " << to_sexpr(e.src) << " " << to_sexpr(e.tgt) << " 0\n";
  return os.str();
}

std::string proof_sexpr(const Proof& p) {
  std::string out = "(proof " + p.rule + " (tyargs";
  for (const auto& t : p.typeArgs) out += " " + t.str();
  out += ") (assign";
  for (const auto& [n, v] : p.assignment) out += " (" + n + " " + to_sexpr(v) + ")";
  out += ") " + to_sexpr(p.src) + " " + to_sexpr(p.tgt);
  for (const auto& s : p.subproofs) out += " " + proof_sexpr(*s);
  return out + ")";
}

namespace {

nlohmann::json to_json(const Proof& p) {
  nlohmann::json j;
  j["rule"] = p.rule;
  j["typeArgs"] = nlohmann::json::array();
  for (const auto& t : p.typeArgs) j["typeArgs"].push_back(t.str());
  j["context"] = nlohmann::json::array();
  for (const auto& t : p.ctx) j["context"].push_back(t.str());
  j["type"] = p.type.str();
  j["assignment"] = nlohmann::json::object();
  for (const auto& [n, v] : p.assignment) j["assignment"][n] = to_sexpr(v);
  j["subproofs"] = nlohmann::json::array();
  for (const auto& s : p.subproofs) j["subproofs"].push_back(to_json(*s));
  j["src"] = to_sexpr(p.src);
  j["tgt"] = to_sexpr(p.tgt);
  return j;
}

ProofPtr from_json(const nlohmann::json& j) {
  auto p = std::make_shared<Proof>();
  p->rule = j.at("rule").get<std::string>();
  for (const auto& t : j.at("typeArgs")) p->typeArgs.push_back(parse_type(read_sexpr(t.get<std::string>())));
  for (const auto& t : j.at("context")) p->ctx.push_back(parse_type(read_sexpr(t.get<std::string>())));
  p->type = parse_type(read_sexpr(j.at("type").get<std::string>()));
  for (const auto& [n, v] : j.at("assignment").items()) p->assignment[n] = parse_val(read_sexpr(v.get<std::string>()));
  for (const auto& s : j.at("subproofs")) p->subproofs.push_back(from_json(s));
  p->src = parse_term(j.at("src").get<std::string>());
  p->tgt = parse_term(j.at("tgt").get<std::string>());
  return p;
}

}  // namespace

std::string proof_json(const Proof& p, int indent) { return to_json(p).dump(indent); }

ProofPtr proof_from_json(const std::string& text) {
  try {
    return from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("proof json: ") + e.what());
  }
}

}  // namespace tmonad
