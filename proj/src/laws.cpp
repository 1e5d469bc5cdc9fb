#include "tmonad/laws.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include "tmonad/sexpr.hpp"

namespace tmonad {

// ---------------------------------------------------------------- generator

Generator::Generator(const LanguageBundle& lang, std::uint64_t seed) : lang_(lang), rng_(seed) {
  types_ = lang.monad.base.universe.default_candidates();
  for (const auto& t : lang.s1.universe.default_candidates())
    if (std::find(types_.begin(), types_.end(), t) == types_.end() && lang.monad.base.universe.contains(t))
      types_.push_back(t);
}

std::size_t Generator::below(std::size_t n) {
  if (n == 0) return 0;
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

Type Generator::type() { return types_[below(types_.size())]; }

Context Generator::context(std::size_t extra) {
  Context ctx = types_;
  std::size_t k = below(extra + 1);
  for (std::size_t i = 0; i < k; ++i) ctx.push_back(type());
  std::shuffle(ctx.begin(), ctx.end(), rng_);
  return ctx;
}

Term Generator::term(const Context& ctx, const Type& ty, std::size_t depth) {
  return build(lang_.monad.base.ops, Node::Kind::Op, nullptr, ctx, ty, depth);
}

Term Generator::state(const StateSignature& st, const Context& ctx, const Type& ty, std::size_t depth) {
  if (st.identity) return term(ctx, ty, depth);
  return build(st.ops, Node::Kind::State, &st, ctx, ty, depth);
}

std::optional<Val> Generator::value(const StateSignature* own, const Context& ctx, const Shape& shape,
                                    std::size_t depth) {
  switch (shape.kind) {
    case Shape::Kind::Term: {
      Term t = term(ctx, shape.type, depth);
      if (!t) return std::nullopt;
      return Val::of(t);
    }
    case Shape::Kind::Rec:
    case Shape::Kind::Embed: {
      const StateSignature* st = shape.kind == Shape::Kind::Rec ? own : &lang_.s1;
      if (!st) return std::nullopt;
      Term t = state(*st, ctx, shape.type, depth);
      if (!t) return std::nullopt;
      return Val::of(t);
    }
    case Shape::Kind::Const:
      if (shape.labels.empty()) return std::nullopt;
      return Val::constant(shape.labels[below(shape.labels.size())]);
    case Shape::Kind::Prod: {
      std::vector<Val> parts;
      for (const auto& p : shape.parts) {
        auto v = value(own, ctx, p, depth);
        if (!v) return std::nullopt;
        parts.push_back(*v);
      }
      return Val::prod(std::move(parts));
    }
    case Shape::Kind::Sum: {
      std::vector<std::size_t> order(shape.parts.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t i : order)
        if (auto v = value(own, ctx, shape.parts[i], depth)) return Val::sum(shape.labels[i], *v);
      return std::nullopt;
    }
    case Shape::Kind::Bag: {
      std::vector<Val> parts;
      std::size_t n = below(3);
      for (std::size_t i = 0; i < n; ++i)
        if (auto v = value(own, ctx, shape.parts[0], depth)) parts.push_back(*v);
      return Val::bag(std::move(parts));
    }
  }
  return std::nullopt;
}

Term Generator::build(const std::vector<OperationScheme>& ops, Node::Kind kind, const StateSignature* own,
                      const Context& ctx, const Type& ty, std::size_t depth) {
  std::vector<std::size_t> vars;
  if (kind == Node::Kind::Op)
    for (std::size_t i = 0; i < ctx.size(); ++i)
      if (ctx[i] == ty) vars.push_back(i);
  struct Cand {
    const OperationScheme* op;
    TypeMap m;
  };
  std::vector<Cand> cands;
  for (const auto& op : ops) {
    if (depth == 0 && !op.args.empty()) continue;
    std::set<std::string> params(op.typeParams.begin(), op.typeParams.end());
    TypeMap m;
    if (!match_type(op.output, ty, params, m)) continue;
    for (const auto& p : op.typeParams)
      if (!m.count(p)) m[p] = type();
    cands.push_back({&op, m});
  }
  std::shuffle(cands.begin(), cands.end(), rng_);
  bool preferVar = !vars.empty() && (cands.empty() || below(10) < 2);
  if (preferVar) return make_var(vars[below(vars.size())]);
  for (const auto& c : cands) {
    std::vector<Arg> args;
    bool ok = true;
    for (const auto& a : c.op->args) {
      auto binders = instantiate(a.binders, c.m);
      auto v = value(own, extend(ctx, binders), instantiate(a.shape, c.m), depth - 1);
      if (!v) {
        ok = false;
        break;
      }
      args.push_back(Arg{binders, *v});
    }
    if (!ok) continue;
    std::vector<Type> tyargs;
    for (const auto& p : c.op->typeParams) tyargs.push_back(c.m.at(p));
    return make_node(kind, c.op->name, std::move(tyargs), std::move(args));
  }
  if (!vars.empty()) return make_var(vars[below(vars.size())]);
  return nullptr;
}

Substitution Generator::substitution(const Context& source, const Context& target, std::size_t depth) {
  Substitution s{source, target, {}};
  for (const auto& ty : source) {
    Term t = term(target, ty, below(depth + 1));
    if (!t) throw Error(ErrorKind::Type, "no term of type " + ty.str() + " over the target context");
    s.images.push_back(t);
  }
  return s;
}

Renaming Generator::renaming(const Context& source, const Context& target) {
  Renaming f{source, target, {}};
  for (const auto& ty : source) {
    std::vector<std::size_t> js;
    for (std::size_t j = 0; j < target.size(); ++j)
      if (target[j] == ty) js.push_back(j);
    if (js.empty()) throw Error(ErrorKind::Type, "renaming target lacks type " + ty.str());
    f.map.push_back(js[below(js.size())]);
  }
  return f;
}

// ---------------------------------------------------------------- suites

namespace {

using Case = std::function<std::optional<std::string>(Generator&)>;

std::string show(const Term& t) { return t ? to_sexpr(t) : "<none>"; }

std::optional<std::string> differ(const char* what, const Term& a, const Term& b) {
  if (same(a, b)) return std::nullopt;
  return std::string(what) + ": " + show(a) + " vs " + show(b);
}

std::optional<std::string> differ(const char* what, const std::vector<Term>& a, const std::vector<Term>& b) {
  if (a.size() != b.size()) return std::string(what) + ": lengths differ";
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return std::string(what) + " at " + std::to_string(i) + ": " + show(a[i]) + " vs " + show(b[i]);
  return std::nullopt;
}

struct Suite {
  const LanguageBundle& lang;
  const LawConfig& cfg;

  Term nf(const Context& ctx, const Term& t) const { return normalize(lang, ctx, t); }
  Term nfs(const Context& ctx, const Term& s) const { return normalize_state(lang, ctx, s); }

  // random term of a random type, retrying until one exists
  std::pair<Type, Term> some_term(Generator& g, const Context& ctx) const {
    for (int i = 0; i < 64; ++i) {
      Type ty = g.type();
      if (Term t = g.term(ctx, ty, 1 + g.below(cfg.depth))) return {ty, t};
    }
    throw Error(ErrorKind::Type, "no term could be generated");
  }

  const StateSignature& some_side(Generator& g) const { return g.below(2) ? lang.s1 : lang.s2; }

  std::pair<Type, Term> some_state(Generator& g, const StateSignature& st, const Context& ctx) const {
    auto tys = st.universe.default_candidates();
    for (int i = 0; i < 64; ++i) {
      Type ty = tys[g.below(tys.size())];
      if (Term s = g.state(st, ctx, ty, 1 + g.below(cfg.depth))) return {ty, s};
    }
    throw Error(ErrorKind::Type, "no state could be generated");
  }

  std::vector<std::pair<std::string, Case>> cases() const {
    std::vector<std::pair<std::string, Case>> out;
    out.emplace_back("subst-left-unit", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context();
      auto s = g.substitution(G, D, 2);
      std::size_t i = g.below(G.size());
      return differ("(var i)[s] = s(i)", substitute(mk_var(G, i), s), s.images[i]);
    });
    out.emplace_back("subst-right-unit", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context();
      auto [ty, t] = some_term(g, G);
      return differ("t[id] = t", nf(G, substitute(t, Substitution::identity(G))), nf(G, t));
    });
    out.emplace_back("subst-assoc", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context(), E = g.context();
      auto [ty, t] = some_term(g, G);
      auto s = g.substitution(G, D, 2);
      auto u = g.substitution(D, E, 2);
      return differ("t[s][u] = t[s;u]", nf(E, substitute(substitute(t, s), u)), nf(E, substitute(t, compose(s, u))));
    });
    out.emplace_back("rename-coherence", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context();
      auto [ty, t] = some_term(g, G);
      auto f = g.renaming(G, D);
      Term r = rename(t, f);
      if (!(typecheck_term(lang.monad.base, D, r) == ty)) return "rename changed the type of " + show(t);
      return differ("rename t f = t[eta . f]", r, substitute(t, renaming_subst(f)));
    });
    out.emplace_back("rename-functor", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context(), E = g.context();
      auto [ty, t] = some_term(g, G);
      Renaming id{G, G, {}};
      for (std::size_t i = 0; i < G.size(); ++i) id.map.push_back(i);
      if (auto d = differ("rename t id = t", rename(t, id), t)) return d;
      auto f = g.renaming(G, D);
      auto h = g.renaming(D, E);
      Renaming fh{G, E, {}};
      for (auto j : f.map) fh.map.push_back(h.map[j]);
      return differ("rename (rename t f) h = rename t (f;h)", rename(rename(t, f), h), rename(t, fh));
    });
    out.emplace_back("lift-unit", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context();
      std::vector<Type> bs = g.context(0);
      bs.resize(g.below(3));
      auto l = lift_subst(Substitution::identity(G), bs);
      return differ("lift id = id", l.images, Substitution::identity(extend(G, bs)).images);
    });
    out.emplace_back("lift-compose", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context(), E = g.context();
      std::vector<Type> bs = g.context(0);
      bs.resize(1 + g.below(2));
      auto s = g.substitution(G, D, 2);
      auto u = g.substitution(D, E, 2);
      auto a = lift_subst(compose(s, u), bs);
      auto b = compose(lift_subst(s, bs), lift_subst(u, bs));
      if (auto d = differ("lift (s;u) = lift s ; lift u", a.images, b.images)) return d;
      auto [ty, t] = some_term(g, G);
      return differ("(weaken t)[lift s] = weaken (t[s])", substitute(weaken(t, G.size(), bs.size()), lift_subst(s, bs)),
                    weaken(substitute(t, s), D.size(), bs.size()));
    });
    out.emplace_back("state-unit", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context();
      auto [ty, s] = some_state(g, some_side(g), G);
      return differ("s[id] = s", state_substitute(lang, s, Substitution::identity(G)), nfs(G, s));
    });
    out.emplace_back("state-assoc", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context(), E = g.context();
      const StateSignature& st = some_side(g);
      auto [ty, s] = some_state(g, st, G);
      auto a = g.substitution(G, D, 2);
      auto b = g.substitution(D, E, 2);
      Term l = state_substitute(lang, state_substitute(lang, s, a), b);
      Term r = state_substitute(lang, s, compose(a, b));
      if (!(typecheck_state(lang.monad.base, st, E, r) == ty)) return "state substitution changed the type";
      return differ("s[a][b] = s[a;b]", l, r);
    });
    out.emplace_back("typing-preservation", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context();
      auto [ty, t] = some_term(g, G);
      auto s = g.substitution(G, D, 2);
      check_substitution(lang.monad.base, s);
      Type got = typecheck_term(lang.monad.base, D, substitute(t, s));
      if (!(got == ty)) return "t : " + ty.str() + " but t[s] : " + got.str();
      return std::nullopt;
    });
    out.emplace_back("normalize-retraction", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context();
      auto [ty, t] = some_term(g, G);
      Term n = nf(G, t);
      if (!(typecheck_term(lang.monad.base, G, n) == ty)) return "normalize changed the type of " + show(t);
      if (auto d = differ("nf (nf t) = nf t", nf(G, n), n)) return d;
      auto [sty, s] = some_state(g, some_side(g), G);
      Term m = nfs(G, s);
      return differ("nf (nf s) = nf s", nfs(G, m), m);
    });
    out.emplace_back("normalize-substitution", [this](Generator& g) -> std::optional<std::string> {
      Context G = g.context(), D = g.context();
      auto [ty, t] = some_term(g, G);
      auto s = g.substitution(G, D, 2);
      return differ("nf (nf t)[s] = nf t[s]", nf(D, substitute(nf(G, t), s)), nf(D, substitute(t, s)));
    });
    return out;
  }
};

void collect(const ProofPtr& p, std::vector<ProofPtr>& out) {
  out.push_back(p);
  for (const auto& q : p->subproofs) collect(q, out);
}

}  // namespace

namespace {

// a source for `rule`: premise 1's source taken from a known proof when
// `from` is given, every other metavariable of the conclusion source random
std::optional<std::tuple<Context, Type, Term>> rule_source(const LanguageBundle& lang, Engine& engine, Generator& gen,
                                                           const RuleSpec& rule, const Proof* from, std::size_t depth) {
  std::set<std::string> params(rule.typeParams.begin(), rule.typeParams.end());
  Assignment asg;
  Context ctx;
  if (from) {
    const Judgement& prem = rule.premises[0];
    if (from->ctx.size() < prem.binders.size()) return std::nullopt;
    std::size_t gamma = from->ctx.size() - prem.binders.size();
    if (!match_type(prem.type, from->type, params, asg.types)) return std::nullopt;
    for (std::size_t i = 0; i < prem.binders.size(); ++i)
      if (!match_type(prem.binders[i], from->ctx[gamma + i], params, asg.types)) return std::nullopt;
    auto ms = engine.match(rule, prem.src, from->src, from->ctx, gamma, asg, true);
    if (ms.empty()) return std::nullopt;
    asg = ms[gen.below(ms.size())];
    ctx.assign(from->ctx.begin(), from->ctx.begin() + gamma);
  } else {
    ctx = gen.context(1);
  }
  for (const auto& p : rule.typeParams)
    if (!asg.types.count(p)) asg.types[p] = gen.type();
  std::set<std::string> needed;
  collect_mvars(rule.conclusion.src, needed);
  for (const auto& d : rule.metaCtx) {
    if (!needed.count(d.name) || asg.values.count(d.name)) continue;
    Context inner = extend(ctx, instantiate(d.binders, asg.types));
    std::size_t dp = 1 + gen.below(depth);
    std::optional<Val> v;
    switch (d.sort) {
      case MetaVarDecl::Sort::Term:
        if (Term t = gen.term(inner, instantiate(d.type, asg.types), dp)) v = Val::of(t);
        break;
      case MetaVarDecl::Sort::State1:
      case MetaVarDecl::Sort::State2: {
        const StateSignature& st = d.sort == MetaVarDecl::Sort::State1 ? lang.s1 : lang.s2;
        if (Term t = gen.state(st, inner, instantiate(d.type, asg.types), dp)) v = Val::of(t);
        break;
      }
      case MetaVarDecl::Sort::Shape: v = gen.value(nullptr, inner, instantiate(d.shape, asg.types), dp); break;
    }
    if (!v) return std::nullopt;
    asg.values[d.name] = *v;
  }
  Type ty = instantiate(rule.conclusion.type, asg.types);
  Term src = eval_metaterm(rule.conclusion.src, asg, EvalScope{ctx.size(), ctx, &rule.metaCtx});
  typecheck_state(lang.monad.base, lang.s1, ctx, src);
  return std::make_tuple(ctx, ty, normalize_state(lang, ctx, src));
}

}  // namespace

std::vector<ProofPtr> proof_pool(const LanguageBundle& lang, Generator& gen, std::size_t want, std::size_t depth,
                                 std::size_t fuel) {
  Engine engine(lang);
  std::vector<ProofPtr> pool;
  std::set<std::string> seen;
  auto add = [&](const Context& ctx, const Type& ty, const Term& s) {
    std::vector<ProofPtr> found;
    for (const auto& d : engine.derive(ty, ctx, s, DeriveConfig{fuel, 4})) collect(d.second, found);
    for (const auto& p : found)
      if (pool.size() < want && seen.insert(proof_sexpr(*p)).second) pool.push_back(p);
  };
  auto tys = lang.s1.universe.default_candidates();
  for (std::size_t attempt = 0; attempt < want * 10 && pool.size() < want / 2; ++attempt) {
    Context ctx = gen.context(1);
    Type ty = tys[gen.below(tys.size())];
    Term s = gen.state(lang.s1, ctx, ty, 1 + gen.below(depth));
    if (s) add(ctx, ty, normalize_state(lang, ctx, s));
  }
  if (lang.rules.empty()) return pool;
  for (std::size_t attempt = 0; attempt < want * 40 && pool.size() < want; ++attempt) {
    const RuleSpec& rule = lang.rules[gen.below(lang.rules.size())];
    const Proof* from = nullptr;
    if (!rule.premises.empty() && !pool.empty() && gen.below(4) != 0) from = pool[gen.below(pool.size())].get();
    try {
      if (auto src = rule_source(lang, engine, gen, rule, from, depth)) add(std::get<0>(*src), std::get<1>(*src), std::get<2>(*src));
    } catch (const Error&) {
    }
  }
  return pool;
}

std::vector<std::string> law_names() {
  return {"subst-left-unit", "subst-right-unit", "subst-assoc", "rename-coherence", "rename-functor",
          "lift-unit", "lift-compose", "state-unit", "state-assoc", "typing-preservation",
          "normalize-retraction", "normalize-substitution", "transition-stability"};
}

std::vector<LawReport> run_laws(const LanguageBundle& lang, const LawConfig& cfg, const std::vector<std::string>& only) {
  auto wanted = [&](const std::string& n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  auto names = law_names();
  for (const auto& n : only)
    if (std::find(names.begin(), names.end(), n) == names.end()) throw Error(ErrorKind::Validation, "unknown law " + n);
  std::vector<LawReport> out;
  Suite suite{lang, cfg};
  std::size_t index = 0;
  for (auto& [name, fn] : suite.cases()) {
    ++index;
    if (!wanted(name)) continue;
    // one stream per law
    Generator g(lang, cfg.seed * 1000003 + index);
    LawReport r;
    r.law = name;
    for (std::size_t i = 0; i < cfg.cases; ++i) {
      std::optional<std::string> bad;
      try {
        bad = fn(g);
      } catch (const std::exception& e) {
        bad = std::string("exception: ") + e.what();
      }
      ++r.cases;
      if (bad) {
        if (!r.failures) r.counterexample = *bad;
        ++r.failures;
      }
    }
    out.push_back(std::move(r));
  }
  if (wanted("transition-stability") && !lang.rules.empty()) {
    Generator g(lang, cfg.seed * 1000003 + 999);
    LawReport r;
    r.law = "transition-stability";
    auto pool = proof_pool(lang, g, 200, cfg.depth, cfg.fuel);
    if (pool.empty()) r.counterexample = "no derivable transitions were found";
    for (std::size_t i = 0; i < cfg.proofCases && !pool.empty(); ++i) {
      const Proof& p = *pool[g.below(pool.size())];
      ++r.cases;
      std::optional<std::string> bad;
      try {
        Context D = g.context();
        auto s = g.substitution(p.ctx, D, 2);
        auto q = substitute_proof(lang, p, s);
        auto [src, tgt] = check_proof(lang, *q);
        bad = differ("source", src, state_substitute(lang, p.src, s));
        if (!bad) bad = differ("target", tgt, state_substitute(lang, p.tgt, s));
        if (bad) *bad = p.rule + " " + *bad;
      } catch (const std::exception& e) {
        bad = std::string("exception: ") + e.what();
      }
      if (bad) {
        if (!r.failures) r.counterexample = *bad;
        ++r.failures;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_reports(const std::string& language, const std::vector<LawReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    os << language << "  " << r.law << "  " << (r.ok() ? "ok" : "FAIL") << "  " << r.cases - r.failures << "/" << r.cases;
    if (!r.ok() && !r.counterexample.empty()) os << "  " << r.counterexample;
    os << "\n";
  }
  return os.str();
}

}  // namespace tmonad
