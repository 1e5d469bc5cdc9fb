#include <gtest/gtest.h>

#include "support.hpp"
#include "tmonad/laws.hpp"

using namespace tmonad;
using namespace testing_support;

namespace {

// Direct call-by-value evaluator for the simply typed λ-calculus states.
Term eval_stlc(const Term& s, const Context& ctx) {
  if (s->op == "val") return s->args[0].value.term;
  Term f = eval_stlc(s->args[0].value.term, ctx);
  if (!f || f->kind != Node::Kind::Op || f->op != "lam") return nullptr;
  Term w = eval_stlc(s->args[1].value.term, ctx);
  if (!w) return nullptr;
  Substitution sigma = Substitution::identity(ctx);
  sigma.source = extend(ctx, f->args[0].binders);
  sigma.images.push_back(w);
  return eval_stlc(substitute(f->args[0].value.term, sigma), ctx);
}

LanguageBundle without_rules(const LanguageBundle& lang, const std::set<std::string>& drop) {
  LanguageBundle out = lang;
  std::erase_if(out.rules, [&](const RuleSpec& r) { return drop.count(r.name) > 0; });
  return out;
}

}  // namespace

TEST(Stlc, IdentityAppliedToVariable) {
  const auto& lang = bundled("cbv-stlc");
  NamedContext ctx;
  Term s = state(lang, ctx, "(app (val (lam (x) x)) (val y))", ty("A"));
  auto ds = derive(lang, ty("A"), ctx.types, s);
  ASSERT_FALSE(ds.empty());
  for (const auto& [t, p] : ds) {
    EXPECT_TRUE(same(t, make_var(0)));
    EXPECT_EQ(p->rule, "beta");
    auto [src, tgt] = check_proof(lang, *p);
    EXPECT_TRUE(same(src, s));
    EXPECT_TRUE(same(tgt, t));
  }
}

TEST(Stlc, StuckApplicationOfVariable) {
  const auto& lang = bundled("cbv-stlc");
  NamedContext ctx = named("((y A) (f (-> A A)))");
  Term s = state(lang, ctx, "(app (lam (x) x) (app f y))", ty("A"));
  EXPECT_TRUE(targets(lang, ctx.types, s).empty());
}

TEST(Stlc, DerivationsMatchDirectEvaluator) {
  const auto& lang = bundled("cbv-stlc");
  Context ctx{ty("A"), ty("(-> A A)")};
  Enumerator e(lang.monad.base);
  std::size_t stuck = 0, evaluated = 0;
  for (const char* t : {"A", "(-> A A)"}) {
    for (const auto& s : e.states(lang.s1, ctx, ty(t), 5)) {
      Term expected = eval_stlc(s, ctx);
      std::set<std::string> want;
      if (expected) want.insert(to_sexpr(expected));
      (expected ? evaluated : stuck)++;
      EXPECT_EQ(targets(lang, ctx, s, 10), want) << to_sexpr(s);
    }
  }
  EXPECT_GT(evaluated, 0u);
  EXPECT_GT(stuck, 0u);
}

TEST(LambdaBarMu, BasicRedexes) {
  const auto& lang = bundled("lambda-bar-mu");
  NamedContext ctx = named("((x p) (k s))");
  Term mu = state(lang, ctx, "(cmd (mu (a) x (a) a) k)", ty("c"));
  Term lam = state(lang, ctx, "(cmd (lam (y) y) (cons x k))", ty("c"));
  std::string want = to_sexpr(state(lang, ctx, "(cmd x k)", ty("c")));
  EXPECT_EQ(targets(lang, ctx.types, mu), std::set<std::string>{want});
  EXPECT_EQ(targets(lang, ctx.types, lam), std::set<std::string>{want});
}

TEST(LambdaBarMu, NestedRedexNeedsCongruences) {
  const auto& lang = bundled("lambda-bar-mu");
  NamedContext ctx;
  Term s = state(lang, ctx, "(etap (lam (y) (lam (z) (mu (a) (lam (w) w) (a) (cons y a)))))", ty("p"));
  std::string want = to_sexpr(state(lang, ctx, "(etap (lam (y) (lam (z) (mu (a) y (a) a))))", ty("p")));
  EXPECT_EQ(targets(lang, ctx.types, s), std::set<std::string>{want});
  LanguageBundle basic = without_rules(lang, {"cmd-left", "cmd-right", "mu-cong", "lam-cong", "cons-left", "cons-right"});
  ASSERT_EQ(basic.rules.size(), 2u);
  EXPECT_TRUE(targets(basic, ctx.types, s).empty());
  NamedContext c2 = named("((x p) (k s))");
  EXPECT_FALSE(targets(basic, c2.types, state(basic, c2, "(cmd (lam (y) y) (cons x k))", ty("c"))).empty());
}

TEST(Pi, CommunicationAndPrefixes) {
  const auto& lang = bundled("pi");
  NamedContext ctx;
  Term s = state(lang, ctx, "(par (out a b nil) (in a (c) nil))");
  auto ts = targets(lang, ctx.types, s);
  ASSERT_EQ(ts.size(), 1u);
  NamedContext same_ctx = ctx;
  EXPECT_EQ(*ts.begin(), nstate(lang, same_ctx, "(par nil nil)"));
  EXPECT_TRUE(targets(lang, ctx.types, state(lang, ctx, "(out a b (par (out a b nil) (in a (c) nil)))")).empty());
  EXPECT_TRUE(targets(lang, ctx.types, state(lang, ctx, "(in a (d) (par (out d b nil) (in d (c) nil)))")).empty());
  auto scoped = targets(lang, ctx.types, state(lang, ctx, "(nu (x) (par (out x b (out b b nil)) (in x (c) (out c c nil))))"));
  EXPECT_EQ(scoped.size(), 1u);
}

TEST(Pi, MatchingIsModuloStructuralCongruence) {
  const auto& lang = bundled("pi");
  NamedContext ctx;
  Term s = state(lang, ctx, "(par (in a (c) (out c c nil)) (par (out b b nil) (out a b nil)))");
  auto ts = targets(lang, ctx.types, s);
  NamedContext c2 = ctx;
  EXPECT_TRUE(ts.count(nstate(lang, c2, "(par (out b b nil) (out b b nil))")));
}

TEST(Proofs, CheckRejectsTampering) {
  const auto& lang = bundled("lambda-bar-mu");
  NamedContext ctx;
  Term s = state(lang, ctx, "(etap (lam (y) (mu (a) (lam (w) w) (a) (cons y a))))", ty("p"));
  auto ds = derive(lang, ty("p"), ctx.types, s);
  ASSERT_FALSE(ds.empty());
  const Proof& p = *ds.front().second;
  EXPECT_NO_THROW(check_proof(lang, p));
  auto kind = [&](const Proof& q) {
    try {
      check_proof(lang, q);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Validation;
  };
  Proof renamed = p;
  renamed.rule = "no-such-rule";
  EXPECT_EQ(kind(renamed), ErrorKind::InvalidProof);
  Proof pruned = p;
  pruned.subproofs.clear();
  EXPECT_EQ(kind(pruned), ErrorKind::InvalidProof);
  Proof swapped = p;
  swapped.rule = "lam-red";
  EXPECT_EQ(kind(swapped), ErrorKind::InvalidProof);
}

TEST(Proofs, SubstitutionKeepsProofsValid) {
  const auto& lang = bundled("untyped-lambda");
  NamedContext ctx = named("((y *) (z *))");
  Term s = state(lang, ctx, "(app (lam (x) (app x x)) y)");
  auto ds = derive(lang, Type::atom("*"), ctx.types, s);
  ASSERT_EQ(ds.size(), 1u);
  Substitution sigma;
  sigma.source = ctx.types;
  sigma.target = Context{Type::atom("*")};
  NamedContext tctx = named("((u *))");
  sigma.images = {term(lang, tctx, "(lam (v) (app v u))"), make_var(0)};
  ProofPtr q = substitute_proof(lang, *ds.front().second, sigma);
  auto [src, tgt] = check_proof(lang, *q);
  EXPECT_TRUE(same(src, state_substitute(lang, s, sigma)));
  EXPECT_TRUE(same(tgt, state_substitute(lang, ds.front().first, sigma)));
}

TEST(Proofs, JsonRoundTrip) {
  for (const char* name : {"cbv-stlc", "pi", "diff-lambda", "lambda-bar-mu"}) {
    const auto& lang = bundled(name);
    Generator gen(lang, 4);
    for (const auto& p : proof_pool(lang, gen, 20, 3, 6)) {
      ProofPtr back = proof_from_json(proof_json(*p));
      EXPECT_EQ(compare(*back, *p), 0) << name;
      EXPECT_EQ(proof_sexpr(*back), proof_sexpr(*p));
    }
  }
}

TEST(Saturate, DotIsByteStable) {
  const auto& lang = bundled("untyped-lambda");
  NamedContext ctx = named("((z *))");
  Term s = state(lang, ctx, "(app (lam (x) (app x x)) (app (lam (y) y) z))");
  std::string a = to_dot(saturate(lang, ctx.types, {s}));
  std::string b = to_dot(saturate(lang, ctx.types, {s}));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("-> "), std::string::npos);
  LTS lts = saturate(lang, ctx.types, {s});
  Relation rel = extract_relation(lts);
  EXPECT_EQ(rel.size(), lts.edges.size());
  EXPECT_TRUE(std::is_sorted(rel.begin(), rel.end()));
}

TEST(Engine, MemoizedDerivationsAreStable) {
  const auto& lang = bundled("diff-lambda");
  Engine engine(lang);
  NamedContext ctx = named("((f *))");
  Term s = state(lang, ctx, "(Dapp (lam (x) x) f)");
  auto a = engine.derive(Type::atom("*"), ctx.types, s);
  auto b = engine.derive(Type::atom("*"), ctx.types, s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(same(a[i].first, b[i].first));
    EXPECT_EQ(compare(*a[i].second, *b[i].second), 0);
  }
}

TEST(Engine, TransitionsAreStableUnderRandomSubstitutions) {
  for (const auto& name : primary_bundles()) {
    const auto& lang = bundled(name);
    if (lang.rules.empty()) continue;
    LawConfig cfg;
    cfg.cases = 1;
    cfg.proofCases = 60;
    auto reports = run_laws(lang, cfg, {"transition-stability"});
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_TRUE(reports[0].ok()) << name << " " << reports[0].counterexample;
  }
}
