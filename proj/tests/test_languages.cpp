#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tmonad/laws.hpp"
#include "tmonad/meta.hpp"

using namespace tmonad;
using namespace testing_support;

namespace {

Type star() { return Type::atom("*"); }

Term lam(Term body) { return make_node(Node::Kind::Op, "lam", {}, {Arg{{star()}, Val::of(std::move(body))}}); }

Term app(Term f, std::vector<Term> bag) {
  std::vector<Val> elems;
  for (auto& t : bag) elems.push_back(Val::of(std::move(t)));
  return make_node(Node::Kind::Op, "app", {}, {Arg{{}, Val::of(std::move(f))}, Arg{{}, Val::bag(std::move(elems))}});
}

Term dapp(Term e, Term f) {
  return make_node(Node::Kind::Op, "Dapp", {}, {Arg{{}, Val::of(std::move(e))}, Arg{{}, Val::of(std::move(f))}});
}

// λ-towers over variables: no applications, no derivatives
Term pure_lambda(std::mt19937_64& rng, std::size_t n, std::size_t depth) {
  if (depth == 0 || rng() % 3 == 0) return make_var(rng() % n);
  return lam(pure_lambda(rng, n + 1, depth - 1));
}

// one result per (occurrence of x, element of U)
void replace_occurrences(const Term& e, std::size_t x, const std::vector<Term>& U, std::size_t n, std::size_t below,
                         const std::function<Term(Term)>& plug, std::vector<std::string>& out) {
  if (e->kind == Node::Kind::Var) {
    if (e->index == x)
      for (const auto& u : U) out.push_back(to_sexpr(plug(weaken(u, n, below))));
    return;
  }
  ASSERT_EQ(e->op, "lam");
  replace_occurrences(e->args[0].value.term, x, U, n, below + 1, [&](Term b) { return plug(lam(b)); }, out);
}

std::vector<std::string> sexprs(const std::vector<Term>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(to_sexpr(t));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Bundles, AllLoadAndValidate) {
  for (const auto& name : bundle_names()) {
    const auto& lang = bundled(name);
    EXPECT_EQ(lang.name, name);
    LanguageBundle copy = lang;
    EXPECT_NO_THROW(validate_bundle(copy)) << name;
  }
  EXPECT_EQ(primary_bundles().size(), 6u);
  try {
    bundled("no-such-language");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownLanguage);
  }
}

TEST(DiffLambda, SingletonBetaIsOrdinarySubstitution) {
  const auto& lang = bundled("diff-lambda");
  Generator gen(lang, 31);
  Engine engine(lang);
  for (int i = 0; i < 200; ++i) {
    Context ctx = gen.context(2);
    Term e = gen.term(extend(ctx, {star()}), star(), 2);
    Term u = gen.term(ctx, star(), 2);
    Substitution sigma = Substitution::identity(ctx);
    sigma.source.push_back(star());
    sigma.images.push_back(u);
    Term want = multiterm_state({normalize(lang, ctx, substitute(e, sigma))});
    Term src = normalize(lang, ctx, app(lam(e), {u}));
    std::set<std::string> got;
    for (const auto& [t, p] : engine.derive(star(), ctx, src, DeriveConfig{4, 1}))
      if (p->rule == "beta") got.insert(to_sexpr(t));
    EXPECT_EQ(got, std::set<std::string>{to_sexpr(want)}) << to_sexpr(src);
  }
}

TEST(DiffLambda, DerivativeOfIdentity) {
  const auto& lang = bundled("diff-lambda");
  NamedContext ctx = named("((f *))");
  Term src = state(lang, ctx, "(Dapp (lam (x) x) f)");
  std::set<std::string> want{to_sexpr(multiterm_state({lam(make_var(0))}))};
  EXPECT_EQ(targets(lang, ctx.types, src), want);
}

TEST(DiffLambda, PartialDerivativeReplacesOneOccurrence) {
  std::mt19937_64 rng(17);
  std::size_t nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 1 + rng() % 3;
    Context ctx(n, star());
    Term e = pure_lambda(rng, n, 4);
    std::size_t x = rng() % n;
    std::vector<Term> U;
    for (std::size_t k = 0, m = 1 + rng() % 2; k < m; ++k) U.push_back(pure_lambda(rng, n, 2));
    std::vector<std::string> want;
    replace_occurrences(e, x, U, n, 0, [](Term t) { return t; }, want);
    std::sort(want.begin(), want.end());
    EXPECT_EQ(sexprs(partial_derivative(ctx, e, x, U)), want) << to_sexpr(e);
    nonempty += !want.empty();
  }
  EXPECT_GT(nonempty, 20u);
}

TEST(DiffLambda, MultitermSubstitutionOnVariables) {
  Context ctx(3, star());
  std::vector<Term> U{make_var(1), lam(make_var(3))};
  EXPECT_EQ(sexprs(multiterm_substitute(ctx, make_var(0), 0, U)), sexprs(U));
  EXPECT_EQ(sexprs(multiterm_substitute(ctx, make_var(2), 0, U)), sexprs({make_var(2)}));
  EXPECT_TRUE(multiterm_substitute(ctx, make_var(0), 0, {}).empty());
}

TEST(DiffLambda, DerivativeStepsUnderContexts) {
  const auto& lang = bundled("diff-lambda");
  NamedContext ctx = named("((f *) (g *))");
  Term src = state(lang, ctx, "(app (Dapp (lam (x) x) f) (bag g))");
  auto ts = targets(lang, ctx.types, src);
  EXPECT_TRUE(ts.count(to_sexpr(multiterm_state({app(lam(make_var(0)), {make_var(1)})}))));
  Term swapped = dapp(dapp(make_var(0), make_var(1)), make_var(0));
  EXPECT_TRUE(term_equal(lang, ctx.types, swapped, dapp(dapp(make_var(0), make_var(0)), make_var(1))));
}
