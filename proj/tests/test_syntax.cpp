#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "support.hpp"
#include "tmonad/laws.hpp"

using namespace tmonad;
using namespace testing_support;

namespace {

// Untyped λ-terms with names, substituted the textbook way.
struct Named {
  enum Kind { V, App, Lam } kind;
  std::string x;
  std::shared_ptr<Named> a, b;
};
using NP = std::shared_ptr<Named>;

NP nvar(std::string x) { return std::make_shared<Named>(Named{Named::V, std::move(x), nullptr, nullptr}); }
NP napp(NP a, NP b) { return std::make_shared<Named>(Named{Named::App, "", std::move(a), std::move(b)}); }
NP nlam(std::string x, NP body) { return std::make_shared<Named>(Named{Named::Lam, std::move(x), std::move(body), nullptr}); }

int fresh_counter = 0;
std::string fresh() { return "_f" + std::to_string(fresh_counter++); }

NP to_named(const Term& t, std::vector<std::string>& env) {
  if (t->kind == Node::Kind::Var) return nvar(env.at(t->index));
  if (t->op == "app") return napp(to_named(t->args[0].value.term, env), to_named(t->args[1].value.term, env));
  std::string x = fresh();
  env.push_back(x);
  NP body = to_named(t->args[0].value.term, env);
  env.pop_back();
  return nlam(x, body);
}

Term from_named(const NP& n, std::vector<std::string>& env) {
  switch (n->kind) {
    case Named::V:
      for (std::size_t i = env.size(); i-- > 0;)
        if (env[i] == n->x) return make_var(i);
      throw std::logic_error("free name " + n->x);
    case Named::App:
      return make_node(Node::Kind::Op, "app", {},
                       {Arg{{}, Val::of(from_named(n->a, env))}, Arg{{}, Val::of(from_named(n->b, env))}});
    case Named::Lam: {
      env.push_back(n->x);
      Term body = from_named(n->a, env);
      env.pop_back();
      return make_node(Node::Kind::Op, "lam", {}, {Arg{{Type::atom("*")}, Val::of(body)}});
    }
  }
  return nullptr;
}

void free_names(const NP& n, std::set<std::string>& out, std::set<std::string> bound = {}) {
  if (n->kind == Named::V) {
    if (!bound.count(n->x)) out.insert(n->x);
  } else if (n->kind == Named::App) {
    free_names(n->a, out, bound);
    free_names(n->b, out, bound);
  } else {
    bound.insert(n->x);
    free_names(n->a, out, bound);
  }
}

NP subst_named(const NP& n, const std::map<std::string, NP>& sigma) {
  switch (n->kind) {
    case Named::V: {
      auto it = sigma.find(n->x);
      return it == sigma.end() ? n : it->second;
    }
    case Named::App:
      return napp(subst_named(n->a, sigma), subst_named(n->b, sigma));
    case Named::Lam: {
      std::string y = fresh();
      auto inner = sigma;
      inner[n->x] = nvar(y);
      return nlam(y, subst_named(n->a, inner));
    }
  }
  return nullptr;
}

std::size_t lambda_count(std::size_t n, std::size_t d) {
  if (d == 0) return n;
  std::size_t below = lambda_count(n, d - 1);
  return n + lambda_count(n + 1, d - 1) + below * below;
}

}  // namespace

TEST(Substitution, AgreesWithNamedCaptureAvoidingSubstitution) {
  const auto& lang = bundled("untyped-lambda");
  Generator gen(lang, 11);
  Type star = Type::atom("*");
  std::size_t checked = 0;
  for (int i = 0; i < 300; ++i) {
    Context src(1 + gen.below(3), star), tgt(1 + gen.below(3), star);
    Term t = gen.term(src, star, 4);
    ASSERT_TRUE(t);
    Substitution sigma = gen.substitution(src, tgt, 3);
    std::vector<std::string> srcNames, tgtNames;
    for (std::size_t k = 0; k < src.size(); ++k) srcNames.push_back("s" + std::to_string(k));
    for (std::size_t k = 0; k < tgt.size(); ++k) tgtNames.push_back("t" + std::to_string(k));
    std::map<std::string, NP> images;
    for (std::size_t k = 0; k < src.size(); ++k) {
      auto env = tgtNames;
      images[srcNames[k]] = to_named(sigma.images[k], env);
    }
    auto env = srcNames;
    NP expected = subst_named(to_named(t, env), images);
    std::set<std::string> fv;
    free_names(expected, fv);
    for (const auto& x : fv) ASSERT_TRUE(std::find(tgtNames.begin(), tgtNames.end(), x) != tgtNames.end());
    auto tenv = tgtNames;
    ASSERT_TRUE(same(substitute(t, sigma), from_named(expected, tenv))) << to_sexpr(t);
    ++checked;
  }
  EXPECT_EQ(checked, 300u);
}

TEST(Substitution, IdentityAndWeakening) {
  const auto& lang = bundled("untyped-lambda");
  NamedContext ctx = named("((x *) (y *))");
  Term t = term(lang, ctx, "(app (lam (z) (app z x)) y)");
  EXPECT_TRUE(same(substitute(t, Substitution::identity(ctx.types)), t));
  Term w = weaken(t, 2, 1);
  EXPECT_EQ(to_sexpr(w), "(op app (tyargs) (op lam (tyargs) (bind (*) (op app (tyargs) (var 3) (var 0)))) (var 1))");
  EXPECT_TRUE(same(strengthen(w, 2, 1), t));
  Term lamBody = term(lang, ctx, "(lam (z) z)");
  EXPECT_EQ(count_occurrences(t, 0), 1u);
  EXPECT_FALSE(mentions(lamBody, 0));
}

TEST(Substitution, ShiftsBoundLevelsUnderBinders) {
  const auto& lang = bundled("untyped-lambda");
  NamedContext ctx = named("((x *))");
  Term t = term(lang, ctx, "(lam (z) (app z x))");
  Substitution sigma;
  sigma.source = ctx.types;
  sigma.target = Context(3, Type::atom("*"));
  sigma.images = {make_var(2)};
  Term r = substitute(t, sigma);
  EXPECT_EQ(to_sexpr(r), "(op lam (tyargs) (bind (*) (op app (tyargs) (var 3) (var 2))))");
}

TEST(Typing, ErrorsCarryTheirKind) {
  const auto& lang = bundled("untyped-lambda");
  const auto& sig = lang.monad.base;
  Context ctx{Type::atom("*")};
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Validation;
  };
  EXPECT_EQ(kind_of([&] { typecheck_term(sig, ctx, make_var(3)); }), ErrorKind::Scope);
  EXPECT_EQ(kind_of([&] { typecheck_term(sig, ctx, make_node(Node::Kind::Op, "foo", {}, {})); }),
            ErrorKind::UnknownOperation);
  EXPECT_EQ(kind_of([&] {
              typecheck_term(sig, ctx, make_node(Node::Kind::Op, "app", {}, {Arg{{}, Val::of(make_var(0))}}));
            }),
            ErrorKind::Arity);
  const auto& stlc = bundled("cbv-stlc");
  NamedContext nc = named("((x A))");
  Term lam = term(stlc, nc, "(lam (y) y)", ty("(-> A A)"));
  Term bad = parse_term("(op lam (tyargs A A) (bind ((-> A A)) (state val (tyargs A) (var 1))))");
  EXPECT_EQ(kind_of([&] { typecheck_term(stlc.monad.base, nc.types, bad); }), ErrorKind::Type);
  EXPECT_EQ(typecheck_term(stlc.monad.base, nc.types, lam), ty("(-> A A)"));
}

TEST(Enumeration, MatchesTheCountingRecurrence) {
  const auto& lang = bundled("untyped-lambda");
  for (std::size_t n = 1; n <= 2; ++n)
    for (std::size_t d = 0; d <= 3; ++d) {
      auto ts = enumerate_terms(lang.monad.base, Context(n, Type::atom("*")), Type::atom("*"), d);
      EXPECT_EQ(ts.size(), lambda_count(n, d)) << "n=" << n << " d=" << d;
      std::set<std::string> distinct;
      for (const auto& t : ts) distinct.insert(to_sexpr(t));
      EXPECT_EQ(distinct.size(), ts.size());
      EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end(), enum_less));
    }
}

TEST(Enumeration, EmptySignatureYieldsVariablesOnly) {
  MonadSignature sig;
  sig.universe.atoms = {"*"};
  auto ts = enumerate_terms(sig, Context(3, Type::atom("*")), Type::atom("*"), 5);
  ASSERT_EQ(ts.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same(ts[i], make_var(i)));
}

TEST(Enumeration, TypedTermsAreWellTyped) {
  const auto& lang = bundled("cbv-stlc");
  Context ctx{ty("A"), ty("(-> A A)")};
  for (const char* t : {"A", "(-> A A)"})
    for (const auto& s : enumerate_terms(lang.monad.base, ctx, ty(t), 3))
      EXPECT_EQ(typecheck_term(lang.monad.base, ctx, s), ty(t));
}

TEST(Renaming, ComposesWithSubstitution) {
  const auto& lang = bundled("lambda-bar-mu");
  Generator gen(lang, 5);
  for (int i = 0; i < 100; ++i) {
    Context src = gen.context(1), tgt = gen.context(2);
    Type t = gen.type();
    Term e = gen.term(src, t, 3);
    if (!e) continue;
    Renaming f = gen.renaming(src, tgt);
    EXPECT_TRUE(same(rename(e, f), substitute(e, renaming_subst(f))));
    EXPECT_EQ(typecheck_term(lang.monad.base, tgt, rename(e, f)), t);
  }
}

TEST(Sexpr, TermsRoundTrip) {
  const auto& lang = bundled("lambda-bar-mu");
  Generator gen(lang, 3);
  for (int i = 0; i < 100; ++i) {
    Context ctx = gen.context(1);
    Term e = gen.term(ctx, gen.type(), 3);
    if (!e) continue;
    EXPECT_TRUE(same(parse_term(to_sexpr(e)), e));
  }
}
