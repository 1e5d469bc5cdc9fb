#include <gtest/gtest.h>

#include "support.hpp"
#include "tmonad/laws.hpp"

using namespace tmonad;
using namespace testing_support;

TEST(Laws, AllSuitesPassOnEveryBundle) {
  for (const auto& name : bundle_names()) {
    const auto& lang = bundled(name);
    LawConfig cfg;
    cfg.cases = 150;
    cfg.proofCases = 60;
    for (const auto& r : run_laws(lang, cfg)) {
      if (r.law == "transition-stability" && lang.rules.empty()) continue;
      EXPECT_TRUE(r.ok()) << name << " " << r.law << " " << r.counterexample;
    }
  }
}

TEST(Laws, ReportsAreDeterministic) {
  const auto& lang = bundled("pi");
  LawConfig cfg;
  cfg.cases = 50;
  cfg.proofCases = 20;
  EXPECT_EQ(format_reports("pi", run_laws(lang, cfg)), format_reports("pi", run_laws(lang, cfg)));
}

TEST(Laws, SelectionByName) {
  const auto& names = law_names();
  ASSERT_FALSE(names.empty());
  for (const char* n : {"subst-left-unit", "subst-right-unit", "subst-assoc", "rename-coherence", "lift-unit",
                        "state-unit", "state-assoc", "transition-stability"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  LawConfig cfg;
  cfg.cases = 10;
  auto reports = run_laws(bundled("assoc"), cfg, {"subst-assoc"});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].law, "subst-assoc");
  EXPECT_EQ(reports[0].cases, 10u);
}

TEST(Generator, ProducesWellTypedSyntax) {
  for (const auto& name : primary_bundles()) {
    const auto& lang = bundled(name);
    Generator gen(lang, 2);
    for (int i = 0; i < 50; ++i) {
      Context src = gen.context(1), tgt = gen.context(2);
      Type t = gen.type();
      if (Term e = gen.term(src, t, 3)) {
        EXPECT_EQ(typecheck_term(lang.monad.base, src, e), t);
      }
      Substitution s = gen.substitution(src, tgt, 2);
      EXPECT_NO_THROW(check_substitution(lang.monad.base, s)) << name;
      if (Term st = gen.state(lang.s1, src, t, 3)) {
        EXPECT_EQ(source_type(lang, src, st), t);
      }
    }
  }
}

TEST(Generator, SameSeedSameStream) {
  const auto& lang = bundled("lambda-bar-mu");
  Generator a(lang, 99), b(lang, 99);
  for (int i = 0; i < 30; ++i) {
    Context ca = a.context(1), cb = b.context(1);
    ASSERT_EQ(ca, cb);
    Type ta = a.type(), tb = b.type();
    ASSERT_EQ(ta, tb);
    Term x = a.term(ca, ta, 3), y = b.term(cb, tb, 3);
    ASSERT_EQ(bool(x), bool(y));
    if (x) {
      EXPECT_TRUE(same(x, y));
    }
  }
}

TEST(ProofPool, CoversEveryRuleOfSmallCalculi) {
  for (const char* name : {"untyped-lambda", "pi", "gsos-sample"}) {
    const auto& lang = bundled(name);
    Generator gen(lang, 8);
    std::set<std::string> rules;
    for (const auto& p : proof_pool(lang, gen, 120, 3, 6)) {
      rules.insert(p->rule);
      EXPECT_NO_THROW(check_proof(lang, *p));
    }
    EXPECT_EQ(rules.size(), lang.rules.size()) << name;
  }
}
