// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
// usage: acceptance CLI_BINARY SPEC_DIR

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tmonad/gsos.hpp"
#include "tmonad/laws.hpp"

using namespace tmonad;
using namespace testing_support;

namespace {

// pinned tolerances: every count below is exact
constexpr std::size_t kLawCases = 1000;
constexpr std::size_t kProofPairs = 500;
constexpr std::size_t kDiffCases = 200;
constexpr std::size_t kMaxFailures = 0;
constexpr std::uint64_t kSeed = 7;
// depth-3 source terms; each val wrapper adds a level in STLC, the eta wrapper one in π
constexpr std::size_t kStlcStateDepth = 6;
constexpr std::size_t kPiStateDepth = 4;

struct Check {
  bool ok = true;
  std::ostringstream note;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) note << "first failure: " << what << "; ";
      ok = false;
    }
  }
};

Type star() { return Type::atom("*"); }

Term op(const std::string& name, std::vector<Term> kids, std::vector<std::vector<Type>> binders = {}) {
  std::vector<Arg> args;
  for (std::size_t i = 0; i < kids.size(); ++i)
    args.push_back(Arg{i < binders.size() ? binders[i] : std::vector<Type>{}, Val::of(std::move(kids[i]))});
  return make_node(Node::Kind::Op, name, {}, std::move(args));
}

// ---------------------------------------------------------------- 1, 2

void c1(Check& c) {
  std::size_t suites = 0;
  for (const auto& name : primary_bundles()) {
    LawConfig cfg;
    cfg.seed = kSeed;
    cfg.cases = kLawCases;
    auto names = law_names();
    names.erase(std::remove(names.begin(), names.end(), "transition-stability"), names.end());
    for (const auto& r : run_laws(bundled(name), cfg, names)) {
      ++suites;
      c.require(r.cases == kLawCases && r.failures <= kMaxFailures, name + " " + r.law + " " + r.counterexample);
    }
  }
  c.note << primary_bundles().size() << " bundles, " << suites << " law suites x " << kLawCases << " cases";
}

void c2(Check& c) {
  std::size_t total = 0;
  for (const auto& name : primary_bundles()) {
    LawConfig cfg;
    cfg.seed = kSeed;
    cfg.proofCases = kProofPairs;
    auto reports = run_laws(bundled(name), cfg, {"transition-stability"});
    c.require(reports.size() == 1, name + " has no transition suite");
    for (const auto& r : reports) {
      total += r.cases;
      c.require(r.cases == kProofPairs && r.failures <= kMaxFailures, name + " " + r.counterexample);
    }
  }
  c.note << total << " (proof, substitution) pairs";
}

// ---------------------------------------------------------------- 3

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

void c3(Check& c) {
  const auto& lang = bundled("cbv-stlc");
  NamedContext ctx;
  Term id = state(lang, ctx, "(app (val (lam (x) x)) (val y))", ty("A"));
  c.require(targets(lang, ctx.types, id) == std::set<std::string>{to_sexpr(make_var(0))}, "(λx.x) y");
  NamedContext ctx2 = named("((y A) (f (-> A A)))");
  Term stuck = state(lang, ctx2, "(app (lam (x) x) (app f y))", ty("A"));
  c.require(targets(lang, ctx2.types, stuck).empty(), "(λx.x)(f y)");

  Context uctx{ty("A"), ty("(-> A A)")};
  Enumerator e(lang.monad.base);
  std::size_t states = 0, derivable = 0;
  for (const char* t : {"A", "(-> A A)"}) {
    for (const auto& s : e.states(lang.s1, uctx, ty(t), kStlcStateDepth)) {
      ++states;
      Term expected = eval_stlc(s, uctx);
      for (const auto& [tgt, p] : derive(lang, ty(t), uctx, s, DeriveConfig{10, 1})) {
        ++derivable;
        bool value = tgt->kind == Node::Kind::Var || (tgt->kind == Node::Kind::Op && tgt->op == "lam");
        c.require(value && typecheck_term(lang.monad.base, uctx, tgt) == ty(t), "non-value target " + to_sexpr(tgt));
        c.require(expected && same(expected, tgt), "evaluator mismatch at " + to_sexpr(s));
      }
    }
  }
  c.require(derivable > 0, "no derivable state in the universe");
  c.note << states << " states of depth " << kStlcStateDepth << ", " << derivable << " derivable targets, all values";
}

// ---------------------------------------------------------------- 4

void c4(Check& c) {
  const auto& lang = bundled("pi");
  NamedContext ctx;
  Term comm = state(lang, ctx, "(par (out a b nil) (in a (c) nil))");
  NamedContext same_ctx = ctx;
  c.require(targets(lang, ctx.types, comm) == std::set<std::string>{nstate(lang, same_ctx, "(par nil nil)")},
            "communication instance");

  Context uctx(2, Type::atom("c"));
  Enumerator e(lang.monad.base);
  std::size_t prefixed = 0, moving = 0, total = 0;
  Engine engine(lang);
  for (const auto& s : e.states(lang.s1, uctx, Type::atom("p"), kPiStateDepth)) {
    ++total;
    const Term& body = s->args[0].value.term;
    auto ds = engine.derive(Type::atom("p"), uctx, s, DeriveConfig{6, 1});
    if (!ds.empty()) ++moving;
    if (body->kind == Node::Kind::Op && (body->op == "in" || body->op == "out")) {
      ++prefixed;
      c.require(ds.empty(), "transition under a prefix from " + to_sexpr(s));
    }
  }
  c.require(prefixed > 0 && moving > 0, "vacuous universe");

  NamedContext sc = named("((a c) (b c) (P p) (Q p) (R p))");
  std::size_t instances = 0;
  for (auto [l, r] : std::vector<std::pair<const char*, const char*>>{
           {"(par P nil)", "P"},
           {"(par nil P)", "P"},
           {"(par P Q)", "(par Q P)"},
           {"(par P (par Q R))", "(par (par P Q) R)"},
           {"(par (nu (x) (out x a P)) Q)", "(nu (x) (par (out x a P) Q))"},
           {"(par Q (nu (x) (in x (y) (out y x nil))))", "(nu (x) (par (in x (y) (out y x nil)) Q))"}}) {
    ++instances;
    c.require(term_equal(lang, sc.types, term(lang, sc, l), term(lang, sc, r)), std::string(l) + " = " + r);
  }
  c.note << total << " states of depth " << kPiStateDepth << " (" << prefixed << " prefixed, none move; " << moving << " move), " << instances
         << " congruence instances";
}

// ---------------------------------------------------------------- 5

void c5(Check& c) {
  const auto& assoc = bundled("assoc");
  NamedContext x = named("((x *))");
  Partition q = quotient_oracle(assoc.monad, x.types, star(), 2, 1);
  auto s = [&](const char* text) { return to_sexpr(term(assoc, x, text)); };
  std::set<std::set<std::string>> reading{{s("x")},
                                          {s("(mul x x)")},
                                          {s("(mul (mul x x) x)"), s("(mul x (mul x x))")},
                                          {s("(mul (mul x x) (mul x x))")}};
  c.require(enumerate_terms(assoc.monad.base, x.types, star(), 2).size() == 5, "universe of 5 trees");
  c.require(classes(q) == reading, "assoc classes");

  Context two(2, star());
  auto universe2 = enumerate_terms(assoc.monad.base, two, star(), 2);
  std::set<std::string> words;
  std::function<void(const Term&, std::string&)> leaves = [&](const Term& t, std::string& w) {
    if (t->kind == Node::Kind::Var) {
      w += std::to_string(t->index) + ".";
      return;
    }
    for (const auto& a : t->args) leaves(a.value.term, w);
  };
  for (const auto& t : universe2) {
    std::string w;
    leaves(t, w);
    words.insert(w);
  }
  Partition q2 = quotient_oracle(assoc.monad, two, star(), 2, default_aug_depth(assoc.monad.equations, 2));
  c.require(q2.size() == words.size(), "|X|=2 class count vs leaf words");

  const auto& pi = bundled("pi");
  Context chans(2, Type::atom("c"));
  auto pu = enumerate_terms(pi.monad.base, chans, Type::atom("p"), 2);
  Partition pq = quotient_oracle(pi.monad, chans, Type::atom("p"), 2, default_aug_depth(pi.monad.equations, 2));
  std::map<std::string, std::size_t> cls;
  for (std::size_t i = 0; i < pq.classes.size(); ++i)
    for (const auto& t : pq.classes[i]) cls[to_sexpr(t)] = i;
  for (const auto& t : pu)
    for (const auto& u : pu)
      c.require(term_equal(pi, chans, t, u) == (cls.at(to_sexpr(t)) == cls.at(to_sexpr(u))),
                "pi pair " + to_sexpr(t) + " / " + to_sexpr(u));

  const auto& dl = bundled("diff-lambda");
  auto du = enumerate_terms(dl.monad.base, two, star(), 2);
  Partition dq = quotient_oracle(dl.monad, two, star(), 2, default_aug_depth(dl.monad.equations, 2));
  Partition db = partition_by(du, [&](const Term& t) { return normalize(dl, two, t); });
  c.require(classes(dq) == classes(db), "diff-lambda classes");
  c.note << "assoc 4/5 classes, |X|=2 " << q2.size() << " classes = " << words.size() << " leaf words; pi "
         << pu.size() << " terms pairwise; diff-lambda " << du.size() << " terms, " << dq.size() << " classes";
}

// ---------------------------------------------------------------- 6

void c6(Check& c) {
  GSOSSystem sys = sample_gsos();
  LanguageBundle lang = compile_gsos(sys);
  auto oracle = gsos_oracle(sys, {}, 3, 64);
  std::vector<Term> seeds;
  for (const auto& t : enumerate_terms(gsos_signature(sys), {}, star(), 3))
    seeds.push_back(make_node(Node::Kind::State, "inj", {}, {Arg{{}, Val::of(t)}}));
  SaturateConfig cfg;
  cfg.derive = DeriveConfig{5, 1};
  cfg.stepBound = 0;
  auto engine = as_labelled(extract_relation(saturate(lang, {}, seeds, cfg)));
  c.require(engine == oracle, "relation differs from the oracle");
  Term z = op("0", {});
  Term src = op("par", {op("pre_a", {z}), op("pre_b", {z})});
  for (const LabelledEdge& e : {LabelledEdge{src, "a", op("par", {z, op("pre_b", {z})})},
                                LabelledEdge{src, "b", op("par", {op("pre_a", {z}), z})}})
    c.require(std::binary_search(engine.begin(), engine.end(), e), "hand edge " + e.label);
  c.note << seeds.size() << " depth-3 sources, " << engine.size() << " edges = oracle";
}

// ---------------------------------------------------------------- 7

Term lam(Term body) { return op("lam", {std::move(body)}, {{star()}}); }
Term dapp(Term e, Term f) { return op("Dapp", {std::move(e), std::move(f)}); }
Term app1(Term f, Term u) {
  return make_node(Node::Kind::Op, "app", {}, {Arg{{}, Val::of(std::move(f))}, Arg{{}, Val::bag({Val::of(std::move(u))})}});
}

Term pure_lambda(std::mt19937_64& rng, std::size_t n, std::size_t depth) {
  if (depth == 0 || rng() % 3 == 0) return make_var(rng() % n);
  return lam(pure_lambda(rng, n + 1, depth - 1));
}

void replace_occurrences(const Term& e, std::size_t x, const std::vector<Term>& U, std::size_t n, std::size_t below,
                         const std::function<Term(Term)>& plug, std::vector<std::string>& out) {
  if (e->kind == Node::Kind::Var) {
    if (e->index == x)
      for (const auto& u : U) out.push_back(to_sexpr(plug(weaken(u, n, below))));
    return;
  }
  replace_occurrences(e->args[0].value.term, x, U, n, below + 1, [&](Term b) { return plug(lam(b)); }, out);
}

void c7(Check& c) {
  const auto& lang = bundled("diff-lambda");
  Generator gen(lang, kSeed);
  Engine engine(lang);
  for (std::size_t i = 0; i < kDiffCases; ++i) {
    Context ctx = gen.context(2);
    Term e = gen.term(extend(ctx, {star()}), star(), 2), u = gen.term(ctx, star(), 2);
    Substitution sigma = Substitution::identity(ctx);
    sigma.source.push_back(star());
    sigma.images.push_back(u);
    std::string want = to_sexpr(multiterm_state({normalize(lang, ctx, substitute(e, sigma))}));
    std::set<std::string> got;
    for (const auto& [t, p] : engine.derive(star(), ctx, normalize(lang, ctx, app1(lam(e), u)), DeriveConfig{4, 1}))
      if (p->rule == "beta") got.insert(to_sexpr(t));
    c.require(got == std::set<std::string>{want}, "singleton case " + to_sexpr(e));
  }

  Context f1{star()};
  Term d = dapp(lam(make_var(1)), make_var(0));
  c.require(targets(lang, f1, d) == std::set<std::string>{to_sexpr(multiterm_state({lam(make_var(0))}))},
            "D(λx.x)·f");

  std::mt19937_64 rng(kSeed);
  for (std::size_t i = 0; i < kDiffCases; ++i) {
    std::size_t n = 1 + rng() % 3;
    Term e = pure_lambda(rng, n, 4);
    std::size_t x = rng() % n;
    std::vector<Term> U;
    for (std::size_t k = 0, m = 1 + rng() % 2; k < m; ++k) U.push_back(pure_lambda(rng, n, 2));
    std::vector<std::string> want, got;
    replace_occurrences(e, x, U, n, 0, [](Term t) { return t; }, want);
    for (const auto& t : partial_derivative(Context(n, star()), e, x, U)) got.push_back(to_sexpr(t));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    c.require(got == want, "partial derivative of " + to_sexpr(e));
  }

  for (std::size_t i = 0; i < kDiffCases; ++i) {
    Context ctx = gen.context(2);
    Term e = gen.term(ctx, star(), 2), f = gen.term(ctx, star(), 2), g = gen.term(ctx, star(), 2);
    c.require(term_equal(lang, ctx, dapp(dapp(e, f), g), dapp(dapp(e, g), f)), "D-swap");
  }
  c.note << kDiffCases << " singleton, " << kDiffCases << " occurrence-replacement, " << kDiffCases
         << " D-swap cases, D(λx.x)·f";
}

// ---------------------------------------------------------------- 8

void c8(Check& c) {
  const auto& lang = bundled("lambda-bar-mu");
  NamedContext ctx = named("((x p) (k s))");
  std::string want = to_sexpr(state(lang, ctx, "(cmd x k)", ty("c")));
  c.require(targets(lang, ctx.types, state(lang, ctx, "(cmd (mu (a) x (a) a) k)", ty("c"))) ==
                std::set<std::string>{want},
            "mu instance");
  c.require(targets(lang, ctx.types, state(lang, ctx, "(cmd (lam (y) y) (cons x k))", ty("c"))) ==
                std::set<std::string>{want},
            "lambda instance");
  NamedContext empty;
  Term nested = state(lang, empty, "(etap (lam (y) (lam (z) (mu (a) (lam (w) w) (a) (cons y a)))))", ty("p"));
  std::string reduct = to_sexpr(state(lang, empty, "(etap (lam (y) (lam (z) (mu (a) y (a) a))))", ty("p")));
  c.require(targets(lang, empty.types, nested) == std::set<std::string>{reduct}, "nested redex with congruences");
  LanguageBundle basic = lang;
  std::erase_if(basic.rules, [](const RuleSpec& r) { return r.name != "mu-red" && r.name != "lam-red"; });
  c.require(basic.rules.size() == 2, "basic rules present");
  c.require(targets(basic, empty.types, nested).empty(), "nested redex without congruences");
  c.note << "2 basic instances; nested redex derivable with " << lang.rules.size() << " rules, not with 2";
}

// ---------------------------------------------------------------- 9

struct Proc {
  int code;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

Proc sh(const std::string& bin, const std::vector<std::string>& args) {
  std::string cmd = quote(bin);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  Proc p{-1, ""};
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) p.out.append(buf.data(), n);
  int st = pclose(f);
  p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return p;
}

void c9(Check& c, const std::string& cli, const std::string& specDir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(specDir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  c.require(!files.empty(), "no spec files");
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    Proc p = sh(cli, {"check", f.string(), "--print"});
    c.require(p.code == 0 && p.out == ss.str(), "round-trip " + f.filename().string());
    Proc l = sh(cli, {"laws", f.string()});
    c.require(l.code == 0, "laws " + f.filename().string());
  }
  std::vector<std::string> sat{"saturate", "pi", "--seeds", "(par (out a b nil) (in a (c) (out c a nil)))", "--seeds",
                               "(nu (x) (par (out x b (out b b nil)) (in x (c) (out c c nil))))", "--dot", "-"};
  Proc d1 = sh(cli, sat), d2 = sh(cli, sat);
  c.require(d1.code == 0 && d1.out.rfind("digraph", 0) == 0, "saturate --dot");
  c.require(d1.out == d2.out, "DOT differs between runs");
  c.note << files.size() << " spec files round-trip and pass laws; DOT " << d1.out.size() << " bytes, identical twice";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance CLI_BINARY SPEC_DIR\n";
    return 2;
  }
  std::string cli = argv[1], specDir = argv[2];
  std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"monad and module laws", c1},
      {"substitution stability of transitions", c2},
      {"call-by-value STLC", c3},
      {"pi-calculus", c4},
      {"free and quotient oracle", c5},
      {"positive GSOS", c6},
      {"differential lambda", c7},
      {"lambda-bar-mu", c8},
      {"command line", [&](Check& c) { c9(c, cli, specDir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << "exception: " << e.what();
    }
    std::cout << "criterion " << i + 1 << " " << (c.ok ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << c.note.str() << std::endl;
    failed += !c.ok;
  }
  return failed ? 1 : 0;
}
