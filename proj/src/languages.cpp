#include "tmonad/languages.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "tmonad/gsos.hpp"
#include "tmonad/meta.hpp"
#include "tmonad/spec.hpp"

namespace tmonad {

namespace {

const char* kUntypedLambda = R"(
(language untyped-lambda
  (placetaker-types *)
  (transition-types *)
  (operations
    (op app () ((arg () (hole *)) (arg () (hole *))) *)
    (op lam () ((arg (*) (hole *))) *))
  (state-functor S1 identity)
  (state-functor S2 identity)
  (rules
    (rule app-left () ((mv M () *) (mv M1 () *) (mv N () *))
      (premise * M M1)
      (conclude * (app M N) (app M1 N)))
    (rule app-right () ((mv M () *) (mv N () *) (mv N1 () *))
      (premise * N N1)
      (conclude * (app M N) (app M N1)))
    (rule xi () ((mv M (*) *) (mv M1 (*) *))
      (premise * M M1)
      (conclude * (lam (x) M) (lam (x) M1)))
    (rule beta () ((mv M (*) *) (mv N () *))
      (conclude * (app (lam (x) M) N) (subst M N)))))
)";

const char* kCbvStlc = R"(
(language cbv-stlc
  (simple-types A)
  (transition-simple-types A)
  (operations
    (op lam (X Y) ((arg (X) (state Y))) (-> X Y)))
  (state-functor S1
    (ops
      (op val (X) ((arg () (input X))) X)
      (op app (X Y) ((arg () (rec (-> X Y))) (arg () (rec X))) Y)))
  (state-functor S2 identity)
  (rules
    (rule val (X) ((mv v () X))
      (conclude X (val v) v))
    (rule beta (X Y) ((mv-s1 e1 () (-> X Y)) (mv-s1 e2 () X) (mv-s1 e3 (X) Y) (mv v () Y) (mv w () X))
      (premise (-> X Y) e1 (lam (x) e3))
      (premise X e2 w)
      (premise Y (subst e3 w) v)
      (conclude Y (app e1 e2) v))))
)";

const char* kLambdaBarMu = R"(
(language lambda-bar-mu
  (placetaker-types p s)
  (transition-types c p s)
  (operations
    (op mu () ((arg (s) (hole p)) (arg (s) (hole s))) p)
    (op lam () ((arg (p) (hole p))) p)
    (op cons () ((arg () (hole p)) (arg () (hole s))) s))
  (state-functor S1
    (ops
      (op cmd () ((arg () (input p)) (arg () (input s))) c)
      (op etap () ((arg () (input p))) p)
      (op etas () ((arg () (input s))) s)))
  (state-functor S2
    (ops
      (op cmd () ((arg () (input p)) (arg () (input s))) c)
      (op etap () ((arg () (input p))) p)
      (op etas () ((arg () (input s))) s)))
  (rules
    (rule mu-red () ((mv e (s) p) (mv e1 (s) s) (mv k () s))
      (conclude c (cmd (mu (a) e (b) e1) k) (cmd (subst e k) (subst e1 k))))
    (rule lam-red () ((mv e (p) p) (mv e1 () p) (mv k () s))
      (conclude c (cmd (lam (x) e) (cons e1 k)) (cmd (subst e e1) k)))
    (rule cmd-left () ((mv e () p) (mv e1 () p) (mv k () s))
      (premise p (etap e) (etap e1))
      (conclude c (cmd e k) (cmd e1 k)))
    (rule cmd-right () ((mv e () p) (mv k () s) (mv k1 () s))
      (premise s (etas k) (etas k1))
      (conclude c (cmd e k) (cmd e k1)))
    (rule mu-cong () ((mv e (s) p) (mv k (s) s) (mv e1 (s) p) (mv k1 (s) s))
      (premise c (cmd e k) (cmd e1 k1))
      (conclude p (etap (mu (a) e (b) k)) (etap (mu (a) e1 (b) k1))))
    (rule lam-cong () ((mv e (p) p) (mv e1 (p) p))
      (premise p (etap e) (etap e1))
      (conclude p (etap (lam (x) e)) (etap (lam (x) e1))))
    (rule cons-left () ((mv e () p) (mv e1 () p) (mv k () s))
      (premise p (etap e) (etap e1))
      (conclude s (etas (cons e k)) (etas (cons e1 k))))
    (rule cons-right () ((mv e () p) (mv k () s) (mv k1 () s))
      (premise s (etas k) (etas k1))
      (conclude s (etas (cons e k)) (etas (cons e k1))))))
)";

const char* kPi = R"(
(language pi
  (placetaker-types c p)
  (transition-types p)
  (operations
    (op nil () () p)
    (op par () ((arg () (hole p)) (arg () (hole p))) p)
    (op nu () ((arg (c) (hole p))) p)
    (op out () ((arg () (hole c)) (arg () (hole c)) (arg () (hole p))) p)
    (op in () ((arg () (hole c)) (arg (c) (hole p))) p))
  (equations
    (eq par-unit ((mv P () p)) p (par nil P) P)
    (eq par-comm ((mv P () p) (mv Q () p)) p (par P Q) (par Q P))
    (eq par-assoc ((mv P () p) (mv Q () p) (mv R () p)) p (par P (par Q R)) (par (par P Q) R))
    (eq extrude ((mv P (c) p) (mv Q () p)) p (par (nu (a) P) Q) (nu (a) (par P (weaken (c) Q)))))
  (backend pi par nil nu)
  (state-functor S1 (ops (op eta () ((arg () (input p))) p)))
  (state-functor S2 (ops (op eta () ((arg () (input p))) p)))
  (rules
    (rule comm () ((mv a () c) (mv b () c) (mv P () p) (mv Q (c) p))
      (conclude p (eta (par (out a b P) (in a (x) Q))) (eta (par P (subst Q b)))))
    (rule par-cong () ((mv P () p) (mv Q () p) (mv R () p))
      (premise p (eta P) (eta Q))
      (conclude p (eta (par P R)) (eta (par Q R))))
    (rule nu-cong () ((mv P (c) p) (mv Q (c) p))
      (premise p (eta P) (eta Q))
      (conclude p (eta (nu (a) P)) (eta (nu (a) Q))))))
)";

const char* kPiChannels = R"(
(language pi-channels
  (placetaker-types c)
  (transition-types p)
  (operations)
  (state-functor S1
    (ops
      (op nil () () p)
      (op par () ((arg () (rec p)) (arg () (rec p))) p)
      (op nu () ((arg (c) (rec p))) p)
      (op out () ((arg () (input c)) (arg () (input c)) (arg () (rec p))) p)
      (op in () ((arg () (input c)) (arg (c) (rec p))) p))
    (eqs
      (eq par-unit ((mv-s1 P () p)) p (par nil P) P)
      (eq par-comm ((mv-s1 P () p) (mv-s1 Q () p)) p (par P Q) (par Q P))
      (eq par-assoc ((mv-s1 P () p) (mv-s1 Q () p) (mv-s1 R () p)) p (par P (par Q R)) (par (par P Q) R))
      (eq extrude ((mv-s1 P (c) p) (mv-s1 Q () p)) p (par (nu (a) P) Q) (nu (a) (par P (weaken (c) Q)))))
    (backend pi par nil nu))
  (state-functor S2
    (ops
      (op nil () () p)
      (op par () ((arg () (rec p)) (arg () (rec p))) p)
      (op nu () ((arg (c) (rec p))) p)
      (op out () ((arg () (input c)) (arg () (input c)) (arg () (rec p))) p)
      (op in () ((arg () (input c)) (arg (c) (rec p))) p))
    (eqs
      (eq par-unit ((mv-s1 P () p)) p (par nil P) P)
      (eq par-comm ((mv-s1 P () p) (mv-s1 Q () p)) p (par P Q) (par Q P))
      (eq par-assoc ((mv-s1 P () p) (mv-s1 Q () p) (mv-s1 R () p)) p (par P (par Q R)) (par (par P Q) R))
      (eq extrude ((mv-s1 P (c) p) (mv-s1 Q () p)) p (par (nu (a) P) Q) (nu (a) (par P (weaken (c) Q)))))
    (backend pi par nil nu))
  (rules
    (rule comm () ((mv a () c) (mv b () c) (mv-s1 P () p) (mv-s1 Q (c) p))
      (conclude p (par (out a b P) (in a (x) Q)) (par P (subst Q b))))
    (rule par-cong () ((mv-s1 P () p) (mv-s1 Q () p) (mv-s1 R () p))
      (premise p P Q)
      (conclude p (par P R) (par Q R)))
    (rule nu-cong () ((mv-s1 P (c) p) (mv-s1 Q (c) p))
      (premise p P Q)
      (conclude p (nu (a) P) (nu (a) Q)))))
)";

const char* kDiffLambda = R"(
(language diff-lambda
  (placetaker-types *)
  (transition-types *)
  (operations
    (op lam () ((arg (*) (hole *))) *)
    (op app () ((arg () (hole *)) (arg () (bag (hole *)))) *)
    (op Dapp () ((arg () (hole *)) (arg () (hole *))) *))
  (equations
    (eq D-swap ((mv e () *) (mv f () *) (mv g () *)) * (Dapp (Dapp e f) g) (Dapp (Dapp e g) f)))
  (backend diff-lambda Dapp)
  (state-functor S1 identity)
  (state-functor S2 (ops (op ms () ((arg () (bag (input *)))) *)))
  (rules
    (rule beta () ((mv e (*) *) (mv-shape U () (bag (hole *))))
      (conclude * (app (lam (x) e) U) (prim msubst e U)))
    (rule dlam () ((mv e (*) *) (mv f () *))
      (conclude * (Dapp (lam (x) e) f) (prim lam-deriv e f)))
    (rule lam-cong () ((mv e (*) *) (mv-shape V (*) (bag (hole *))))
      (premise * e (ms V))
      (conclude * (lam (x) e) (prim lam-ext V)))
    (rule app-fun () ((mv e () *) (mv-shape U () (bag (hole *))) (mv-shape V () (bag (hole *))))
      (premise * e (ms V))
      (conclude * (app e U) (prim app-fun-ext V U)))
    (rule app-arg () ((mv e () *) (mv f () *) (mv-shape U () (bag (hole *))) (mv-shape V () (bag (hole *))))
      (premise * f (ms V))
      (conclude * (app e (bag f (rest U))) (prim app-arg-ext e V U)))
    (rule D-left () ((mv e () *) (mv f () *) (mv-shape V () (bag (hole *))))
      (premise * e (ms V))
      (conclude * (Dapp e f) (prim D-left-ext V f)))
    (rule D-right () ((mv e () *) (mv f () *) (mv-shape V () (bag (hole *))))
      (premise * f (ms V))
      (conclude * (Dapp e f) (prim D-right-ext e V)))))
)";

const char* kAssoc = R"(
(language assoc
  (placetaker-types *)
  (transition-types *)
  (operations
    (op mul () ((arg () (hole *)) (arg () (hole *))) *))
  (equations
    (eq assoc ((mv a () *) (mv b () *) (mv c () *)) * (mul a (mul b c)) (mul (mul a b) c)))
  (backend assoc mul)
  (state-functor S1 identity)
  (state-functor S2 identity)
  (rules))
)";

const char* kStateAssoc = R"(
(language state-assoc
  (placetaker-types *)
  (transition-types *)
  (operations)
  (state-functor S1
    (ops
      (op leaf () ((arg () (input *))) *)
      (op seq () ((arg () (rec *)) (arg () (rec *))) *))
    (eqs
      (eq seq-assoc ((mv-s1 a () *) (mv-s1 b () *) (mv-s1 c () *)) * (seq a (seq b c)) (seq (seq a b) c)))
    (backend assoc seq))
  (state-functor S2 identity)
  (rules))
)";

const std::map<std::string, std::string>& sources() {
  static const std::map<std::string, std::string> m = [] {
    std::map<std::string, std::string> out{
        {"untyped-lambda", kUntypedLambda}, {"cbv-stlc", kCbvStlc}, {"lambda-bar-mu", kLambdaBarMu},
        {"pi", kPi},                        {"pi-channels", kPiChannels}, {"diff-lambda", kDiffLambda},
        {"assoc", kAssoc},                  {"state-assoc", kStateAssoc},
    };
    out["gsos-sample"] = layout(gsos_sexpr(sample_gsos())) + "\n";
    return out;
  }();
  return m;
}

// ---------------------------------------------------------------- differential λ

const Type& star() {
  static const Type t = Type::atom("*");
  return t;
}

Term child(const Term& t, std::size_t i) { return t->args[i].value.term; }

Term lam(const Term& body) { return make_node(Node::Kind::Op, "lam", {}, {Arg{{star()}, Val::of(body)}}); }

Term app(const Term& f, const std::vector<Term>& args) {
  std::vector<Val> vs;
  for (const auto& t : args) vs.push_back(Val::of(t));
  return make_node(Node::Kind::Op, "app", {}, {Arg{{}, Val::of(f)}, Arg{{}, Val::bag(std::move(vs))}});
}

Term dapp(const Term& e, const Term& f) {
  return make_node(Node::Kind::Op, "Dapp", {}, {Arg{{}, Val::of(e)}, Arg{{}, Val::of(f)}});
}

std::vector<Term> bag_terms(const Val& v) {
  if (v.kind != Val::Kind::Bag) throw Error(ErrorKind::Type, "expected a multiterm");
  std::vector<Term> out;
  for (const auto& p : v.parts) {
    if (p.kind != Val::Kind::Term) throw Error(ErrorKind::Type, "expected a multiterm");
    out.push_back(p.term);
  }
  return out;
}

std::vector<Term> weaken_all(const std::vector<Term>& ts, std::size_t n) {
  std::vector<Term> out;
  for (const auto& t : ts) out.push_back(weaken(t, n, 1));
  return out;
}

void append(std::vector<Term>& out, const std::vector<Term>& more) { out.insert(out.end(), more.begin(), more.end()); }

std::vector<Term> msub(const Term& t, std::size_t n, std::size_t x, const std::vector<Term>& U) {
  if (t->kind == Node::Kind::Var) return t->index == x ? U : std::vector<Term>{t};
  std::vector<Term> out;
  if (t->op == "lam") {
    for (const auto& b : msub(child(t, 0), n + 1, x, weaken_all(U, n))) out.push_back(lam(b));
  } else if (t->op == "app") {
    std::vector<Term> args;
    for (const auto& v : bag_terms(t->args[1].value)) append(args, msub(v, n, x, U));
    for (const auto& f : msub(child(t, 0), n, x, U)) out.push_back(app(f, args));
  } else if (t->op == "Dapp") {
    auto es = msub(child(t, 0), n, x, U);
    auto fs = msub(child(t, 1), n, x, U);
    for (const auto& e : es)
      for (const auto& f : fs) out.push_back(dapp(e, f));
  } else {
    throw Error(ErrorKind::UnknownOperation, t->op);
  }
  return out;
}

std::vector<Term> deriv(const Term& t, std::size_t n, std::size_t x, const std::vector<Term>& U) {
  if (t->kind == Node::Kind::Var) return t->index == x ? U : std::vector<Term>{};
  std::vector<Term> out;
  if (t->op == "lam") {
    for (const auto& b : deriv(child(t, 0), n + 1, x, weaken_all(U, n))) out.push_back(lam(b));
  } else if (t->op == "Dapp") {
    for (const auto& e : deriv(child(t, 0), n, x, U)) out.push_back(dapp(e, child(t, 1)));
    for (const auto& f : deriv(child(t, 1), n, x, U)) out.push_back(dapp(child(t, 0), f));
  } else if (t->op == "app") {
    auto V = bag_terms(t->args[1].value);
    for (const auto& e : deriv(child(t, 0), n, x, U)) out.push_back(app(e, V));
    for (const auto& v : V)
      for (const auto& w : deriv(v, n, x, U)) out.push_back(app(dapp(child(t, 0), w), V));
  } else {
    throw Error(ErrorKind::UnknownOperation, t->op);
  }
  return out;
}

void check_inputs(const Context& ctx, const Term& e, std::size_t x, const std::vector<Term>& U) {
  if (x >= ctx.size()) throw Error(ErrorKind::Scope, "variable " + std::to_string(x) + " not in scope");
  const LanguageBundle& lang = bundled("diff-lambda");
  auto check = [&](const Term& t) {
    Type ty = typecheck_term(lang.monad.base, ctx, t);
    if (!(ty == star())) throw Error(ErrorKind::Type, "expected a term of type *");
  };
  check(e);
  for (const auto& u : U) check(u);
}

std::vector<Term> sorted(std::vector<Term> ts) {
  for (auto& t : ts) t = canonicalize(t);
  std::sort(ts.begin(), ts.end(), TermLess());
  return ts;
}

// ---------------------------------------------------------------- primitives

Term expect_term(const Val& v) {
  if (v.kind != Val::Kind::Term) throw Error(ErrorKind::Type, "primitive expects a term argument");
  return v.term;
}

std::vector<Term> strengthen_all(const std::vector<Term>& ts, std::size_t n) {
  std::vector<Term> out;
  for (const auto& t : ts) {
    Term s = strengthen(t, n, 1);
    if (!s) throw Error(ErrorKind::Scope, "bound variable escapes its binder");
    out.push_back(s);
  }
  return out;
}

void arity(const std::vector<Val>& args, std::size_t n, const char* name) {
  if (args.size() != n) throw Error(ErrorKind::Arity, std::string("primitive ") + name + " expects " + std::to_string(n) + " arguments");
}

const std::map<std::string, PrimFn>& prims() {
  static const std::map<std::string, PrimFn> m{
      {"msubst",
       [](const Context& ctx, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 2, "msubst");
         std::size_t n = ctx.size();
         auto r = multiterm_substitute(extend(ctx, {star()}), expect_term(a[0]), n, weaken_all(bag_terms(a[1]), n));
         return multiterm_state(strengthen_all(r, n));
       }},
      {"lam-deriv",
       [](const Context& ctx, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 2, "lam-deriv");
         std::size_t n = ctx.size();
         std::vector<Term> out;
         for (const auto& b :
              partial_derivative(extend(ctx, {star()}), expect_term(a[0]), n, {weaken(expect_term(a[1]), n, 1)}))
           out.push_back(lam(b));
         return multiterm_state(out);
       }},
      {"lam-ext",
       [](const Context&, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 1, "lam-ext");
         std::vector<Term> out;
         for (const auto& v : bag_terms(a[0])) out.push_back(lam(v));
         return multiterm_state(out);
       }},
      {"app-fun-ext",
       [](const Context&, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 2, "app-fun-ext");
         std::vector<Term> out;
         for (const auto& v : bag_terms(a[0])) out.push_back(app(v, bag_terms(a[1])));
         return multiterm_state(out);
       }},
      {"app-arg-ext",
       [](const Context&, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 3, "app-arg-ext");
         auto args = bag_terms(a[1]);
         append(args, bag_terms(a[2]));
         return multiterm_state({app(expect_term(a[0]), args)});
       }},
      {"D-left-ext",
       [](const Context&, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 2, "D-left-ext");
         std::vector<Term> out;
         for (const auto& v : bag_terms(a[0])) out.push_back(dapp(v, expect_term(a[1])));
         return multiterm_state(out);
       }},
      {"D-right-ext",
       [](const Context&, const std::vector<Val>& a, const std::vector<Context>&) {
         arity(a, 2, "D-right-ext");
         std::vector<Term> out;
         for (const auto& v : bag_terms(a[1])) out.push_back(dapp(expect_term(a[0]), v));
         return multiterm_state(out);
       }},
  };
  return m;
}

}  // namespace

const PrimFn* find_prim(const std::string& name) {
  auto it = prims().find(name);
  return it == prims().end() ? nullptr : &it->second;
}

const std::vector<std::string>& bundle_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : sources()) out.push_back(k);
    return out;
  }();
  return names;
}

const std::vector<std::string>& primary_bundles() {
  static const std::vector<std::string> names{"untyped-lambda", "cbv-stlc", "lambda-bar-mu",
                                              "pi",             "diff-lambda", "gsos-sample"};
  return names;
}

const std::string& bundle_source(const std::string& name) {
  auto it = sources().find(name);
  if (it == sources().end()) throw Error(ErrorKind::UnknownLanguage, "unknown language " + name);
  return it->second;
}

const LanguageBundle& bundled(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<LanguageBundle>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return *it->second;
  const std::string& text = bundle_source(name);
  auto lang = std::make_unique<LanguageBundle>(name == "gsos-sample" ? compile_gsos(sample_gsos()) : parse_spec(text));
  return *cache.emplace(name, std::move(lang)).first->second;
}

std::vector<Term> multiterm_substitute(const Context& ctx, const Term& e, std::size_t x, const std::vector<Term>& U) {
  check_inputs(ctx, e, x, U);
  return sorted(msub(e, ctx.size(), x, U));
}

std::vector<Term> partial_derivative(const Context& ctx, const Term& e, std::size_t x, const std::vector<Term>& U) {
  check_inputs(ctx, e, x, U);
  return sorted(deriv(e, ctx.size(), x, U));
}

Term multiterm_state(const std::vector<Term>& U) {
  std::vector<Val> vs;
  for (const auto& u : U) vs.push_back(Val::of(u));
  return make_node(Node::Kind::State, "ms", {}, {Arg{{}, Val::bag(std::move(vs))}});
}

}  // namespace tmonad
