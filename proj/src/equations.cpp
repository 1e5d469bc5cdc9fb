#include "tmonad/equations.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "tmonad/sexpr.hpp"

namespace tmonad {

std::vector<Term> Backend::decompose(const std::string& op, const Term& t, std::size_t) const {
  if (t->kind != Node::Kind::Var && t->op == op) return {t};
  return {};
}

namespace {

Term child(const Term& t, std::size_t i) { return t->args[i].value.term; }

Term binary(const Term& like, const std::string& op, Term a, Term b) {
  return make_node(like->kind, op, {}, {Arg{{}, Val::of(std::move(a))}, Arg{{}, Val::of(std::move(b))}});
}

void dedupe(std::vector<Term>& ts) {
  std::sort(ts.begin(), ts.end(), TermLess());
  ts.erase(std::unique(ts.begin(), ts.end(), TermEq()), ts.end());
}

std::vector<std::vector<std::size_t>> proper_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  if (n < 2 || n > 20) return out;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

// parallel composition with unit, commutativity, associativity and scope extrusion
class PiBackend : public Backend {
 public:
  PiBackend(std::string par, std::string nil, std::string nu)
      : par_(std::move(par)), nil_(std::move(nil)), nu_(std::move(nu)) {}

  Term top(const Term& node, std::size_t n) const override {
    if (node->op == par_) {
      std::vector<Term> cs;
      components(node, cs);
      return build(node, std::move(cs));
    }
    if (node->op != nu_) return node;
    std::vector<Term> cs, in, out;
    components(child(node, 0), cs);
    for (auto& c : cs) {
      if (mentions(c, n)) {
        in.push_back(c);
      } else {
        out.push_back(strengthen(c, n, 1));
      }
    }
    if (out.empty()) return node;
    out.push_back(make_node(node->kind, nu_, node->tyargs, {Arg{node->args[0].binders, Val::of(build(node, in))}}));
    return build(node, std::move(out));
  }

  std::vector<Term> decompose(const std::string& op, const Term& t, std::size_t n) const override {
    if (t->kind == Node::Kind::Var) return {};
    std::vector<Term> cs, out;
    components(t, cs);
    if (op == par_) {
      for (const auto& s : proper_subsets(cs.size())) {
        std::vector<Term> a, b;
        for (std::size_t i = 0, j = 0; i < cs.size(); ++i) {
          if (j < s.size() && s[j] == i) {
            a.push_back(cs[i]);
            ++j;
          } else {
            b.push_back(cs[i]);
          }
        }
        out.push_back(binary(t, par_, build(t, a), build(t, b)));
      }
    } else if (op == nu_) {
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i]->kind == Node::Kind::Var || cs[i]->op != nu_) continue;
        if (i && same(cs[i], cs[i - 1])) continue;
        std::vector<Term> body;
        components(child(cs[i], 0), body);
        for (std::size_t j = 0; j < cs.size(); ++j)
          if (j != i) body.push_back(weaken(cs[j], n, 1));
        out.push_back(make_node(t->kind, nu_, cs[i]->tyargs, {Arg{cs[i]->args[0].binders, Val::of(build(t, body))}}));
      }
    } else {
      return Backend::decompose(op, t, n);
    }
    dedupe(out);
    return out;
  }

 private:
  void components(const Term& t, std::vector<Term>& out) const {
    if (t->kind != Node::Kind::Var && t->op == par_) {
      components(child(t, 0), out);
      components(child(t, 1), out);
    } else if (!(t->kind != Node::Kind::Var && t->op == nil_)) {
      out.push_back(t);
    }
  }

  Term build(const Term& like, std::vector<Term> cs) const {
    std::sort(cs.begin(), cs.end(), TermLess());
    if (cs.empty()) return make_node(like->kind, nil_, {}, {});
    Term acc = cs.back();
    for (std::size_t i = cs.size() - 1; i-- > 0;) acc = binary(like, par_, cs[i], acc);
    return acc;
  }

  std::string par_, nil_, nu_;
};

// iterated derivative D(D(e)·f)·g: argument lists are sorted
class DiffBackend : public Backend {
 public:
  explicit DiffBackend(std::string d) : d_(std::move(d)) {}

  Term top(const Term& node, std::size_t) const override {
    if (node->op != d_) return node;
    std::vector<Term> args;
    Term base = chain(node, args);
    std::sort(args.begin(), args.end(), TermLess());
    return rebuild(node, base, args);
  }

  std::vector<Term> decompose(const std::string& op, const Term& t, std::size_t n) const override {
    if (op != d_ || t->kind == Node::Kind::Var || t->op != d_) return Backend::decompose(op, t, n);
    std::vector<Term> args, out;
    Term base = chain(t, args);
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i && same(args[i], args[i - 1])) continue;
      std::vector<Term> rest = args;
      rest.erase(rest.begin() + i);
      out.push_back(binary(t, d_, rebuild(t, base, rest), args[i]));
    }
    return out;
  }

 private:
  Term chain(Term t, std::vector<Term>& args) const {
    while (t->kind != Node::Kind::Var && t->op == d_) {
      args.push_back(child(t, 1));
      t = child(t, 0);
    }
    return t;
  }

  Term rebuild(const Term& like, Term base, const std::vector<Term>& args) const {
    for (const auto& a : args) base = binary(like, d_, base, a);
    return base;
  }

  std::string d_;
};

// binary operations that are associative, optionally also commutative
class AssocBackend : public Backend {
 public:
  AssocBackend(std::vector<std::string> ops, bool commutative) : ops_(std::move(ops)), comm_(commutative) {}

  Term top(const Term& node, std::size_t) const override {
    if (!is_op(node)) return node;
    std::vector<Term> ls;
    leaves(node, node->op, ls);
    if (comm_) std::sort(ls.begin(), ls.end(), TermLess());
    return build(node, node->op, ls);
  }

  std::vector<Term> decompose(const std::string& op, const Term& t, std::size_t n) const override {
    if (std::find(ops_.begin(), ops_.end(), op) == ops_.end() || t->kind == Node::Kind::Var || t->op != op)
      return Backend::decompose(op, t, n);
    std::vector<Term> ls, out;
    leaves(t, op, ls);
    if (comm_) {
      for (const auto& s : proper_subsets(ls.size())) {
        std::vector<Term> a, b;
        for (std::size_t i = 0, j = 0; i < ls.size(); ++i) {
          if (j < s.size() && s[j] == i) {
            a.push_back(ls[i]);
            ++j;
          } else {
            b.push_back(ls[i]);
          }
        }
        out.push_back(binary(t, op, build(t, op, a), build(t, op, b)));
      }
    } else {
      for (std::size_t k = 1; k < ls.size(); ++k)
        out.push_back(binary(t, op, build(t, op, {ls.begin(), ls.begin() + k}), build(t, op, {ls.begin() + k, ls.end()})));
    }
    dedupe(out);
    return out;
  }

 private:
  bool is_op(const Term& t) const {
    return t->kind != Node::Kind::Var && t->args.size() == 2 &&
           std::find(ops_.begin(), ops_.end(), t->op) != ops_.end();
  }
  void leaves(const Term& t, const std::string& op, std::vector<Term>& out) const {
    if (t->kind != Node::Kind::Var && t->op == op) {
      leaves(child(t, 0), op, out);
      leaves(child(t, 1), op, out);
    } else {
      out.push_back(t);
    }
  }
  Term build(const Term& like, const std::string& op, std::vector<Term> ls) const {
    if (comm_) std::sort(ls.begin(), ls.end(), TermLess());
    Term acc = ls.back();
    for (std::size_t i = ls.size() - 1; i-- > 0;) acc = binary(like, op, ls[i], acc);
    return acc;
  }

  std::vector<std::string> ops_;
  bool comm_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const std::string& name, const std::vector<std::string>& args) {
  auto arg = [&](std::size_t i, const char* dflt) { return i < args.size() ? args[i] : std::string(dflt); };
  if (name == "identity") return std::make_unique<Backend>();
  if (name == "pi") return std::make_unique<PiBackend>(arg(0, "par"), arg(1, "nil"), arg(2, "nu"));
  if (name == "diff-lambda") return std::make_unique<DiffBackend>(arg(0, "Dapp"));
  if (name == "assoc" || name == "ac") {
    if (args.empty()) throw Error(ErrorKind::Validation, "backend " + name + " needs operation names");
    return std::make_unique<AssocBackend>(args, name == "ac");
  }
  throw Error(ErrorKind::Validation, "unknown normalization backend " + name);
}

Normalizer::Normalizer(const LanguageBundle& lang)
    : lang_(lang),
      monad_(make_backend(lang.backend, lang.backendArgs)),
      s1_(make_backend(lang.s1.backend, lang.s1.backendArgs)),
      s2_(make_backend(lang.s2.backend, lang.s2.backendArgs)) {}

const Backend& Normalizer::backend_for(Node::Kind kind, const std::string& op) const {
  if (kind == Node::Kind::Op) return *monad_;
  if (find_op(lang_.s1.ops, op)) return *s1_;
  return *s2_;
}

Term Normalizer::operator()(const Term& t, std::size_t n) const {
  if (t->kind == Node::Kind::Var) return t;
  std::vector<Arg> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(Arg{a.binders, (*this)(a.value, n + a.binders.size())});
  return backend_for(t->kind, t->op).top(make_node(t->kind, t->op, t->tyargs, std::move(args)), n);
}

Val Normalizer::operator()(const Val& v, std::size_t n) const {
  switch (v.kind) {
    case Val::Kind::Term: return Val::of((*this)(v.term, n));
    case Val::Kind::Const: return v;
    case Val::Kind::Sum: return Val::sum(v.label, (*this)(v.parts[0], n));
    default: break;
  }
  std::vector<Val> parts;
  for (const auto& p : v.parts) parts.push_back((*this)(p, n));
  return v.kind == Val::Kind::Prod ? Val::prod(std::move(parts)) : Val::bag(std::move(parts));
}

std::vector<Term> Normalizer::decompose(const std::string& op, const Term& t, std::size_t n) const {
  if (t->kind == Node::Kind::Var) return {};
  return backend_for(t->kind, t->op).decompose(op, t, n);
}

Term normalize(const LanguageBundle& lang, const Context& ctx, const Term& t) {
  if (t->kind == Node::Kind::State) return normalize_state(lang, ctx, t);
  typecheck_term(lang.monad.base, ctx, t);
  return Normalizer(lang)(t, ctx.size());
}

Term normalize_state(const LanguageBundle& lang, const Context& ctx, const Term& s) {
  try {
    typecheck_state(lang.monad.base, lang.s1, ctx, s);
  } catch (const Error&) {
    typecheck_state(lang.monad.base, lang.s2, ctx, s);
  }
  return Normalizer(lang)(s, ctx.size());
}

bool term_equal(const LanguageBundle& lang, const Context& ctx, const Term& t, const Term& u) {
  Term a = normalize(lang, ctx, t), b = normalize(lang, ctx, u);
  if (t->kind != Node::Kind::State && u->kind != Node::Kind::State) {
    Type ta = typecheck_term(lang.monad.base, ctx, t), tb = typecheck_term(lang.monad.base, ctx, u);
    if (!(ta == tb)) throw Error(ErrorKind::Type, "comparing terms of types " + ta.str() + " and " + tb.str());
  }
  return same(a, b);
}

// ---------------------------------------------------------------- free + quotient

std::string formal_name(const std::vector<OperationScheme>& taken, const std::string& eqName) {
  std::string n = "~" + eqName;
  while (find_op(taken, n)) n += "'";
  return n;
}

namespace {

std::vector<OperationScheme> formal_ops(const std::vector<OperationScheme>& base, const std::vector<EquationSpec>& eqs) {
  std::vector<OperationScheme> all = base, out;
  for (const auto& eq : eqs) {
    OperationScheme s;
    s.name = formal_name(all, eq.name);
    for (const auto& d : eq.metaCtx) {
      Shape sh = d.sort == MetaVarDecl::Sort::Term    ? Shape::term(d.type)
                 : d.sort == MetaVarDecl::Sort::Shape ? d.shape
                                                      : Shape::rec(d.type);
      s.args.push_back(ArgSpec{d.binders, sh});
    }
    s.output = eq.outType;
    all.push_back(s);
    out.push_back(s);
  }
  return out;
}

Val translate_val(const std::map<std::string, const EquationSpec*>& formal, Side side, const Context& ctx,
                  const Val& v);

Term translate_node(const std::map<std::string, const EquationSpec*>& formal, Side side, const Context& ctx,
                    const Term& a) {
  if (a->kind == Node::Kind::Var) return a;
  std::vector<Arg> args;
  for (const auto& x : a->args)
    args.push_back(Arg{x.binders, translate_val(formal, side, extend(ctx, x.binders), x.value)});
  auto it = formal.find(a->op);
  if (it == formal.end()) return make_node(a->kind, a->op, a->tyargs, std::move(args));
  const EquationSpec& eq = *it->second;
  Assignment asg;
  for (std::size_t i = 0; i < eq.metaCtx.size(); ++i) asg.values[eq.metaCtx[i].name] = args[i].value;
  return canonicalize(eval_metaterm(side == Side::L ? eq.lhs : eq.rhs, asg, ctx));
}

Val translate_val(const std::map<std::string, const EquationSpec*>& formal, Side side, const Context& ctx,
                  const Val& v) {
  switch (v.kind) {
    case Val::Kind::Term: return Val::of(translate_node(formal, side, ctx, v.term));
    case Val::Kind::Const: return v;
    case Val::Kind::Sum: return Val::sum(v.label, translate_val(formal, side, ctx, v.parts[0]));
    default: break;
  }
  std::vector<Val> parts;
  for (const auto& p : v.parts) parts.push_back(translate_val(formal, side, ctx, p));
  return v.kind == Val::Kind::Prod ? Val::prod(std::move(parts)) : Val::bag(std::move(parts));
}

std::map<std::string, const EquationSpec*> formal_map(const std::vector<OperationScheme>& base,
                                                      const std::vector<EquationSpec>& eqs) {
  auto ops = formal_ops(base, eqs);
  std::map<std::string, const EquationSpec*> m;
  for (std::size_t i = 0; i < eqs.size(); ++i) m[ops[i].name] = &eqs[i];
  return m;
}

bool mentions_formal(const Term& t, const std::map<std::string, const EquationSpec*>& formal) {
  if (t->kind == Node::Kind::Var) return false;
  if (formal.count(t->op)) return true;
  std::function<bool(const Val&)> walk = [&](const Val& v) {
    if (v.kind == Val::Kind::Term) return mentions_formal(v.term, formal);
    for (const auto& p : v.parts)
      if (walk(p)) return true;
    return false;
  };
  for (const auto& a : t->args)
    if (walk(a.value)) return true;
  return false;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

Partition harvest(const std::vector<Term>& universe, const std::vector<Term>& augmented,
                  const std::map<std::string, const EquationSpec*>& formal, const Context& ctx) {
  std::unordered_map<Term, std::size_t, TermHash, TermEq> index;
  for (std::size_t i = 0; i < universe.size(); ++i) index.emplace(universe[i], i);
  UnionFind uf(universe.size());
  for (const auto& a : augmented) {
    if (!mentions_formal(a, formal)) continue;
    Term l = translate_node(formal, Side::L, ctx, a);
    Term r = translate_node(formal, Side::R, ctx, a);
    auto il = index.find(l), ir = index.find(r);
    if (il != index.end() && ir != index.end()) uf.unite(il->second, ir->second);
  }
  std::map<std::size_t, std::vector<Term>> groups;
  for (std::size_t i = 0; i < universe.size(); ++i) groups[uf.find(i)].push_back(universe[i]);
  Partition p;
  for (auto& [root, members] : groups) p.classes.push_back(std::move(members));
  return p;
}

}  // namespace

MonadSignature augment_signature(const EquationalSignature& e) {
  MonadSignature s = e.base;
  for (auto& op : formal_ops(e.base.ops, e.equations)) s.ops.push_back(std::move(op));
  return s;
}

StateSignature augment_state_signature(const StateSignature& st) {
  StateSignature s = st;
  for (auto& op : formal_ops(st.ops, st.equations)) s.ops.push_back(std::move(op));
  s.equations.clear();
  return s;
}

Term translate(const EquationalSignature& e, Side side, const Context& ctx, const Term& a) {
  return translate_node(formal_map(e.base.ops, e.equations), side, ctx, a);
}

Term translate_state(const StateSignature& st, Side side, const Context& ctx, const Term& a) {
  return translate_node(formal_map(st.ops, st.equations), side, ctx, a);
}

std::size_t default_aug_depth(const std::vector<EquationSpec>& eqs, std::size_t dTerm) {
  auto covers = [](const EquationSpec& eq, const MetaTerm& side) {
    if (side->kind != MNode::Kind::Op && side->kind != MNode::Kind::State) return false;
    std::set<std::string> mvs;
    collect_mvars(side, mvs);
    for (const auto& d : eq.metaCtx)
      if (!mvs.count(d.name)) return false;
    return true;
  };
  bool allL = true, allR = true;
  for (const auto& eq : eqs) {
    allL = allL && covers(eq, eq.lhs);
    allR = allR && covers(eq, eq.rhs);
  }
  return allL || allR ? dTerm : dTerm + 1;
}

Partition quotient_oracle(const EquationalSignature& e, const Context& ctx, const Type& ty, std::size_t dTerm,
                          std::size_t dAug, const EnumConfig& cfg) {
  Enumerator plain(e.base, cfg);
  std::vector<Term> universe = plain.terms(ctx, ty, dTerm);
  if (e.equations.empty()) return partition_by(universe, [](const Term& t) { return t; });
  MonadSignature aug = augment_signature(e);
  Enumerator ea(aug, cfg);
  return harvest(universe, ea.terms(ctx, ty, dAug), formal_map(e.base.ops, e.equations), ctx);
}

Partition state_quotient_oracle(const MonadSignature& sig, const StateSignature& st, const Context& ctx,
                                const Type& ty, std::size_t dTerm, std::size_t dAug, const EnumConfig& cfg) {
  Enumerator plain(sig, cfg);
  std::vector<Term> universe = plain.states(st, ctx, ty, dTerm);
  StateSignature aug = augment_state_signature(st);
  Enumerator ea(sig, cfg);
  std::vector<Term> augmented = ea.states(aug, ctx, ty, dAug);
  return harvest(universe, augmented, formal_map(st.ops, st.equations), ctx);
}

Partition partition_by(const std::vector<Term>& universe, const std::function<Term(const Term&)>& canon) {
  std::unordered_map<Term, std::size_t, TermHash, TermEq> key;
  Partition p;
  for (const auto& t : universe) {
    auto [it, fresh] = key.emplace(canon(t), p.classes.size());
    if (fresh) p.classes.emplace_back();
    p.classes[it->second].push_back(t);
  }
  return p;
}

std::string Partition::report() const {
  std::ostringstream os;
  os << "classes " << classes.size() << "\n";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    os << "class " << i << " " << to_sexpr(classes[i][0]) << "\n";
    for (const auto& m : classes[i]) os << "  " << to_sexpr(m) << "\n";
  }
  return os.str();
}

}  // namespace tmonad
