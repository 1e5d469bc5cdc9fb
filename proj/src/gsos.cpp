#include "tmonad/gsos.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>

namespace tmonad {

namespace {

const Type& star() {
  static const Type t = Type::atom("*");
  return t;
}

Universe star_universe() { return Universe{{"*"}, false}; }

std::string x_name(std::size_t i) { return "x" + std::to_string(i + 1); }
std::string y_name(std::size_t i, std::size_t j) { return "y" + std::to_string(i + 1) + "_" + std::to_string(j + 1); }

// names of the rule context: x1..xm, then y_ij argument-major
std::vector<std::string> context_names(const GSOSRule& r) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < r.premises.size(); ++i) out.push_back(x_name(i));
  for (std::size_t i = 0; i < r.premises.size(); ++i)
    for (std::size_t j = 0; j < r.premises[i].size(); ++j) out.push_back(y_name(i, j));
  return out;
}

MetaTerm to_meta(const Term& t, const std::vector<std::string>& names) {
  if (t->kind == Node::Kind::Var) return mvar(names.at(t->index));
  std::vector<MArg> args;
  for (const auto& a : t->args) args.push_back(MArg{{}, MVal::of(to_meta(a.value.term, names))});
  return mop(t->op, {}, std::move(args));
}

Term inj(const Term& t) { return make_node(Node::Kind::State, "inj", {}, {Arg{{}, Val::of(t)}}); }
Term lab(const std::string& l, const Term& t) {
  return make_node(Node::Kind::State, "lab", {}, {Arg{{}, Val::constant(l)}, Arg{{}, Val::of(t)}});
}

[[noreturn]] void perr(const SExpr& e, const std::string& msg) { throw Error(ErrorKind::Parse, e.where() + ": " + msg); }

const std::string& atom_of(const SExpr& e, const char* what) {
  if (!e.atom) perr(e, std::string("expected ") + what);
  return e.text;
}

}  // namespace

bool GSOSRule::operator==(const GSOSRule& o) const {
  return name == o.name && op == o.op && label == o.label && premises == o.premises && same(target, o.target);
}

std::size_t rule_arity(const GSOSRule& r) {
  std::size_t n = r.premises.size();
  for (const auto& p : r.premises) n += p.size();
  return n;
}

MonadSignature gsos_signature(const GSOSSystem& sys) {
  MonadSignature sig;
  sig.universe = star_universe();
  for (const auto& [name, m] : sys.operations) {
    OperationScheme op{name, {}, {}, star()};
    for (std::size_t i = 0; i < m; ++i) op.args.push_back(ArgSpec{{}, Shape::term(star())});
    sig.ops.push_back(std::move(op));
  }
  return sig;
}

LanguageBundle compile_gsos(const GSOSSystem& sys) {
  LanguageBundle lang;
  lang.name = sys.name;
  lang.monad.base = gsos_signature(sys);
  lang.s1.universe = star_universe();
  lang.s2.universe = star_universe();
  lang.s1.ops.push_back(OperationScheme{"inj", {}, {ArgSpec{{}, Shape::term(star())}}, star()});
  lang.s2.ops.push_back(OperationScheme{
      "lab", {}, {ArgSpec{{}, Shape::constant(sys.labels)}, ArgSpec{{}, Shape::term(star())}}, star()});
  auto known = [&](const std::string& l, const GSOSRule& r) {
    if (std::find(sys.labels.begin(), sys.labels.end(), l) == sys.labels.end())
      throw Error(ErrorKind::UnknownLabel, "gsos rule " + r.name + ": unknown label " + l);
  };
  for (const auto& r : sys.rules) {
    auto op = std::find_if(sys.operations.begin(), sys.operations.end(), [&](const auto& o) { return o.first == r.op; });
    if (op == sys.operations.end()) throw Error(ErrorKind::UnknownOperation, "gsos rule " + r.name + ": unknown operation " + r.op);
    if (op->second != r.premises.size())
      throw Error(ErrorKind::Arity, "gsos rule " + r.name + ": " + r.op + " has arity " + std::to_string(op->second));
    known(r.label, r);
    Context ctx(rule_arity(r), star());
    typecheck_term(lang.monad.base, ctx, r.target);
    auto names = context_names(r);

    RuleSpec rs;
    rs.name = r.name;
    for (const auto& n : names) rs.metaCtx.push_back(MetaVarDecl{n, MetaVarDecl::Sort::Term, {}, star(), {}});
    std::vector<MArg> xs;
    for (std::size_t i = 0; i < r.premises.size(); ++i) {
      xs.push_back(MArg{{}, MVal::of(mvar(x_name(i)))});
      for (std::size_t j = 0; j < r.premises[i].size(); ++j) {
        known(r.premises[i][j], r);
        Judgement p;
        p.type = star();
        p.src = mstate("inj", {}, {MArg{{}, MVal::of(mvar(x_name(i)))}});
        p.tgt = mstate("lab", {}, {MArg{{}, MVal::constant(r.premises[i][j])}, MArg{{}, MVal::of(mvar(y_name(i, j)))}});
        rs.premises.push_back(std::move(p));
      }
    }
    rs.conclusion.type = star();
    rs.conclusion.src = mstate("inj", {}, {MArg{{}, MVal::of(mop(r.op, {}, std::move(xs)))}});
    rs.conclusion.tgt =
        mstate("lab", {}, {MArg{{}, MVal::constant(r.label)}, MArg{{}, MVal::of(to_meta(r.target, names))}});
    lang.rules.push_back(std::move(rs));
  }
  validate_bundle(lang);
  return lang;
}

bool LabelledEdge::operator<(const LabelledEdge& o) const {
  if (int c = compare(src, o.src)) return c < 0;
  if (label != o.label) return label < o.label;
  return compare(tgt, o.tgt) < 0;
}

bool LabelledEdge::operator==(const LabelledEdge& o) const {
  return same(src, o.src) && label == o.label && same(tgt, o.tgt);
}

LabelledRelation gsos_oracle(const GSOSSystem& sys, const Context& ctx, std::size_t depth, std::size_t fuel) {
  MonadSignature sig = gsos_signature(sys);
  std::vector<Term> universe = enumerate_terms(sig, ctx, star(), depth);
  std::set<LabelledEdge> rel;
  // successors by (source, label)
  std::map<std::pair<Term, std::string>, std::vector<Term>, std::function<bool(const std::pair<Term, std::string>&,
                                                                              const std::pair<Term, std::string>&)>>
      succ([](const auto& a, const auto& b) {
        if (int c = compare(a.first, b.first)) return c < 0;
        return a.second < b.second;
      });
  for (std::size_t round = 0; round < fuel; ++round) {
    std::vector<LabelledEdge> fresh;
    for (const auto& t : universe) {
      if (t->kind != Node::Kind::Op) continue;
      for (const auto& r : sys.rules) {
        if (r.op != t->op || r.premises.size() != t->args.size()) continue;
        std::vector<Term> images;
        for (const auto& a : t->args) images.push_back(a.value.term);
        std::vector<std::pair<std::size_t, std::size_t>> prem;
        for (std::size_t i = 0; i < r.premises.size(); ++i)
          for (std::size_t j = 0; j < r.premises[i].size(); ++j) prem.emplace_back(i, j);
        std::function<void(std::size_t)> go = [&](std::size_t k) {
          if (k == prem.size()) {
            Substitution s{Context(images.size(), star()), ctx, images};
            fresh.push_back(LabelledEdge{t, r.label, substitute(r.target, s)});
            return;
          }
          auto [i, j] = prem[k];
          auto it = succ.find({t->args[i].value.term, r.premises[i][j]});
          if (it == succ.end()) return;
          for (const auto& u : it->second) {
            images.push_back(u);
            go(k + 1);
            images.pop_back();
          }
        };
        go(0);
      }
    }
    bool changed = false;
    for (auto& e : fresh)
      if (rel.insert(e).second) {
        succ[{e.src, e.label}].push_back(e.tgt);
        changed = true;
      }
    if (!changed) break;
  }
  return LabelledRelation(rel.begin(), rel.end());
}

Relation as_state_relation(const LabelledRelation& rel) {
  std::vector<RelationEdge> out;
  for (const auto& e : rel) out.push_back(RelationEdge{star(), inj(e.src), lab(e.label, e.tgt)});
  return make_relation(std::move(out));
}

LabelledRelation as_labelled(const Relation& rel) {
  std::set<LabelledEdge> out;
  for (const auto& e : rel) {
    if (e.src->kind != Node::Kind::State || e.src->op != "inj" || e.tgt->kind != Node::Kind::State || e.tgt->op != "lab")
      throw Error(ErrorKind::Validation, "not a labelled transition: " + to_sexpr(e.src) + " -> " + to_sexpr(e.tgt));
    out.insert(LabelledEdge{e.src->args[0].value.term, e.tgt->args[0].value.label, e.tgt->args[1].value.term});
  }
  return LabelledRelation(out.begin(), out.end());
}

// (gsos-system NAME (labels L...) (operations (OP ARITY)...)
//   (rules (gsos-rule NAME (OP V1..Vm) ((Vi LABEL W)...) LABEL TARGET)...))
GSOSSystem parse_gsos(const SExpr& doc) {
  if (!doc.head("gsos-system") || doc.items.size() < 2) perr(doc, "expected (gsos-system NAME BLOCK...)");
  GSOSSystem sys;
  sys.name = atom_of(doc.items[1], "system name");
  std::vector<const SExpr*> ruleForms;
  for (std::size_t b = 2; b < doc.items.size(); ++b) {
    const SExpr& blk = doc.items[b];
    if (blk.head("labels")) {
      for (std::size_t i = 1; i < blk.items.size(); ++i) sys.labels.push_back(atom_of(blk.items[i], "label"));
    } else if (blk.head("operations")) {
      for (std::size_t i = 1; i < blk.items.size(); ++i) {
        const SExpr& o = blk.items[i];
        if (o.atom || o.items.size() != 2) perr(o, "expected (NAME ARITY)");
        const std::string& n = atom_of(o.items[1], "arity");
        if (n.empty() || !std::all_of(n.begin(), n.end(), ::isdigit)) perr(o.items[1], "arity must be a natural number");
        sys.operations.emplace_back(atom_of(o.items[0], "operation name"), std::stoul(n));
      }
    } else if (blk.head("rules")) {
      for (std::size_t i = 1; i < blk.items.size(); ++i) ruleForms.push_back(&blk.items[i]);
    } else {
      perr(blk, "unknown gsos block");
    }
  }
  auto arity = [&](const std::string& op) -> std::optional<std::size_t> {
    for (const auto& [n, m] : sys.operations)
      if (n == op) return m;
    return std::nullopt;
  };
  for (const SExpr* f : ruleForms) {
    const SExpr& e = *f;
    if (!e.head("gsos-rule") || e.items.size() != 6)
      perr(e, "expected (gsos-rule NAME (OP VAR...) ((VAR LABEL VAR)...) LABEL TARGET)");
    GSOSRule r;
    r.name = atom_of(e.items[1], "rule name");
    const SExpr& lhs = e.items[2];
    if (lhs.atom || lhs.items.empty()) perr(lhs, "expected (OP VAR...)");
    r.op = atom_of(lhs.items[0], "operation name");
    std::vector<std::string> xs;
    for (std::size_t i = 1; i < lhs.items.size(); ++i) {
      const std::string& v = atom_of(lhs.items[i], "variable");
      if (std::find(xs.begin(), xs.end(), v) != xs.end()) perr(lhs.items[i], "repeated variable " + v);
      xs.push_back(v);
    }
    r.premises.resize(xs.size());
    std::vector<std::vector<std::string>> ys(xs.size());
    if (e.items[3].atom) perr(e.items[3], "expected a premise list");
    for (const auto& p : e.items[3].items) {
      if (p.atom || p.items.size() != 3) perr(p, "expected (VAR LABEL VAR)");
      const std::string& x = atom_of(p.items[0], "variable");
      auto it = std::find(xs.begin(), xs.end(), x);
      if (it == xs.end()) perr(p.items[0], x + " is not an argument variable");
      std::size_t i = it - xs.begin();
      r.premises[i].push_back(atom_of(p.items[1], "label"));
      ys[i].push_back(atom_of(p.items[2], "variable"));
    }
    r.label = atom_of(e.items[4], "label");
    std::vector<std::string> names = xs;
    for (const auto& yi : ys) names.insert(names.end(), yi.begin(), yi.end());
    std::set<std::string> distinct(names.begin(), names.end());
    if (distinct.size() != names.size()) perr(e, "rule variables must be distinct");
    std::function<Term(const SExpr&)> term = [&](const SExpr& t) -> Term {
      if (t.atom) {
        auto it = std::find(names.begin(), names.end(), t.text);
        if (it != names.end()) return make_var(it - names.begin());
      }
      const std::string& op = t.atom ? t.text : atom_of(t.items.empty() ? t : t.items[0], "operation name");
      auto m = arity(op);
      if (!m) throw Error(ErrorKind::UnknownOperation, t.where() + ": unknown operation " + op);
      std::size_t given = t.atom ? 0 : t.items.size() - 1;
      if (given != *m) throw Error(ErrorKind::Arity, t.where() + ": " + op + " has arity " + std::to_string(*m));
      std::vector<Arg> args;
      for (std::size_t i = 0; i < given; ++i) args.push_back(Arg{{}, Val::of(term(t.items[i + 1]))});
      return make_node(Node::Kind::Op, op, {}, std::move(args));
    };
    r.target = term(e.items[5]);
    sys.rules.push_back(std::move(r));
  }
  try {
    compile_gsos(sys);
  } catch (const Error& err) {
    throw Error(err.kind(), doc.where() + ": " + err.what());
  }
  return sys;
}

SExpr gsos_sexpr(const GSOSSystem& sys) {
  auto sym = [](std::string s) { return SExpr::sym(std::move(s)); };
  std::vector<SExpr> labels{sym("labels")};
  for (const auto& l : sys.labels) labels.push_back(sym(l));
  std::vector<SExpr> ops{sym("operations")};
  for (const auto& [n, m] : sys.operations) ops.push_back(SExpr::list({sym(n), sym(std::to_string(m))}));
  std::vector<SExpr> rules{sym("rules")};
  for (const auto& r : sys.rules) {
    auto names = context_names(r);
    std::vector<SExpr> lhs{sym(r.op)};
    for (std::size_t i = 0; i < r.premises.size(); ++i) lhs.push_back(sym(x_name(i)));
    std::vector<SExpr> prem;
    for (std::size_t i = 0; i < r.premises.size(); ++i)
      for (std::size_t j = 0; j < r.premises[i].size(); ++j)
        prem.push_back(SExpr::list({sym(x_name(i)), sym(r.premises[i][j]), sym(y_name(i, j))}));
    std::function<SExpr(const Term&)> term = [&](const Term& t) -> SExpr {
      if (t->kind == Node::Kind::Var) return sym(names.at(t->index));
      if (t->args.empty()) return sym(t->op);
      std::vector<SExpr> xs{sym(t->op)};
      for (const auto& a : t->args) xs.push_back(term(a.value.term));
      return SExpr::list(std::move(xs));
    };
    rules.push_back(SExpr::list({sym("gsos-rule"), sym(r.name), SExpr::list(std::move(lhs)), SExpr::list(std::move(prem)),
                                 sym(r.label), term(r.target)}));
  }
  return SExpr::list({sym("gsos-system"), sym(sys.name), SExpr::list(std::move(labels)), SExpr::list(std::move(ops)),
                      SExpr::list(std::move(rules))});
}

GSOSSystem sample_gsos() {
  GSOSSystem sys;
  sys.name = "gsos-sample";
  sys.labels = {"a", "b"};
  sys.operations = {{"0", 0}, {"pre_a", 1}, {"pre_b", 1}, {"par", 2}};
  auto par = [](Term l, Term r) {
    return make_node(Node::Kind::Op, "par", {}, {Arg{{}, Val::of(std::move(l))}, Arg{{}, Val::of(std::move(r))}});
  };
  for (const std::string l : {"a", "b"}) {
    sys.rules.push_back(GSOSRule{"pre_" + l, "pre_" + l, l, {{}}, make_var(0)});
  }
  for (const std::string l : {"a", "b"}) {
    // context x1 x2 y: the premise variable comes last
    sys.rules.push_back(GSOSRule{"par-left-" + l, "par", l, {{l}, {}}, par(make_var(2), make_var(1))});
    sys.rules.push_back(GSOSRule{"par-right-" + l, "par", l, {{}, {l}}, par(make_var(0), make_var(2))});
  }
  return sys;
}

}  // namespace tmonad
