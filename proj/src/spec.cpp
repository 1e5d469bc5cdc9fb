#include "tmonad/spec.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "tmonad/equations.hpp"

namespace tmonad {

namespace {

[[noreturn]] void perr(const SExpr& e, const std::string& msg) { throw Error(ErrorKind::Parse, e.where() + ": " + msg); }
[[noreturn]] void verr(const SExpr& e, const std::string& msg) {
  throw Error(ErrorKind::Validation, e.where() + ": " + msg);
}

const std::string& atom_of(const SExpr& e, const char* what) {
  if (!e.atom) perr(e, std::string("expected ") + what);
  return e.text;
}

const std::vector<SExpr>& list_of(const SExpr& e, const char* what) {
  if (e.atom) perr(e, std::string("expected a list of ") + what);
  return e.items;
}

SExpr sym(std::string s) { return SExpr::sym(std::move(s)); }
SExpr lst(std::vector<SExpr> items) { return SExpr::list(std::move(items)); }

Type read_type(const SExpr& e) {
  Type t = parse_type(e);
  std::function<void(const Type&)> check = [&](const Type& x) {
    if (x.is_arrow()) {
      check(x.dom());
      check(x.cod());
    } else if (x.name().empty() || x.name()[0] == '?') {
      perr(e, "invalid type atom '" + x.name() + "'");
    }
  };
  check(t);
  return t;
}

std::vector<Type> read_types(const SExpr& e) {
  std::vector<Type> out;
  for (const auto& x : list_of(e, "types")) out.push_back(read_type(x));
  return out;
}

std::vector<std::string> read_atoms(const SExpr& e, const char* what) {
  std::vector<std::string> out;
  for (const auto& x : list_of(e, what)) out.push_back(atom_of(x, what));
  return out;
}

// ---------------------------------------------------------------- unification

bool is_flex(const Type& t) { return !t.is_arrow() && !t.name().empty() && t.name()[0] == '?'; }

class Unifier {
 public:
  Type fresh() { return Type::atom("?" + std::to_string(next_++)); }

  Type resolve(const Type& t) const {
    if (t.is_arrow()) return Type::arrow(resolve(t.dom()), resolve(t.cod()));
    if (is_flex(t)) {
      auto it = bind_.find(t.name());
      if (it != bind_.end()) return resolve(it->second);
    }
    return t;
  }

  bool unify(const Type& a0, const Type& b0) {
    Type a = resolve(a0), b = resolve(b0);
    if (a == b) return true;
    if (is_flex(a)) return bind(a.name(), b);
    if (is_flex(b)) return bind(b.name(), a);
    if (a.is_arrow() && b.is_arrow()) return unify(a.dom(), b.dom()) && unify(a.cod(), b.cod());
    return false;
  }

  static void flexes(const Type& t, std::vector<std::string>& out) {
    if (t.is_arrow()) {
      flexes(t.dom(), out);
      flexes(t.cod(), out);
    } else if (is_flex(t)) {
      out.push_back(t.name());
    }
  }

 private:
  static bool occurs(const std::string& v, const Type& t) {
    if (t.is_arrow()) return occurs(v, t.dom()) || occurs(v, t.cod());
    return t.name() == v;
  }
  bool bind(const std::string& v, const Type& t) {
    if (occurs(v, t)) return false;
    bind_[v] = t;
    return true;
  }

  std::map<std::string, Type> bind_;
  std::size_t next_ = 0;
};

bool is_injection(const OperationScheme& op) {
  return op.args.size() == 1 && op.args[0].binders.empty() && op.args[0].shape.kind == Shape::Kind::Term;
}

// ---------------------------------------------------------------- elaboration

struct Elab {
  Elab(const MonadSignature& g, const StateSignature* s, const std::vector<MetaVarDecl>* d, NamedContext* f = nullptr)
      : sig(g), s1(s), decls(d), free(f) {}

  const MonadSignature& sig;
  const StateSignature* s1 = nullptr;
  const std::vector<MetaVarDecl>* decls = nullptr;
  NamedContext* free = nullptr;
  Type fallback;  // default for unresolved types (named terms only)
  Unifier u;
  std::vector<std::string> names;
  std::vector<Type> types;

  int bound(const std::string& n) const {
    for (std::size_t i = names.size(); i-- > 0;)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  }

  const MetaVarDecl* mv(const std::string& n) const { return decls ? find_decl(*decls, n) : nullptr; }

  void want(const SExpr& at, const Type& got, const Type& ty) {
    if (!u.unify(got, ty))
      verr(at, "type mismatch: expected " + u.resolve(ty).str() + ", got " + u.resolve(got).str() + " in " +
                   write_flat(at));
  }

  MetaTerm term(const SExpr& e, const Type& ty) {
    if (e.atom) {
      const std::string& n = e.text;
      if (int i = bound(n); i >= 0) {
        want(e, types[i], ty);
        return mindex(static_cast<std::size_t>(i));
      }
      if (const MetaVarDecl* d = mv(n)) {
        if (d->sort != MetaVarDecl::Sort::Term) verr(e, "metavariable " + n + " is not a term metavariable");
        want(e, d->type, ty);
        return mvar(n);
      }
      if (const OperationScheme* op = find_op(sig.ops, n)) return node(e, *op, Node::Kind::Op, nullptr, ty);
      if (free) return free_var(e, n, ty);
      verr(e, "unknown name " + n);
    }
    const SExpr& h = head(e);
    if (h.text == "subst") return subst(e, ty);
    if (h.text == "weaken") return weaken(e, ty, nullptr);
    if (h.text == "prim") return prim(e);
    const OperationScheme* op = find_op(sig.ops, h.text);
    if (!op) verr(h, "unknown operation " + h.text);
    return node(e, *op, Node::Kind::Op, nullptr, ty);
  }

  MetaTerm state(const SExpr& e, const StateSignature& st, const Type& ty) {
    if (st.identity) return term(e, ty);
    if (e.atom) {
      const std::string& n = e.text;
      if (bound(n) < 0)
        if (const MetaVarDecl* d = mv(n)) {
          if (d->sort == MetaVarDecl::Sort::State1 || d->sort == MetaVarDecl::Sort::State2) {
            want(e, d->type, ty);
            return mvar(n);
          }
          if (d->sort == MetaVarDecl::Sort::Shape) verr(e, "shape metavariable " + n + " where a state is expected");
        }
      if (bound(n) < 0)
        if (const OperationScheme* op = find_op(st.ops, n)) return node(e, *op, Node::Kind::State, &st, ty);
      return coerce(e, st, ty);
    }
    const SExpr& h = head(e);
    if (h.text == "subst" && e.items.size() > 1 && e.items[1].atom) {
      const MetaVarDecl* d = mv(e.items[1].text);
      if (d && d->sort != MetaVarDecl::Sort::Term) return subst(e, ty);
    }
    if (h.text == "weaken") return weaken(e, ty, &st);
    if (h.text == "prim") return prim(e);
    if (const OperationScheme* op = find_op(st.ops, h.text)) return node(e, *op, Node::Kind::State, &st, ty);
    return coerce(e, st, ty);
  }

  const SExpr& head(const SExpr& e) {
    if (e.items.empty()) perr(e, "empty list");
    if (!e.items[0].atom) perr(e.items[0], "expected an operation name");
    return e.items[0];
  }

  MetaTerm node(const SExpr& e, const OperationScheme& sch, Node::Kind kind, const StateSignature* own,
                const Type& ty) {
    std::vector<SExpr> items = e.atom ? std::vector<SExpr>{e} : e.items;
    TypeMap m;
    std::vector<Type> tyargs;
    for (const auto& p : sch.typeParams) {
      m[p] = u.fresh();
      tyargs.push_back(m[p]);
    }
    std::size_t pos = 1;
    if (items.size() > 1 && items[1].head(":")) {
      if (items[1].items.size() - 1 != sch.typeParams.size())
        verr(items[1], sch.name + " takes " + std::to_string(sch.typeParams.size()) + " type arguments");
      for (std::size_t i = 0; i < sch.typeParams.size(); ++i)
        want(items[1].items[i + 1], m[sch.typeParams[i]], read_type(items[1].items[i + 1]));
      pos = 2;
    }
    want(e, instantiate(sch.output, m), ty);
    std::vector<MArg> args;
    for (const auto& a : sch.args) {
      auto binders = instantiate(a.binders, m);
      std::vector<std::string> bnames;
      if (!binders.empty()) {
        if (pos >= items.size()) verr(e, sch.name + ": missing binder list");
        const SExpr& bl = items[pos++];
        if (bl.atom || bl.items.size() != binders.size())
          verr(bl, sch.name + ": expected a list of " + std::to_string(binders.size()) + " binder names");
        for (const auto& x : bl.items) bnames.push_back(atom_of(x, "binder name"));
      }
      if (pos >= items.size())
        verr(e, sch.name + " expects " + std::to_string(sch.args.size()) + " arguments in " + write_flat(e));
      std::size_t n = names.size();
      names.insert(names.end(), bnames.begin(), bnames.end());
      types.insert(types.end(), binders.begin(), binders.end());
      MVal v = val(items[pos++], instantiate(a.shape, m), own);
      names.resize(n);
      types.resize(n);
      args.push_back(MArg{binders, std::move(v)});
    }
    if (pos != items.size()) verr(e, sch.name + " expects " + std::to_string(sch.args.size()) + " arguments in " + write_flat(e));
    return kind == Node::Kind::Op ? mop(sch.name, tyargs, std::move(args)) : mstate(sch.name, tyargs, std::move(args));
  }

  MVal val(const SExpr& e, const Shape& shape, const StateSignature* own) {
    if (e.atom && bound(e.text) < 0)
      if (const MetaVarDecl* d = mv(e.text); d && d->sort == MetaVarDecl::Sort::Shape) return MVal::of(mvar(e.text));
    switch (shape.kind) {
      case Shape::Kind::Term: return MVal::of(term(e, shape.type));
      case Shape::Kind::Rec:
        if (!own) verr(e, "recursive state argument outside a state operation");
        return MVal::of(state(e, *own, shape.type));
      case Shape::Kind::Embed:
        if (!s1) verr(e, "state argument without a source state signature");
        return MVal::of(state(e, *s1, shape.type));
      case Shape::Kind::Const: {
        const std::string& l = atom_of(e, "label");
        if (std::find(shape.labels.begin(), shape.labels.end(), l) == shape.labels.end())
          throw Error(ErrorKind::UnknownLabel, e.where() + ": unknown label " + l);
        return MVal::constant(l);
      }
      case Shape::Kind::Prod: {
        if (!e.head("tuple") || e.items.size() - 1 != shape.parts.size())
          verr(e, "expected a tuple of " + std::to_string(shape.parts.size()) + " components");
        std::vector<MVal> parts;
        for (std::size_t i = 0; i < shape.parts.size(); ++i) parts.push_back(val(e.items[i + 1], shape.parts[i], own));
        return MVal::prod(std::move(parts));
      }
      case Shape::Kind::Sum: {
        if (!e.head("tag") || e.items.size() != 3) verr(e, "expected (tag TAG VALUE)");
        const std::string& t = atom_of(e.items[1], "tag");
        auto it = std::find(shape.labels.begin(), shape.labels.end(), t);
        if (it == shape.labels.end()) throw Error(ErrorKind::UnknownLabel, e.items[1].where() + ": unknown tag " + t);
        return MVal::sum(t, val(e.items[2], shape.parts[it - shape.labels.begin()], own));
      }
      case Shape::Kind::Bag: {
        if (!e.head("bag")) verr(e, "expected (bag ...)");
        std::vector<MVal> parts;
        std::string rest;
        for (std::size_t i = 1; i < e.items.size(); ++i) {
          const SExpr& x = e.items[i];
          if (i + 1 == e.items.size() && x.head("rest")) {
            if (x.items.size() != 2) verr(x, "expected (rest NAME)");
            rest = atom_of(x.items[1], "metavariable");
            const MetaVarDecl* d = mv(rest);
            if (!d || d->sort != MetaVarDecl::Sort::Shape) verr(x, rest + " is not a shape metavariable");
            continue;
          }
          parts.push_back(val(x, shape.parts[0], own));
        }
        return MVal::bag(std::move(parts), rest);
      }
    }
    verr(e, "malformed shape");
  }

  MetaTerm subst(const SExpr& e, const Type& ty) {
    if (e.items.size() < 2) verr(e, "expected (subst METAVARIABLE IMAGE...)");
    const std::string& n = atom_of(e.items[1], "metavariable");
    const MetaVarDecl* d = mv(n);
    if (!d) verr(e.items[1], "undeclared metavariable " + n);
    if (d->sort == MetaVarDecl::Sort::Shape) verr(e.items[1], "cannot substitute into shape metavariable " + n);
    std::size_t k = e.items.size() - 2;
    if (d->binders.size() < k) verr(e, n + " binds only " + std::to_string(d->binders.size()) + " variables");
    want(e, d->type, ty);
    std::vector<MetaTerm> images;
    for (std::size_t i = 0; i < k; ++i)
      images.push_back(term(e.items[i + 2], d->binders[d->binders.size() - k + i]));
    return msubst(n, std::move(images));
  }

  MetaTerm weaken(const SExpr& e, const Type& ty, const StateSignature* st) {
    if (e.items.size() != 3) verr(e, "expected (weaken (TYPE...) BODY)");
    auto ws = read_types(e.items[1]);
    if (ws.size() > names.size()) verr(e, "weakening beyond the enclosing binders");
    for (std::size_t i = 0; i < ws.size(); ++i) want(e, types[names.size() - ws.size() + i], ws[i]);
    auto savedN = names;
    auto savedT = types;
    names.resize(names.size() - ws.size());
    types.resize(types.size() - ws.size());
    MetaTerm body = st ? state(e.items[2], *st, ty) : term(e.items[2], ty);
    names = std::move(savedN);
    types = std::move(savedT);
    return mweaken(std::move(ws), std::move(body));
  }

  MetaTerm prim(const SExpr& e) {
    if (e.items.size() < 2) verr(e, "expected (prim NAME ARG...)");
    const std::string& n = atom_of(e.items[1], "primitive name");
    if (!find_prim(n)) verr(e.items[1], "unknown primitive " + n);
    std::vector<MVal> args;
    for (std::size_t i = 2; i < e.items.size(); ++i) {
      const SExpr& x = e.items[i];
      if (x.atom && bound(x.text) < 0 && mv(x.text)) {
        args.push_back(MVal::of(mvar(x.text)));
      } else {
        args.push_back(MVal::of(term(x, u.fresh())));
      }
    }
    return mprim(n, std::move(args));
  }

  MetaTerm coerce(const SExpr& e, const StateSignature& st, const Type& ty) {
    Type inner = u.fresh();
    MetaTerm t = term(e, inner);
    const OperationScheme* pick = nullptr;
    std::size_t fits = 0;
    for (const auto& op : st.ops) {
      if (!is_injection(op)) continue;
      Unifier trial = u;
      TypeMap m;
      for (const auto& p : op.typeParams) m[p] = trial.fresh();
      if (trial.unify(instantiate(op.args[0].shape.type, m), inner) && trial.unify(instantiate(op.output, m), ty)) {
        pick = &op;
        ++fits;
      }
    }
    if (fits == 0) verr(e, "expected a state, got the term " + write_flat(e));
    if (fits > 1) verr(e, "ambiguous injection of " + write_flat(e) + " into a state; write it explicitly");
    TypeMap m;
    std::vector<Type> tyargs;
    for (const auto& p : pick->typeParams) {
      m[p] = u.fresh();
      tyargs.push_back(m[p]);
    }
    want(e, instantiate(pick->args[0].shape.type, m), inner);
    want(e, instantiate(pick->output, m), ty);
    return mstate(pick->name, tyargs, {MArg{{}, MVal::of(t)}});
  }

  MetaTerm free_var(const SExpr& e, const std::string& n, const Type& ty) {
    auto& fn = free->names;
    auto it = std::find(fn.begin(), fn.end(), n);
    if (it == fn.end()) {
      fn.push_back(n);
      free->types.push_back(u.fresh());
      it = fn.end() - 1;
    }
    want(e, free->types[it - fn.begin()], ty);
    return mvar(n);
  }

  // ---------------------------------------------------------------- zonking

  Type finish(const SExpr& at, const Type& t) {
    Type r = u.resolve(t);
    std::vector<std::string> fl;
    Unifier::flexes(r, fl);
    if (fl.empty()) return r;
    if (fallback.empty()) verr(at, "cannot infer a type in " + write_flat(at));
    for (const auto& v : fl) u.unify(Type::atom(v), fallback);
    return u.resolve(r);
  }

  std::vector<Type> finish(const SExpr& at, const std::vector<Type>& ts) {
    std::vector<Type> out;
    for (const auto& t : ts) out.push_back(finish(at, t));
    return out;
  }

  MetaTerm zonk(const SExpr& at, const MetaTerm& mt) {
    auto n = std::make_shared<MNode>(*mt);
    n->tyargs = finish(at, mt->tyargs);
    n->binders = finish(at, mt->binders);
    for (auto& a : n->args) {
      a.binders = finish(at, a.binders);
      a.value = zonk(at, a.value);
    }
    for (auto& i : n->images) i = zonk(at, i);
    if (n->body) n->body = zonk(at, n->body);
    for (auto& p : n->primArgs) p = zonk(at, p);
    return n;
  }

  MVal zonk(const SExpr& at, const MVal& v) {
    MVal out = v;
    if (out.term) out.term = zonk(at, out.term);
    for (auto& p : out.parts) p = zonk(at, p);
    return out;
  }
};

MetaTerm shift_bound(const MetaTerm& mt, std::size_t k);

MVal shift_bound(const MVal& v, std::size_t k) {
  MVal out = v;
  if (out.term) out.term = shift_bound(out.term, k);
  for (auto& p : out.parts) p = shift_bound(p, k);
  return out;
}

MetaTerm shift_bound(const MetaTerm& mt, std::size_t k) {
  if (k == 0) return mt;
  auto n = std::make_shared<MNode>(*mt);
  if (n->kind == MNode::Kind::Var) n->index += k;
  for (auto& a : n->args) a.value = shift_bound(a.value, k);
  for (auto& i : n->images) i = shift_bound(i, k);
  if (n->body) n->body = shift_bound(n->body, k);
  for (auto& p : n->primArgs) p = shift_bound(p, k);
  return n;
}

// ---------------------------------------------------------------- declarations

Shape read_shape(const SExpr& e) {
  if (e.atom || e.items.empty() || !e.items[0].atom) perr(e, "expected a shape");
  const std::string& h = e.items[0].text;
  auto one = [&]() -> const SExpr& {
    if (e.items.size() != 2) perr(e, "(" + h + " ...) takes one argument");
    return e.items[1];
  };
  if (h == "hole" || h == "input") return Shape::term(read_type(one()));
  if (h == "rec") return Shape::rec(read_type(one()));
  if (h == "state") return Shape::embed(read_type(one()));
  if (h == "const") {
    std::vector<std::string> ls;
    for (std::size_t i = 1; i < e.items.size(); ++i) ls.push_back(atom_of(e.items[i], "label"));
    return Shape::constant(std::move(ls));
  }
  if (h == "prod") {
    std::vector<Shape> ps;
    for (std::size_t i = 1; i < e.items.size(); ++i) ps.push_back(read_shape(e.items[i]));
    return Shape::prod(std::move(ps));
  }
  if (h == "sum") {
    std::vector<std::string> tags;
    std::vector<Shape> alts;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const auto& alt = e.items[i];
      if (alt.atom || alt.items.size() != 2) perr(alt, "expected (TAG SHAPE)");
      tags.push_back(atom_of(alt.items[0], "tag"));
      alts.push_back(read_shape(alt.items[1]));
    }
    return Shape::sum(std::move(tags), std::move(alts));
  }
  if (h == "bag") return Shape::bag(read_shape(one()));
  perr(e, "unknown shape " + h);
}

SExpr shape_sexpr(const Shape& s, bool stateOp) {
  switch (s.kind) {
    case Shape::Kind::Term: return lst({sym(stateOp ? "input" : "hole"), type_sexpr(s.type)});
    case Shape::Kind::Rec: return lst({sym("rec"), type_sexpr(s.type)});
    case Shape::Kind::Embed: return lst({sym("state"), type_sexpr(s.type)});
    case Shape::Kind::Const: {
      std::vector<SExpr> xs{sym("const")};
      for (const auto& l : s.labels) xs.push_back(sym(l));
      return lst(std::move(xs));
    }
    case Shape::Kind::Prod: {
      std::vector<SExpr> xs{sym("prod")};
      for (const auto& p : s.parts) xs.push_back(shape_sexpr(p, stateOp));
      return lst(std::move(xs));
    }
    case Shape::Kind::Sum: {
      std::vector<SExpr> xs{sym("sum")};
      for (std::size_t i = 0; i < s.parts.size(); ++i) xs.push_back(lst({sym(s.labels[i]), shape_sexpr(s.parts[i], stateOp)}));
      return lst(std::move(xs));
    }
    case Shape::Kind::Bag: return lst({sym("bag"), shape_sexpr(s.parts[0], stateOp)});
  }
  return sym("?");
}

SExpr types_sexpr(const std::vector<Type>& ts) {
  std::vector<SExpr> xs;
  for (const auto& t : ts) xs.push_back(type_sexpr(t));
  return lst(std::move(xs));
}

SExpr atoms_sexpr(const std::vector<std::string>& as) {
  std::vector<SExpr> xs;
  for (const auto& a : as) xs.push_back(sym(a));
  return lst(std::move(xs));
}

OperationScheme read_scheme(const SExpr& e) {
  if (!e.head("op") || e.items.size() != 5) perr(e, "expected (op NAME (TYPARAM...) ((arg (BINDER...) SHAPE)...) TYPE)");
  OperationScheme op;
  op.name = atom_of(e.items[1], "operation name");
  op.typeParams = read_atoms(e.items[2], "type parameters");
  for (const auto& a : list_of(e.items[3], "arguments")) {
    if (!a.head("arg") || a.items.size() != 3) perr(a, "expected (arg (BINDER...) SHAPE)");
    op.args.push_back(ArgSpec{read_types(a.items[1]), read_shape(a.items[2])});
  }
  op.output = read_type(e.items[4]);
  return op;
}

SExpr scheme_sexpr(const OperationScheme& op, bool stateOp) {
  std::vector<SExpr> args;
  for (const auto& a : op.args) args.push_back(lst({sym("arg"), types_sexpr(a.binders), shape_sexpr(a.shape, stateOp)}));
  return lst({sym("op"), sym(op.name), atoms_sexpr(op.typeParams), lst(std::move(args)), type_sexpr(op.output)});
}

std::vector<OperationScheme> read_schemes(const SExpr& block) {
  std::vector<OperationScheme> out;
  for (std::size_t i = 1; i < block.items.size(); ++i) out.push_back(read_scheme(block.items[i]));
  return out;
}

MetaVarDecl read_decl(const SExpr& e) {
  if (e.atom || e.items.size() != 4 || !e.items[0].atom) perr(e, "expected (mv NAME (BINDER...) TYPE)");
  MetaVarDecl d;
  const std::string& h = e.items[0].text;
  d.name = atom_of(e.items[1], "metavariable name");
  d.binders = read_types(e.items[2]);
  if (h == "mv") {
    d.sort = MetaVarDecl::Sort::Term;
  } else if (h == "mv-s1") {
    d.sort = MetaVarDecl::Sort::State1;
  } else if (h == "mv-s2") {
    d.sort = MetaVarDecl::Sort::State2;
  } else if (h == "mv-shape") {
    d.sort = MetaVarDecl::Sort::Shape;
    d.shape = read_shape(e.items[3]);
    return d;
  } else {
    perr(e, "unknown metavariable sort " + h);
  }
  d.type = read_type(e.items[3]);
  return d;
}

SExpr decl_sexpr(const MetaVarDecl& d) {
  static const char* heads[] = {"mv", "mv-s1", "mv-s2", "mv-shape"};
  SExpr last = d.sort == MetaVarDecl::Sort::Shape ? shape_sexpr(d.shape, false) : type_sexpr(d.type);
  return lst({sym(heads[static_cast<int>(d.sort)]), sym(d.name), types_sexpr(d.binders), last});
}

std::vector<MetaVarDecl> read_decls(const SExpr& e) {
  std::vector<MetaVarDecl> out;
  for (const auto& x : list_of(e, "metavariable declarations")) out.push_back(read_decl(x));
  return out;
}

SExpr decls_sexpr(const std::vector<MetaVarDecl>& ds) {
  std::vector<SExpr> xs;
  for (const auto& d : ds) xs.push_back(decl_sexpr(d));
  return lst(std::move(xs));
}

// ---------------------------------------------------------------- printing metaterms

void shape_labels(const Shape& s, std::set<std::string>& out) {
  if (s.kind == Shape::Kind::Const) out.insert(s.labels.begin(), s.labels.end());
  for (const auto& p : s.parts) shape_labels(p, out);
}

std::set<std::string> reserved_names(const LanguageBundle& lang) {
  std::set<std::string> out;
  for (const auto* ops : {&lang.monad.base.ops, &lang.s1.ops, &lang.s2.ops})
    for (const auto& o : *ops) {
      out.insert(o.name);
      for (const auto& a : o.args) shape_labels(a.shape, out);
    }
  return out;
}

struct Printer {
  const LanguageBundle& lang;
  std::set<std::string> taken;
  std::vector<std::string> stack;
  std::size_t offset = 0;
  bool elide = false;
  bool tyargs = true;

  std::string fresh() const {
    static const char* base[] = {"x", "y", "z", "u", "v", "w"};
    for (std::size_t k = 0;; ++k)
      for (const char* b : base) {
        std::string n = k ? b + std::to_string(k) : std::string(b);
        if (!taken.count(n) && std::find(stack.begin(), stack.end(), n) == stack.end()) return n;
      }
  }

  bool injection(const std::string& op) const {
    for (const auto* st : {&lang.s1, &lang.s2})
      if (const OperationScheme* s = find_op(st->ops, op); s && is_injection(*s)) return true;
    return false;
  }

  SExpr mt(const MetaTerm& m) {
    switch (m->kind) {
      case MNode::Kind::MVar: return sym(m->name);
      case MNode::Kind::Var: {
        if (m->index < offset || m->index - offset >= stack.size())
          throw Error(ErrorKind::Validation, "bound variable " + std::to_string(m->index) + " has no name");
        return sym(stack[m->index - offset]);
      }
      case MNode::Kind::Op:
      case MNode::Kind::State: {
        if (elide && m->kind == MNode::Kind::State && m->args.size() == 1 && m->args[0].binders.empty() &&
            m->args[0].value.kind == MVal::Kind::Term && injection(m->name))
          return mt(m->args[0].value.term);
        bool showTy = tyargs && !m->tyargs.empty();
        if (m->args.empty() && !showTy) return sym(m->name);
        std::vector<SExpr> xs{sym(m->name)};
        if (showTy) {
          std::vector<SExpr> ts{sym(":")};
          for (const auto& t : m->tyargs) ts.push_back(type_sexpr(t));
          xs.push_back(lst(std::move(ts)));
        }
        for (const auto& a : m->args) {
          std::size_t n = stack.size();
          if (!a.binders.empty()) {
            std::vector<SExpr> bs;
            for (std::size_t i = 0; i < a.binders.size(); ++i) {
              stack.push_back(fresh());
              bs.push_back(sym(stack.back()));
            }
            xs.push_back(lst(std::move(bs)));
          }
          xs.push_back(val(a.value));
          stack.resize(n);
        }
        return lst(std::move(xs));
      }
      case MNode::Kind::Subst: {
        std::vector<SExpr> xs{sym("subst"), sym(m->name)};
        for (const auto& i : m->images) xs.push_back(mt(i));
        return lst(std::move(xs));
      }
      case MNode::Kind::Weaken: {
        auto saved = stack;
        if (m->binders.size() > stack.size()) throw Error(ErrorKind::Validation, "weakening beyond the named binders");
        stack.resize(stack.size() - m->binders.size());
        SExpr body = mt(m->body);
        stack = std::move(saved);
        return lst({sym("weaken"), types_sexpr(m->binders), body});
      }
      case MNode::Kind::Prim: {
        std::vector<SExpr> xs{sym("prim"), sym(m->name)};
        for (const auto& p : m->primArgs) xs.push_back(val(p));
        return lst(std::move(xs));
      }
    }
    return sym("?");
  }

  SExpr val(const MVal& v) {
    switch (v.kind) {
      case MVal::Kind::Term: return mt(v.term);
      case MVal::Kind::Const: return sym(v.label);
      case MVal::Kind::Prod: {
        std::vector<SExpr> xs{sym("tuple")};
        for (const auto& p : v.parts) xs.push_back(val(p));
        return lst(std::move(xs));
      }
      case MVal::Kind::Sum: return lst({sym("tag"), sym(v.label), val(v.parts[0])});
      case MVal::Kind::Bag: {
        std::vector<SExpr> xs{sym("bag")};
        for (const auto& p : v.parts) xs.push_back(val(p));
        if (!v.rest.empty()) xs.push_back(lst({sym("rest"), sym(v.rest)}));
        return lst(std::move(xs));
      }
    }
    return sym("?");
  }
};

Printer printer_for(const LanguageBundle& lang, const std::vector<MetaVarDecl>& decls) {
  Printer p{lang, reserved_names(lang), {}, 0, false, true};
  for (const auto& d : decls) p.taken.insert(d.name);
  return p;
}

// ---------------------------------------------------------------- bundle blocks

Universe read_universe(const SExpr& e, bool simple) {
  Universe u;
  u.simple = simple;
  for (std::size_t i = 1; i < e.items.size(); ++i) u.atoms.push_back(atom_of(e.items[i], "type name"));
  return u;
}

SExpr universe_sexpr(const Universe& u, const char* plain, const char* simple) {
  std::vector<SExpr> xs{sym(u.simple ? simple : plain)};
  for (const auto& a : u.atoms) xs.push_back(sym(a));
  return lst(std::move(xs));
}

std::pair<std::string, std::vector<std::string>> read_backend(const SExpr& e) {
  if (e.items.size() < 2) perr(e, "expected (backend NAME ARG...)");
  std::vector<std::string> args;
  for (std::size_t i = 2; i < e.items.size(); ++i) args.push_back(atom_of(e.items[i], "backend argument"));
  return {atom_of(e.items[1], "backend name"), std::move(args)};
}

SExpr backend_sexpr(const std::string& name, const std::vector<std::string>& args) {
  std::vector<SExpr> xs{sym("backend"), sym(name)};
  for (const auto& a : args) xs.push_back(sym(a));
  return lst(std::move(xs));
}

EquationSpec read_equation(const SExpr& e, const MonadSignature& sig, const StateSignature* s1,
                           const StateSignature* st) {
  if (!e.head("eq") || e.items.size() != 6) perr(e, "expected (eq NAME ((mv ...)...) TYPE LHS RHS)");
  EquationSpec eq;
  eq.name = atom_of(e.items[1], "equation name");
  eq.metaCtx = read_decls(e.items[2]);
  eq.outType = read_type(e.items[3]);
  for (int side = 0; side < 2; ++side) {
    Elab el{sig, s1, &eq.metaCtx};
    const SExpr& x = e.items[4 + side];
    MetaTerm t = st ? el.state(x, *st, eq.outType) : el.term(x, eq.outType);
    (side ? eq.rhs : eq.lhs) = el.zonk(x, t);
  }
  return eq;
}

SExpr equation_sexpr(const LanguageBundle& lang, const EquationSpec& eq) {
  Printer p = printer_for(lang, eq.metaCtx);
  return lst({sym("eq"), sym(eq.name), decls_sexpr(eq.metaCtx), type_sexpr(eq.outType), p.mt(eq.lhs), p.mt(eq.rhs)});
}

Judgement read_judgement(const SExpr& e, const LanguageBundle& lang, const RuleSpec& r) {
  if (e.items.size() != 4) perr(e, "expected (" + e.items[0].text + " TYPE SOURCE TARGET)");
  Judgement j;
  j.type = read_type(e.items[1]);
  Elab el{lang.monad.base, &lang.s1, &r.metaCtx};
  MetaTerm src = el.state(e.items[2], lang.s1, j.type);
  MetaTerm tgt = el.state(e.items[3], lang.s2, j.type);
  j.src = el.zonk(e.items[2], src);
  j.tgt = el.zonk(e.items[3], tgt);
  return j;
}

RuleSpec read_rule(const SExpr& e, const LanguageBundle& lang) {
  if (!e.head("rule") || e.items.size() < 5)
    perr(e, "expected (rule NAME (TYPARAM...) ((mv ...)...) (premise ...)... (conclude ...))");
  RuleSpec r;
  r.name = atom_of(e.items[1], "rule name");
  r.typeParams = read_atoms(e.items[2], "type parameters");
  r.metaCtx = read_decls(e.items[3]);
  for (std::size_t i = 4; i < e.items.size(); ++i) {
    const SExpr& x = e.items[i];
    bool last = i + 1 == e.items.size();
    if (last ? !x.head("conclude") : !x.head("premise"))
      perr(x, last ? "rule must end with (conclude ...)" : "expected (premise ...)");
    Judgement j = read_judgement(x, lang, r);
    if (last) {
      r.conclusion = j;
    } else {
      j.binders = infer_premise_binders(j.src, r.metaCtx);
      j.src = shift_bound(j.src, j.binders.size());
      j.tgt = shift_bound(j.tgt, j.binders.size());
      r.premises.push_back(j);
    }
  }
  return r;
}

SExpr rule_sexpr(const LanguageBundle& lang, const RuleSpec& r) {
  std::vector<SExpr> xs{sym("rule"), sym(r.name), atoms_sexpr(r.typeParams), decls_sexpr(r.metaCtx)};
  Printer p = printer_for(lang, r.metaCtx);
  for (const auto& pr : r.premises) {
    p.offset = pr.binders.size();
    xs.push_back(lst({sym("premise"), type_sexpr(pr.type), p.mt(pr.src), p.mt(pr.tgt)}));
  }
  p.offset = 0;
  xs.push_back(lst({sym("conclude"), type_sexpr(r.conclusion.type), p.mt(r.conclusion.src), p.mt(r.conclusion.tgt)}));
  return lst(std::move(xs));
}

SExpr state_sexpr(const LanguageBundle& lang, const StateSignature& st, const char* which) {
  if (st.identity) return lst({sym("state-functor"), sym(which), sym("identity")});
  std::vector<SExpr> ops{sym("ops")};
  for (const auto& o : st.ops) ops.push_back(scheme_sexpr(o, true));
  std::vector<SExpr> xs{sym("state-functor"), sym(which), lst(std::move(ops))};
  if (!st.equations.empty()) {
    std::vector<SExpr> eqs{sym("eqs")};
    for (const auto& eq : st.equations) eqs.push_back(equation_sexpr(lang, eq));
    xs.push_back(lst(std::move(eqs)));
  }
  if (st.backend != "identity" || !st.backendArgs.empty()) xs.push_back(backend_sexpr(st.backend, st.backendArgs));
  return lst(std::move(xs));
}

// rethrows validation failures located at the offending declaration
[[noreturn]] void relocate(const Error& e, const std::map<std::string, std::string>& where) {
  std::string msg = e.what();
  for (const char* prefix : {"rule ", "equation ", "state equation "}) {
    std::string p = prefix;
    if (msg.compare(0, p.size(), p) != 0) continue;
    auto colon = msg.find(':', p.size());
    if (colon == std::string::npos) continue;
    auto it = where.find(p + msg.substr(p.size(), colon - p.size()));
    if (it != where.end()) throw Error(e.kind(), it->second + ": " + msg);
  }
  throw Error(e.kind(), msg);
}

}  // namespace

// ---------------------------------------------------------------- public

LanguageBundle bundle_from_sexpr(const SExpr& doc) {
  if (!doc.head("language") || doc.items.size() < 2) perr(doc, "expected (language NAME BLOCK...)");
  LanguageBundle lang;
  lang.name = atom_of(doc.items[1], "language name");
  std::vector<const SExpr*> eqBlocks, ruleBlocks;
  std::vector<std::pair<StateSignature*, const SExpr*>> stateEqs;
  bool haveP = false, haveS = false, haveS1 = false, haveS2 = false;
  Universe trans;
  for (std::size_t i = 2; i < doc.items.size(); ++i) {
    const SExpr& b = doc.items[i];
    if (b.atom || b.items.empty() || !b.items[0].atom) perr(b, "expected a block");
    const std::string& h = b.items[0].text;
    if (h == "placetaker-types" || h == "simple-types") {
      lang.monad.base.universe = read_universe(b, h == "simple-types");
      haveP = true;
    } else if (h == "transition-types" || h == "transition-simple-types") {
      trans = read_universe(b, h == "transition-simple-types");
      haveS = true;
    } else if (h == "operations") {
      lang.monad.base.ops = read_schemes(b);
    } else if (h == "equations") {
      eqBlocks.push_back(&b);
    } else if (h == "backend") {
      std::tie(lang.backend, lang.backendArgs) = read_backend(b);
    } else if (h == "state-functor") {
      if (b.items.size() < 3) perr(b, "expected (state-functor S1|S2 ...)");
      const std::string& which = atom_of(b.items[1], "S1 or S2");
      if (which != "S1" && which != "S2") perr(b.items[1], "expected S1 or S2");
      StateSignature& st = which == "S1" ? lang.s1 : lang.s2;
      (which == "S1" ? haveS1 : haveS2) = true;
      if (b.items.size() == 3 && b.items[2].is("identity")) {
        st.identity = true;
        continue;
      }
      for (std::size_t k = 2; k < b.items.size(); ++k) {
        const SExpr& part = b.items[k];
        if (part.head("ops")) {
          st.ops = read_schemes(part);
        } else if (part.head("eqs")) {
          stateEqs.emplace_back(&st, &part);
        } else if (part.head("backend")) {
          std::tie(st.backend, st.backendArgs) = read_backend(part);
        } else {
          perr(part, "expected (ops ...), (eqs ...) or (backend ...)");
        }
      }
    } else if (h == "rules") {
      ruleBlocks.push_back(&b);
    } else {
      perr(b, "unknown block " + h);
    }
  }
  if (!haveP) perr(doc, "missing (placetaker-types ...)");
  if (!haveS) perr(doc, "missing (transition-types ...)");
  if (!haveS1 || !haveS2) perr(doc, "both state functors S1 and S2 must be declared");
  lang.s1.universe = trans;
  lang.s2.universe = trans;

  std::map<std::string, std::string> where;
  for (const auto* b : eqBlocks)
    for (std::size_t i = 1; i < b->items.size(); ++i) {
      lang.monad.equations.push_back(read_equation(b->items[i], lang.monad.base, &lang.s1, nullptr));
      where["equation " + lang.monad.equations.back().name] = b->items[i].where();
    }
  for (auto& [st, b] : stateEqs)
    for (std::size_t i = 1; i < b->items.size(); ++i) {
      st->equations.push_back(read_equation(b->items[i], lang.monad.base, &lang.s1, st));
      where["state equation " + st->equations.back().name] = b->items[i].where();
    }
  for (const auto* b : ruleBlocks)
    for (std::size_t i = 1; i < b->items.size(); ++i) {
      lang.rules.push_back(read_rule(b->items[i], lang));
      where["rule " + lang.rules.back().name] = b->items[i].where();
    }
  try {
    validate_bundle(lang);
  } catch (const Error& e) {
    relocate(e, where);
  }
  return lang;
}

LanguageBundle parse_spec(const std::string& text) {
  auto docs = read_sexprs(text);
  if (docs.size() != 1) throw Error(ErrorKind::Parse, "a spec file holds exactly one (language ...) form");
  return bundle_from_sexpr(docs[0]);
}

SExpr spec_sexpr(const LanguageBundle& lang) {
  std::vector<SExpr> xs{sym("language"), sym(lang.name)};
  xs.push_back(universe_sexpr(lang.monad.base.universe, "placetaker-types", "simple-types"));
  xs.push_back(universe_sexpr(lang.s1.universe, "transition-types", "transition-simple-types"));
  std::vector<SExpr> ops{sym("operations")};
  for (const auto& o : lang.monad.base.ops) ops.push_back(scheme_sexpr(o, false));
  xs.push_back(lst(std::move(ops)));
  if (!lang.monad.equations.empty()) {
    std::vector<SExpr> eqs{sym("equations")};
    for (const auto& eq : lang.monad.equations) eqs.push_back(equation_sexpr(lang, eq));
    xs.push_back(lst(std::move(eqs)));
  }
  if (lang.backend != "identity" || !lang.backendArgs.empty()) xs.push_back(backend_sexpr(lang.backend, lang.backendArgs));
  xs.push_back(state_sexpr(lang, lang.s1, "S1"));
  xs.push_back(state_sexpr(lang, lang.s2, "S2"));
  std::vector<SExpr> rules{sym("rules")};
  for (const auto& r : lang.rules) rules.push_back(rule_sexpr(lang, r));
  xs.push_back(lst(std::move(rules)));
  return lst(std::move(xs));
}

std::string print_spec(const LanguageBundle& lang) { return layout(spec_sexpr(lang)) + "\n"; }

Document parse_document(const std::string& text) {
  auto docs = read_sexprs(text);
  if (docs.size() != 1) throw Error(ErrorKind::Parse, "expected exactly one top-level form");
  Document d;
  if (docs[0].head("gsos-system")) {
    d.gsos = parse_gsos(docs[0]);
    d.lang = compile_gsos(*d.gsos);
  } else {
    d.lang = bundle_from_sexpr(docs[0]);
  }
  return d;
}

std::string print_document(const Document& doc) {
  return (doc.gsos ? layout(gsos_sexpr(*doc.gsos)) : layout(spec_sexpr(doc.lang))) + "\n";
}

std::string layout(const SExpr& e, std::size_t width) {
  std::string out;
  std::function<void(const SExpr&, std::size_t)> go = [&](const SExpr& x, std::size_t indent) {
    std::string flat = write_flat(x);
    if (x.atom || x.items.size() < 2 || indent + flat.size() <= width) {
      out += flat;
      return;
    }
    out += "(" + write_flat(x.items[0]);
    std::size_t i = 1;
    // short atoms stay on the head line
    while (i < x.items.size() && x.items[i].atom) out += " " + x.items[i++].text;
    for (; i < x.items.size(); ++i) {
      out += "\n" + std::string(indent + 2, ' ');
      go(x.items[i], indent + 2);
    }
    out += ")";
  };
  go(e, 0);
  return out;
}

// ---------------------------------------------------------------- named terms

NamedContext parse_named_context(const SExpr& e) {
  NamedContext ctx;
  for (const auto& x : list_of(e, "(NAME TYPE) entries")) {
    if (x.atom || x.items.size() != 2) perr(x, "expected (NAME TYPE)");
    ctx.names.push_back(atom_of(x.items[0], "variable name"));
    ctx.types.push_back(read_type(x.items[1]));
  }
  return ctx;
}

SExpr named_context_sexpr(const NamedContext& ctx) {
  std::vector<SExpr> xs;
  for (std::size_t i = 0; i < ctx.names.size(); ++i) xs.push_back(lst({sym(ctx.names[i]), type_sexpr(ctx.types[i])}));
  return lst(std::move(xs));
}

Term parse_named(const LanguageBundle& lang, const SExpr& e, Expect what, const std::optional<Type>& type,
                 NamedContext& ctx) {
  Elab el{lang.monad.base, &lang.s1, nullptr, &ctx};
  const Universe& uni = what == Expect::Term ? lang.monad.base.universe : lang.s1.universe;
  if (!lang.monad.base.universe.atoms.empty()) el.fallback = Type::atom(lang.monad.base.universe.atoms[0]);
  Type ty = type ? *type : el.u.fresh();
  (void)uni;
  MetaTerm mt = what == Expect::Term ? el.term(e, ty) : el.state(e, what == Expect::S1 ? lang.s1 : lang.s2, ty);
  mt = el.zonk(e, mt);
  for (auto& t : ctx.types) t = el.finish(e, t);
  Assignment asg;
  for (std::size_t i = 0; i < ctx.names.size(); ++i) asg.values[ctx.names[i]] = Val::of(make_var(i));
  Term t = canonicalize(eval_metaterm(mt, asg, EvalScope{ctx.types.size(), ctx.types, nullptr}));
  try {
    if (what == Expect::Term) {
      typecheck_term(lang.monad.base, ctx.types, t);
    } else {
      typecheck_state(lang.monad.base, what == Expect::S1 ? lang.s1 : lang.s2, ctx.types, t);
    }
  } catch (const Error& err) {
    throw Error(err.kind(), e.where() + ": " + err.what());
  }
  return t;
}

Term parse_any(const LanguageBundle& lang, const std::string& text, Expect what, const std::optional<Type>& type,
               NamedContext& ctx) {
  SExpr e = read_sexpr(text);
  bool canonical = false;
  for (const char* h : {"op", "var", "state"})
    if (e.head(h) && !find_op(lang.monad.base.ops, h) && !find_op(lang.s1.ops, h) && !find_op(lang.s2.ops, h))
      canonical = true;
  if (!canonical) return parse_named(lang, e, what, type, ctx);
  Term t = parse_term(e);
  Type got = what == Expect::Term ? typecheck_term(lang.monad.base, ctx.types, t)
                                  : typecheck_state(lang.monad.base, what == Expect::S1 ? lang.s1 : lang.s2, ctx.types, t);
  if (type && !(got == *type)) throw Error(ErrorKind::Type, "term has type " + got.str() + ", expected " + type->str());
  return canonicalize(t);
}

namespace {

MetaTerm to_meta(const Term& t, std::size_t gamma, const std::vector<std::string>& names);

MVal to_meta(const Val& v, std::size_t gamma, const std::vector<std::string>& names) {
  switch (v.kind) {
    case Val::Kind::Term: return MVal::of(to_meta(v.term, gamma, names));
    case Val::Kind::Const: return MVal::constant(v.label);
    case Val::Kind::Sum: return MVal::sum(v.label, to_meta(v.parts[0], gamma, names));
    case Val::Kind::Prod:
    case Val::Kind::Bag: {
      std::vector<MVal> ps;
      for (const auto& p : v.parts) ps.push_back(to_meta(p, gamma, names));
      return v.kind == Val::Kind::Prod ? MVal::prod(std::move(ps)) : MVal::bag(std::move(ps));
    }
  }
  return {};
}

MetaTerm to_meta(const Term& t, std::size_t gamma, const std::vector<std::string>& names) {
  if (t->kind == Node::Kind::Var) {
    if (t->index < gamma) return mvar(t->index < names.size() ? names[t->index] : "v" + std::to_string(t->index));
    return mindex(t->index - gamma);
  }
  std::vector<MArg> args;
  for (const auto& a : t->args) args.push_back(MArg{a.binders, to_meta(a.value, gamma, names)});
  return t->kind == Node::Kind::Op ? mop(t->op, t->tyargs, std::move(args)) : mstate(t->op, t->tyargs, std::move(args));
}

}  // namespace

SExpr named_sexpr(const LanguageBundle& lang, const NamedContext& ctx, const Term& t, bool elide) {
  Printer p{lang, reserved_names(lang), {}, 0, elide, !elide};
  p.taken.insert(ctx.names.begin(), ctx.names.end());
  return p.mt(to_meta(t, ctx.types.size(), ctx.names));
}

std::string named_str(const LanguageBundle& lang, const NamedContext& ctx, const Term& t, bool elide) {
  return write_flat(named_sexpr(lang, ctx, t, elide));
}

}  // namespace tmonad
