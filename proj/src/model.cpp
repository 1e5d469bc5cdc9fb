#include "tmonad/model.hpp"

#include <algorithm>
#include <functional>

namespace tmonad {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Scope: return "ScopeError";
    case ErrorKind::Type: return "TypeError";
    case ErrorKind::Arity: return "ArityError";
    case ErrorKind::UnknownOperation: return "UnknownOperation";
    case ErrorKind::UnboundMetavariable: return "UnboundMetavariable";
    case ErrorKind::NotEnumerable: return "NotEnumerable";
    case ErrorKind::InvalidProof: return "InvalidProof";
    case ErrorKind::IllModedRule: return "IllModedRule";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::UnknownLanguage: return "UnknownLanguage";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& msg)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

// ---------------------------------------------------------------- types

Type Type::atom(std::string name) {
  Type t;
  t.name_ = std::move(name);
  return t;
}

Type Type::arrow(Type dom, Type cod) {
  Type t;
  t.name_ = "->";
  t.kids_ = {std::move(dom), std::move(cod)};
  return t;
}

std::string Type::str() const {
  if (!is_arrow()) return name_;
  return "(-> " + dom().str() + " " + cod().str() + ")";
}

int compare(const Type& a, const Type& b) {
  if (a.is_arrow() != b.is_arrow()) return a.is_arrow() ? 1 : -1;
  if (!a.is_arrow()) return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
  int c = compare(a.dom(), b.dom());
  return c != 0 ? c : compare(a.cod(), b.cod());
}

bool Type::operator<(const Type& o) const { return compare(*this, o) < 0; }

Type instantiate(const Type& t, const TypeMap& m) {
  if (t.is_arrow()) return Type::arrow(instantiate(t.dom(), m), instantiate(t.cod(), m));
  auto it = m.find(t.name());
  return it == m.end() ? t : it->second;
}

std::vector<Type> instantiate(const std::vector<Type>& ts, const TypeMap& m) {
  std::vector<Type> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(instantiate(t, m));
  return out;
}

bool match_type(const Type& pat, const Type& t, const std::set<std::string>& params, TypeMap& asg) {
  if (!pat.is_arrow() && params.count(pat.name())) {
    auto it = asg.find(pat.name());
    if (it == asg.end()) {
      asg.emplace(pat.name(), t);
      return true;
    }
    return it->second == t;
  }
  if (pat.is_arrow() != t.is_arrow()) return false;
  if (!pat.is_arrow()) return pat.name() == t.name();
  return match_type(pat.dom(), t.dom(), params, asg) && match_type(pat.cod(), t.cod(), params, asg);
}

bool Universe::contains(const Type& t) const {
  if (t.is_arrow()) return simple && contains(t.dom()) && contains(t.cod());
  return std::find(atoms.begin(), atoms.end(), t.name()) != atoms.end();
}

std::vector<Type> Universe::default_candidates() const {
  std::vector<Type> out;
  for (const auto& a : atoms) out.push_back(Type::atom(a));
  if (simple) {
    for (const auto& a : atoms)
      for (const auto& b : atoms) out.push_back(Type::arrow(Type::atom(a), Type::atom(b)));
  }
  return out;
}

// ---------------------------------------------------------------- shapes

Shape Shape::term(Type t) {
  Shape s;
  s.kind = Kind::Term;
  s.type = std::move(t);
  return s;
}
Shape Shape::rec(Type t) {
  Shape s;
  s.kind = Kind::Rec;
  s.type = std::move(t);
  return s;
}
Shape Shape::embed(Type t) {
  Shape s;
  s.kind = Kind::Embed;
  s.type = std::move(t);
  return s;
}
Shape Shape::constant(std::vector<std::string> labels) {
  Shape s;
  s.kind = Kind::Const;
  s.labels = std::move(labels);
  return s;
}
Shape Shape::prod(std::vector<Shape> parts) {
  Shape s;
  s.kind = Kind::Prod;
  s.parts = std::move(parts);
  return s;
}
Shape Shape::sum(std::vector<std::string> tags, std::vector<Shape> alts) {
  Shape s;
  s.kind = Kind::Sum;
  s.labels = std::move(tags);
  s.parts = std::move(alts);
  return s;
}
Shape Shape::bag(Shape elem) {
  Shape s;
  s.kind = Kind::Bag;
  s.parts = {std::move(elem)};
  return s;
}

Shape instantiate(const Shape& s, const TypeMap& m) {
  Shape out = s;
  if (!s.type.empty()) out.type = instantiate(s.type, m);
  for (auto& p : out.parts) p = instantiate(p, m);
  return out;
}

const OperationScheme* find_op(const std::vector<OperationScheme>& ops, const std::string& name) {
  for (const auto& op : ops)
    if (op.name == name) return &op;
  return nullptr;
}

// ---------------------------------------------------------------- terms

Val Val::of(Term t) {
  Val v;
  v.kind = Kind::Term;
  v.term = std::move(t);
  return v;
}
Val Val::constant(std::string label) {
  Val v;
  v.kind = Kind::Const;
  v.label = std::move(label);
  return v;
}
Val Val::prod(std::vector<Val> parts) {
  Val v;
  v.kind = Kind::Prod;
  v.parts = std::move(parts);
  return v;
}
Val Val::sum(std::string tag, Val inner) {
  Val v;
  v.kind = Kind::Sum;
  v.label = std::move(tag);
  v.parts = {std::move(inner)};
  return v;
}
Val Val::bag(std::vector<Val> elems) {
  Val v;
  v.kind = Kind::Bag;
  std::sort(elems.begin(), elems.end(), [](const Val& a, const Val& b) { return compare(a, b) < 0; });
  v.parts = std::move(elems);
  return v;
}

namespace {

inline void mix(std::size_t& h, std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }

std::size_t hash_type(const Type& t) {
  std::size_t h = std::hash<std::string>{}(t.name());
  if (t.is_arrow()) {
    mix(h, hash_type(t.dom()));
    mix(h, hash_type(t.cod()));
  }
  return h;
}

std::size_t hash_val(const Val& v) {
  std::size_t h = static_cast<std::size_t>(v.kind) + 17;
  switch (v.kind) {
    case Val::Kind::Term: mix(h, v.term->hash); break;
    case Val::Kind::Const: mix(h, std::hash<std::string>{}(v.label)); break;
    case Val::Kind::Sum: mix(h, std::hash<std::string>{}(v.label)); [[fallthrough]];
    case Val::Kind::Prod:
    case Val::Kind::Bag:
      for (const auto& p : v.parts) mix(h, hash_val(p));
      break;
  }
  return h;
}

std::size_t depth_val(const Val& v) {
  if (v.kind == Val::Kind::Term) return v.term->depth;
  std::size_t d = 0;
  for (const auto& p : v.parts) d = std::max(d, depth_val(p));
  return d;
}

int cmp_str(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

template <class T, class F>
int cmp_seq(const std::vector<T>& a, const std::vector<T>& b, F f) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = f(a[i], b[i]);
    if (c != 0) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

}  // namespace

Term make_var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Var;
  n->index = index;
  n->hash = index * 0x100000001b3ULL + 7;
  n->depth = 0;
  return n;
}

Term make_node(Node::Kind kind, std::string op, std::vector<Type> tyargs, std::vector<Arg> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->op = std::move(op);
  n->tyargs = std::move(tyargs);
  n->args = std::move(args);
  std::size_t h = std::hash<std::string>{}(n->op) + (kind == Node::Kind::State ? 31 : 0);
  for (const auto& t : n->tyargs) mix(h, hash_type(t));
  std::size_t d = 0;
  for (const auto& a : n->args) {
    for (const auto& b : a.binders) mix(h, hash_type(b));
    mix(h, hash_val(a.value));
    d = std::max(d, depth_val(a.value));
  }
  n->hash = h;
  n->depth = d + 1;
  return n;
}

int compare(const Val& a, const Val& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case Val::Kind::Term: return compare(a.term, b.term);
    case Val::Kind::Const: return cmp_str(a.label, b.label);
    case Val::Kind::Sum: {
      int c = cmp_str(a.label, b.label);
      if (c != 0) return c;
      return compare(a.parts[0], b.parts[0]);
    }
    case Val::Kind::Prod:
    case Val::Kind::Bag: return cmp_seq(a.parts, b.parts, [](const Val& x, const Val& y) { return compare(x, y); });
  }
  return 0;
}

int compare(const Term& a, const Term& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->kind == Node::Kind::Var) return a->index < b->index ? -1 : (a->index > b->index ? 1 : 0);
  int c = cmp_str(a->op, b->op);
  if (c != 0) return c;
  c = cmp_seq(a->tyargs, b->tyargs, [](const Type& x, const Type& y) { return compare(x, y); });
  if (c != 0) return c;
  return cmp_seq(a->args, b->args, [](const Arg& x, const Arg& y) {
    int d = cmp_seq(x.binders, y.binders, [](const Type& p, const Type& q) { return compare(p, q); });
    return d != 0 ? d : compare(x.value, y.value);
  });
}

bool same(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  return a->hash == b->hash && compare(a, b) == 0;
}

bool same(const Val& a, const Val& b) { return compare(a, b) == 0; }

// ---------------------------------------------------------------- metaterms

MVal MVal::of(MetaTerm t) {
  MVal v;
  v.kind = Kind::Term;
  v.term = std::move(t);
  return v;
}
MVal MVal::constant(std::string label) {
  MVal v;
  v.kind = Kind::Const;
  v.label = std::move(label);
  return v;
}
MVal MVal::prod(std::vector<MVal> parts) {
  MVal v;
  v.kind = Kind::Prod;
  v.parts = std::move(parts);
  return v;
}
MVal MVal::sum(std::string tag, MVal inner) {
  MVal v;
  v.kind = Kind::Sum;
  v.label = std::move(tag);
  v.parts = {std::move(inner)};
  return v;
}
MVal MVal::bag(std::vector<MVal> elems, std::string rest) {
  MVal v;
  v.kind = Kind::Bag;
  v.parts = std::move(elems);
  v.rest = std::move(rest);
  return v;
}

MetaTerm mvar(std::string name) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::MVar;
  n->name = std::move(name);
  return n;
}
MetaTerm mindex(std::size_t index) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::Var;
  n->index = index;
  return n;
}
MetaTerm mop(std::string name, std::vector<Type> tyargs, std::vector<MArg> args) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::Op;
  n->name = std::move(name);
  n->tyargs = std::move(tyargs);
  n->args = std::move(args);
  return n;
}
MetaTerm mstate(std::string name, std::vector<Type> tyargs, std::vector<MArg> args) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::State;
  n->name = std::move(name);
  n->tyargs = std::move(tyargs);
  n->args = std::move(args);
  return n;
}
MetaTerm msubst(std::string name, std::vector<MetaTerm> images) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::Subst;
  n->name = std::move(name);
  n->images = std::move(images);
  return n;
}
MetaTerm mweaken(std::vector<Type> binders, MetaTerm body) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::Weaken;
  n->binders = std::move(binders);
  n->body = std::move(body);
  return n;
}
MetaTerm mprim(std::string name, std::vector<MVal> args) {
  auto n = std::make_shared<MNode>();
  n->kind = MNode::Kind::Prim;
  n->name = std::move(name);
  n->primArgs = std::move(args);
  return n;
}

bool same(const MVal& a, const MVal& b) {
  if (a.kind != b.kind || a.label != b.label || a.rest != b.rest || a.parts.size() != b.parts.size()) return false;
  if (a.kind == MVal::Kind::Term && !same(a.term, b.term)) return false;
  for (std::size_t i = 0; i < a.parts.size(); ++i)
    if (!same(a.parts[i], b.parts[i])) return false;
  return true;
}

bool same(const MetaTerm& a, const MetaTerm& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name || a->index != b->index || a->tyargs != b->tyargs ||
      a->binders != b->binders || a->args.size() != b->args.size() || a->images.size() != b->images.size() ||
      a->primArgs.size() != b->primArgs.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (a->args[i].binders != b->args[i].binders || !same(a->args[i].value, b->args[i].value)) return false;
  for (std::size_t i = 0; i < a->images.size(); ++i)
    if (!same(a->images[i], b->images[i])) return false;
  for (std::size_t i = 0; i < a->primArgs.size(); ++i)
    if (!same(a->primArgs[i], b->primArgs[i])) return false;
  if (static_cast<bool>(a->body) != static_cast<bool>(b->body)) return false;
  return !a->body || same(a->body, b->body);
}

const MetaVarDecl* find_decl(const std::vector<MetaVarDecl>& ctx, const std::string& name) {
  for (const auto& d : ctx)
    if (d.name == name) return &d;
  return nullptr;
}

bool EquationSpec::operator==(const EquationSpec& o) const {
  return name == o.name && metaCtx == o.metaCtx && outType == o.outType && same(lhs, o.lhs) && same(rhs, o.rhs);
}

bool MonadSignature::operator==(const MonadSignature& o) const {
  if (!(universe == o.universe && ops == o.ops)) return false;
  if (static_cast<bool>(embedded) != static_cast<bool>(o.embedded)) return false;
  return !embedded || *embedded == *o.embedded;
}

bool Judgement::operator==(const Judgement& o) const {
  return type == o.type && binders == o.binders && same(src, o.src) && same(tgt, o.tgt);
}

}  // namespace tmonad
