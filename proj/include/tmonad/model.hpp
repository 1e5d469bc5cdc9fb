#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmonad {

enum class ErrorKind {
  Scope,
  Type,
  Arity,
  UnknownOperation,
  UnboundMetavariable,
  NotEnumerable,
  InvalidProof,
  IllModedRule,
  UnknownLabel,
  UnknownLanguage,
  Parse,
  Validation,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------- types

class Type {
 public:
  Type() = default;
  static Type atom(std::string name);
  static Type arrow(Type dom, Type cod);

  bool empty() const { return name_.empty(); }
  bool is_arrow() const { return !kids_.empty(); }
  const std::string& name() const { return name_; }
  const Type& dom() const { return kids_[0]; }
  const Type& cod() const { return kids_[1]; }
  std::string str() const;

  bool operator==(const Type& o) const { return name_ == o.name_ && kids_ == o.kids_; }
  bool operator<(const Type& o) const;

 private:
  std::string name_;
  std::vector<Type> kids_;
};

int compare(const Type& a, const Type& b);

using Context = std::vector<Type>;
using TypeMap = std::map<std::string, Type>;

Type instantiate(const Type& t, const TypeMap& m);
std::vector<Type> instantiate(const std::vector<Type>& ts, const TypeMap& m);
// one-sided: atoms of pat named in params are bound, t is concrete
bool match_type(const Type& pat, const Type& t, const std::set<std::string>& params, TypeMap& asg);

struct Universe {
  std::vector<std::string> atoms;
  bool simple = false;  // closure under arrow

  bool contains(const Type& t) const;
  std::vector<Type> default_candidates() const;
  bool operator==(const Universe&) const = default;
};

// ---------------------------------------------------------------- shapes

struct Shape {
  // Term: a monad term of `type`; in state ops this is the input facet.
  // Rec: a state of the enclosing state signature; Embed: a state of S1
  // occurring inside a monad operation.
  enum class Kind { Term, Rec, Embed, Const, Prod, Sum, Bag };

  Kind kind = Kind::Term;
  Type type;
  std::vector<std::string> labels;  // Const labels, Sum tags
  std::vector<Shape> parts;

  static Shape term(Type t);
  static Shape rec(Type t);
  static Shape embed(Type t);
  static Shape constant(std::vector<std::string> labels);
  static Shape prod(std::vector<Shape> parts);
  static Shape sum(std::vector<std::string> tags, std::vector<Shape> alts);
  static Shape bag(Shape elem);

  bool operator==(const Shape& o) const {
    return kind == o.kind && type == o.type && labels == o.labels && parts == o.parts;
  }
};

Shape instantiate(const Shape& s, const TypeMap& m);

struct ArgSpec {
  std::vector<Type> binders;
  Shape shape;
  bool operator==(const ArgSpec&) const = default;
};

struct OperationScheme {
  std::string name;
  std::vector<std::string> typeParams;
  std::vector<ArgSpec> args;
  Type output;
  bool operator==(const OperationScheme&) const = default;
};

const OperationScheme* find_op(const std::vector<OperationScheme>& ops, const std::string& name);

// ---------------------------------------------------------------- terms

struct Node;
using Term = std::shared_ptr<const Node>;

struct Val {
  enum class Kind { Term, Const, Prod, Sum, Bag };
  Kind kind = Kind::Term;
  Term term;
  std::string label;  // Const label, Sum tag
  std::vector<Val> parts;

  static Val of(Term t);
  static Val constant(std::string label);
  static Val prod(std::vector<Val> parts);
  static Val sum(std::string tag, Val v);
  static Val bag(std::vector<Val> elems);  // sorts into canonical order
};

struct Arg {
  std::vector<Type> binders;
  Val value;
};

// Terms and states share one immutable tree type. Variables are positions in
// the governing context (innermost binder last).
struct Node {
  enum class Kind { Var, Op, State };
  Kind kind = Kind::Var;
  std::size_t index = 0;
  std::string op;
  std::vector<Type> tyargs;
  std::vector<Arg> args;
  std::size_t hash = 0;
  std::size_t depth = 0;
};

Term make_var(std::size_t index);
Term make_node(Node::Kind kind, std::string op, std::vector<Type> tyargs, std::vector<Arg> args);

int compare(const Term& a, const Term& b);
int compare(const Val& a, const Val& b);
bool same(const Term& a, const Term& b);
bool same(const Val& a, const Val& b);

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare(a, b) < 0; }
};
struct TermHash {
  std::size_t operator()(const Term& t) const { return t->hash; }
};
struct TermEq {
  bool operator()(const Term& a, const Term& b) const { return same(a, b); }
};

// ---------------------------------------------------------------- metaterms

struct MNode;
using MetaTerm = std::shared_ptr<const MNode>;

struct MVal {
  enum class Kind { Term, Const, Prod, Sum, Bag };
  Kind kind = Kind::Term;
  MetaTerm term;
  std::string label;
  std::vector<MVal> parts;
  std::string rest;  // Bag only: metavariable for the remaining elements

  static MVal of(MetaTerm t);
  static MVal constant(std::string label);
  static MVal prod(std::vector<MVal> parts);
  static MVal sum(std::string tag, MVal v);
  static MVal bag(std::vector<MVal> elems, std::string rest = {});
};

struct MArg {
  std::vector<Type> binders;
  MVal value;
};

struct MNode {
  enum class Kind { MVar, Var, Op, State, Subst, Weaken, Prim };
  Kind kind = Kind::MVar;
  std::string name;  // metavariable, operation, or primitive name
  std::size_t index = 0;
  std::vector<Type> tyargs;
  std::vector<MArg> args;
  std::vector<MetaTerm> images;  // Subst
  std::vector<Type> binders;     // Weaken
  MetaTerm body;                 // Weaken
  std::vector<MVal> primArgs;    // Prim
};

MetaTerm mvar(std::string name);
MetaTerm mindex(std::size_t index);
MetaTerm mop(std::string name, std::vector<Type> tyargs, std::vector<MArg> args);
MetaTerm mstate(std::string name, std::vector<Type> tyargs, std::vector<MArg> args);
MetaTerm msubst(std::string name, std::vector<MetaTerm> images);
MetaTerm mweaken(std::vector<Type> binders, MetaTerm body);
MetaTerm mprim(std::string name, std::vector<MVal> args);

bool same(const MetaTerm& a, const MetaTerm& b);
bool same(const MVal& a, const MVal& b);

struct MetaVarDecl {
  enum class Sort { Term, State1, State2, Shape };
  std::string name;
  Sort sort = Sort::Term;
  std::vector<Type> binders;
  Type type;    // Term, State1, State2
  Shape shape;  // Shape
  bool operator==(const MetaVarDecl&) const = default;
};

const MetaVarDecl* find_decl(const std::vector<MetaVarDecl>& ctx, const std::string& name);

// ---------------------------------------------------------------- signatures

struct EquationSpec {
  std::string name;
  std::vector<MetaVarDecl> metaCtx;
  Type outType;
  MetaTerm lhs, rhs;
  bool operator==(const EquationSpec& o) const;
};

struct StateSignature {
  Universe universe;
  bool identity = false;  // states are monad terms
  std::vector<OperationScheme> ops;
  std::vector<EquationSpec> equations;
  std::string backend = "identity";
  std::vector<std::string> backendArgs;
  bool operator==(const StateSignature&) const = default;
};

struct MonadSignature {
  Universe universe;
  std::vector<OperationScheme> ops;
  std::shared_ptr<const StateSignature> embedded;  // S1, for Embed shapes
  bool operator==(const MonadSignature& o) const;
};

struct EquationalSignature {
  MonadSignature base;
  std::vector<EquationSpec> equations;
  bool operator==(const EquationalSignature&) const = default;
};

struct Judgement {
  Type type;                   // transition type
  std::vector<Type> binders;   // premise context extension
  MetaTerm src, tgt;
  bool operator==(const Judgement& o) const;
};

struct RuleSpec {
  std::string name;
  std::vector<std::string> typeParams;
  std::vector<MetaVarDecl> metaCtx;
  std::vector<Judgement> premises;
  Judgement conclusion;
  bool operator==(const RuleSpec&) const = default;
};

struct LanguageBundle {
  std::string name;
  EquationalSignature monad;
  StateSignature s1, s2;
  std::vector<RuleSpec> rules;
  std::string backend = "identity";
  std::vector<std::string> backendArgs;
  bool operator==(const LanguageBundle&) const = default;
};

}  // namespace tmonad
