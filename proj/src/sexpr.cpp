#include "tmonad/sexpr.hpp"

#include <cctype>

namespace tmonad {

SExpr SExpr::sym(std::string s) {
  SExpr e;
  e.atom = true;
  e.text = std::move(s);
  return e;
}

SExpr SExpr::list(std::vector<SExpr> items) {
  SExpr e;
  e.items = std::move(items);
  return e;
}

std::string SExpr::where() const { return std::to_string(line) + ":" + std::to_string(col); }

namespace {

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  int line = 1, col = 1;

  void advance() {
    if (s[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip() {
    while (pos < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[pos]))) {
        advance();
      } else if (s[pos] == ';') {
        while (pos < s.size() && s[pos] != '\n') advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw Error(ErrorKind::Parse, std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  SExpr datum() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    SExpr e;
    e.line = line;
    e.col = col;
    if (s[pos] == '(') {
      advance();
      for (;;) {
        skip();
        if (pos >= s.size()) fail("unclosed '(' opened at " + e.where());
        if (s[pos] == ')') {
          advance();
          break;
        }
        e.items.push_back(datum());
      }
      return e;
    }
    if (s[pos] == ')') fail("unexpected ')'");
    e.atom = true;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' && s[pos] != ')' &&
           s[pos] != ';') {
      e.text.push_back(s[pos]);
      advance();
    }
    return e;
  }
};

[[noreturn]] void bad(const SExpr& e, const std::string& msg) {
  throw Error(ErrorKind::Parse, e.where() + ": " + msg + " in " + write_flat(e));
}

std::size_t parse_index(const SExpr& e) {
  if (!e.atom || e.text.empty()) bad(e, "expected index");
  for (char c : e.text)
    if (!std::isdigit(static_cast<unsigned char>(c))) bad(e, "expected index");
  return std::stoul(e.text);
}

}  // namespace

std::vector<SExpr> read_sexprs(const std::string& text) {
  Reader r{text};
  std::vector<SExpr> out;
  for (;;) {
    r.skip();
    if (r.pos >= text.size()) break;
    out.push_back(r.datum());
  }
  return out;
}

SExpr read_sexpr(const std::string& text) {
  auto all = read_sexprs(text);
  if (all.size() != 1) throw Error(ErrorKind::Parse, "expected exactly one s-expression, got " + std::to_string(all.size()));
  return all[0];
}

std::string write_flat(const SExpr& e) {
  if (e.atom) return e.text;
  std::string out = "(";
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) out += ' ';
    out += write_flat(e.items[i]);
  }
  return out + ")";
}

SExpr type_sexpr(const Type& t) {
  if (!t.is_arrow()) return SExpr::sym(t.name());
  return SExpr::list({SExpr::sym("->"), type_sexpr(t.dom()), type_sexpr(t.cod())});
}

Type parse_type(const SExpr& e) {
  if (e.atom) {
    if (e.text.empty()) bad(e, "empty type");
    return Type::atom(e.text);
  }
  if (e.items.size() == 3 && e.items[0].is("->")) return Type::arrow(parse_type(e.items[1]), parse_type(e.items[2]));
  bad(e, "malformed type");
}

SExpr val_sexpr(const Val& v) {
  switch (v.kind) {
    case Val::Kind::Term: return term_sexpr(v.term);
    case Val::Kind::Const: return SExpr::list({SExpr::sym("label"), SExpr::sym(v.label)});
    case Val::Kind::Sum: return SExpr::list({SExpr::sym("tag"), SExpr::sym(v.label), val_sexpr(v.parts[0])});
    case Val::Kind::Prod:
    case Val::Kind::Bag: {
      std::vector<SExpr> items{SExpr::sym(v.kind == Val::Kind::Prod ? "tuple" : "bag")};
      for (const auto& p : v.parts) items.push_back(val_sexpr(p));
      return SExpr::list(std::move(items));
    }
  }
  return {};
}

SExpr term_sexpr(const Term& t) {
  if (t->kind == Node::Kind::Var) return SExpr::list({SExpr::sym("var"), SExpr::sym(std::to_string(t->index))});
  std::vector<SExpr> items{SExpr::sym(t->kind == Node::Kind::State ? "state" : "op"), SExpr::sym(t->op)};
  std::vector<SExpr> tys{SExpr::sym("tyargs")};
  for (const auto& ty : t->tyargs) tys.push_back(type_sexpr(ty));
  items.push_back(SExpr::list(std::move(tys)));
  for (const auto& a : t->args) {
    if (a.binders.empty()) {
      items.push_back(val_sexpr(a.value));
    } else {
      std::vector<SExpr> bs;
      for (const auto& b : a.binders) bs.push_back(type_sexpr(b));
      items.push_back(SExpr::list({SExpr::sym("bind"), SExpr::list(std::move(bs)), val_sexpr(a.value)}));
    }
  }
  return SExpr::list(std::move(items));
}

std::string to_sexpr(const Term& t) { return write_flat(term_sexpr(t)); }
std::string to_sexpr(const Val& v) { return write_flat(val_sexpr(v)); }
std::string to_sexpr(const Type& t) { return t.str(); }

Val parse_val(const SExpr& e) {
  if (e.head("label")) {
    if (e.items.size() != 2 || !e.items[1].atom) bad(e, "malformed label");
    return Val::constant(e.items[1].text);
  }
  if (e.head("tag")) {
    if (e.items.size() != 3 || !e.items[1].atom) bad(e, "malformed tag");
    return Val::sum(e.items[1].text, parse_val(e.items[2]));
  }
  if (e.head("tuple") || e.head("bag")) {
    std::vector<Val> parts;
    for (std::size_t i = 1; i < e.items.size(); ++i) parts.push_back(parse_val(e.items[i]));
    return e.head("tuple") ? Val::prod(std::move(parts)) : Val::bag(std::move(parts));
  }
  return Val::of(parse_term(e));
}

Term parse_term(const SExpr& e) {
  if (e.head("var")) {
    if (e.items.size() != 2) bad(e, "malformed var");
    return make_var(parse_index(e.items[1]));
  }
  if (e.head("op") || e.head("state")) {
    if (e.items.size() < 3 || !e.items[1].atom || !e.items[2].head("tyargs")) bad(e, "malformed operation node");
    std::vector<Type> tyargs;
    for (std::size_t i = 1; i < e.items[2].items.size(); ++i) tyargs.push_back(parse_type(e.items[2].items[i]));
    std::vector<Arg> args;
    for (std::size_t i = 3; i < e.items.size(); ++i) {
      const SExpr& a = e.items[i];
      Arg arg;
      if (a.head("bind")) {
        if (a.items.size() != 3 || a.items[1].atom) bad(a, "malformed bind");
        for (const auto& b : a.items[1].items) arg.binders.push_back(parse_type(b));
        arg.value = parse_val(a.items[2]);
      } else {
        arg.value = parse_val(a);
      }
      args.push_back(std::move(arg));
    }
    return make_node(e.head("state") ? Node::Kind::State : Node::Kind::Op, e.items[1].text, std::move(tyargs),
                     std::move(args));
  }
  bad(e, "expected (var i), (op ...) or (state ...)");
}

Term parse_term(const std::string& text) { return parse_term(read_sexpr(text)); }

}  // namespace tmonad
