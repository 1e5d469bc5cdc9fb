#pragma once

#include <string>
#include <vector>

#include "tmonad/model.hpp"

namespace tmonad {

struct SExpr {
  bool atom = false;
  std::string text;
  std::vector<SExpr> items;
  int line = 0, col = 0;

  static SExpr sym(std::string s);
  static SExpr list(std::vector<SExpr> items);

  bool is(const char* s) const { return atom && text == s; }
  bool head(const char* s) const { return !atom && !items.empty() && items[0].is(s); }
  std::string where() const;
};

std::vector<SExpr> read_sexprs(const std::string& text);
SExpr read_sexpr(const std::string& text);  // exactly one datum

std::string write_flat(const SExpr& e);

// canonical term text: (var i) | (op NAME (tyargs T...) ARG...) | (state NAME ...)
SExpr type_sexpr(const Type& t);
Type parse_type(const SExpr& e);
SExpr term_sexpr(const Term& t);
SExpr val_sexpr(const Val& v);
std::string to_sexpr(const Term& t);
std::string to_sexpr(const Val& v);
std::string to_sexpr(const Type& t);
Term parse_term(const SExpr& e);
Term parse_term(const std::string& text);
Val parse_val(const SExpr& e);

}  // namespace tmonad
