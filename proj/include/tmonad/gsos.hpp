#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tmonad/sexpr.hpp"
#include "tmonad/transitions.hpp"

namespace tmonad {

// o(x1..xm) --c--> E with premises x_i --a_ij--> y_ij.
// The target lives over the context x1..xm followed by the y_ij in
// argument-major order, every entry of type *.
struct GSOSRule {
  std::string name;
  std::string op;
  std::string label;
  std::vector<std::vector<std::string>> premises;  // per argument: the labels a_i1..a_in
  Term target;

  bool operator==(const GSOSRule& o) const;
};

struct GSOSSystem {
  std::string name;
  std::vector<std::pair<std::string, std::size_t>> operations;
  std::vector<std::string> labels;
  std::vector<GSOSRule> rules;

  bool operator==(const GSOSSystem&) const = default;
};

MonadSignature gsos_signature(const GSOSSystem& sys);
// S1 = inj: I -> Θ, S2 = lab: A x I -> Θ
LanguageBundle compile_gsos(const GSOSSystem& sys);
std::size_t rule_arity(const GSOSRule& r);  // m + sum of n_i

struct LabelledEdge {
  Term src;
  std::string label;
  Term tgt;

  bool operator<(const LabelledEdge& o) const;
  bool operator==(const LabelledEdge& o) const;
};
using LabelledRelation = std::vector<LabelledEdge>;  // sorted, duplicate-free

// least relation on the enumerated universe closed under the rules;
// sources range over the universe, targets are unrestricted
LabelledRelation gsos_oracle(const GSOSSystem& sys, const Context& ctx, std::size_t depth, std::size_t fuel);
// (state inj t) -> (state lab a u) edges of the compiled bundle
Relation as_state_relation(const LabelledRelation& rel);
LabelledRelation as_labelled(const Relation& rel);

GSOSSystem parse_gsos(const SExpr& doc);
SExpr gsos_sexpr(const GSOSSystem& sys);

GSOSSystem sample_gsos();

}  // namespace tmonad
