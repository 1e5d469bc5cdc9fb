#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tmonad/equations.hpp"

namespace tmonad {

struct Proof;
using ProofPtr = std::shared_ptr<const Proof>;

struct Proof {
  std::string rule;
  std::vector<Type> typeArgs;  // one per rule type parameter
  Context ctx;                 // ambient context of the judgement
  Type type;                   // transition type
  std::map<std::string, Val> assignment;
  std::vector<ProofPtr> subproofs;  // one per premise
  Term src, tgt;                    // cached endpoints (normalized)

  std::size_t size() const;
  std::size_t height() const;
};

int compare(const Proof& a, const Proof& b);

struct DeriveConfig {
  std::size_t fuel = 8;             // maximal proof height
  std::size_t proofsPerTarget = 8;  // 0: keep every proof
};

using Derivation = std::pair<Term, ProofPtr>;

class Engine {
 public:
  explicit Engine(const LanguageBundle& lang);

  const LanguageBundle& lang() const { return lang_; }
  const Normalizer& normalizer() const { return nf_; }

  // all assignments extending seed under which the pattern evaluates to s
  // modulo the equations; gamma is the length of the ambient context
  std::vector<Assignment> match(const RuleSpec& rule, const MetaTerm& pattern, const Term& s, const Context& ctx,
                                std::size_t gamma, const Assignment& seed, bool source) const;

  std::vector<Derivation> derive(const Type& type, const Context& ctx, const Term& source, const DeriveConfig& cfg = {});

  const RuleSpec& rule(const std::string& name) const;

 private:
  using Key = std::tuple<Type, Context, Term, std::size_t, std::size_t>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const;
  };
  const std::vector<Derivation>& derive_rec(const Type& type, const Context& ctx, const Term& source,
                                            std::size_t fuel, std::size_t cap);

  const LanguageBundle& lang_;
  Normalizer nf_;
  std::map<Key, std::vector<Derivation>, KeyLess> memo_;
};

std::vector<Assignment> match_state(const LanguageBundle& lang, const RuleSpec& rule, const MetaTerm& pattern,
                                    const Term& s, const Context& ctx);
std::vector<Derivation> derive(const LanguageBundle& lang, const Type& type, const Context& ctx, const Term& source,
                               const DeriveConfig& cfg = {});
// recomputes the endpoints; throws InvalidProof
std::pair<Term, Term> check_proof(const LanguageBundle& lang, const Proof& p);
// sigma: p.ctx -> T(delta)
ProofPtr substitute_proof(const LanguageBundle& lang, const Proof& p, const Substitution& sigma);
Term state_substitute(const LanguageBundle& lang, const Term& s, const Substitution& sigma);

// S1 sources reachable from a target: the target itself when it is an S1
// state, otherwise its placetaker leaves injected into S1
std::vector<Term> next_sources(const LanguageBundle& lang, const Context& ctx, const Term& target);
Type source_type(const LanguageBundle& lang, const Context& ctx, const Term& s);

struct Edge {
  Type type;
  Term src, tgt;
  std::vector<ProofPtr> proofs;  // nonempty
};

struct LTS {
  Context ctx;
  std::vector<Term> states;  // sources explored, TermLess order
  std::vector<Edge> edges;   // (type, src, tgt) order
};

struct SaturateConfig {
  DeriveConfig derive;
  std::size_t stepBound = 4;
  std::size_t maxStates = 100000;
};

LTS saturate(const LanguageBundle& lang, const Context& ctx, const std::vector<Term>& seeds,
             const SaturateConfig& cfg = {});
LTS saturate(Engine& engine, const Context& ctx, const std::vector<Term>& seeds, const SaturateConfig& cfg = {});

struct RelationEdge {
  Type type;
  Term src, tgt;
  bool operator<(const RelationEdge& o) const;
  bool operator==(const RelationEdge& o) const;
};
using Relation = std::vector<RelationEdge>;  // sorted, duplicate-free

Relation extract_relation(const LTS& lts);
Relation make_relation(std::vector<RelationEdge> edges);

std::string to_dot(const LTS& lts);
std::string edge_records(const LTS& lts);
std::string edge_records(const Relation& rel);
std::string proof_sexpr(const Proof& p);
std::string proof_json(const Proof& p, int indent = -1);
ProofPtr proof_from_json(const std::string& text);

}  // namespace tmonad
