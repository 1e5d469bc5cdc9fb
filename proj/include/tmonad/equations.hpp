#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tmonad/meta.hpp"

namespace tmonad {

// A normalization backend canonicalizes one node whose children are already
// in normal form, and lists the normal-form presentations of a term for
// matching modulo the equations.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Term top(const Term& node, std::size_t ctxLen) const { (void)ctxLen; return node; }
  // nodes headed by `op` (children normal) whose normal form is t
  virtual std::vector<Term> decompose(const std::string& op, const Term& t, std::size_t ctxLen) const;
};

// identity | pi [PAR NIL NU] | diff-lambda [D] | assoc OP... | ac OP...
std::unique_ptr<Backend> make_backend(const std::string& name, const std::vector<std::string>& args);

class Normalizer {
 public:
  explicit Normalizer(const LanguageBundle& lang);

  Term operator()(const Term& t, std::size_t ctxLen) const;
  Val operator()(const Val& v, std::size_t ctxLen) const;
  std::vector<Term> decompose(const std::string& op, const Term& t, std::size_t ctxLen) const;

 private:
  const Backend& backend_for(Node::Kind kind, const std::string& op) const;

  const LanguageBundle& lang_;
  std::unique_ptr<Backend> monad_, s1_, s2_;
};

Term normalize(const LanguageBundle& lang, const Context& ctx, const Term& t);
Term normalize_state(const LanguageBundle& lang, const Context& ctx, const Term& s);
bool term_equal(const LanguageBundle& lang, const Context& ctx, const Term& t, const Term& u);

// ---------------------------------------------------------------- free + quotient

enum class Side { L, R };

std::string formal_name(const std::vector<OperationScheme>& taken, const std::string& eqName);
MonadSignature augment_signature(const EquationalSignature& e);
StateSignature augment_state_signature(const StateSignature& st);
Term translate(const EquationalSignature& e, Side side, const Context& ctx, const Term& a);
Term translate_state(const StateSignature& st, Side side, const Context& ctx, const Term& a);
// smallest augmented depth that harvests every identification inside depth d
std::size_t default_aug_depth(const std::vector<EquationSpec>& eqs, std::size_t dTerm);

struct Partition {
  std::vector<std::vector<Term>> classes;  // members in enumeration order; classes ordered by representative

  std::size_t size() const { return classes.size(); }
  std::string report() const;
};

Partition quotient_oracle(const EquationalSignature& e, const Context& ctx, const Type& ty, std::size_t dTerm,
                          std::size_t dAug, const EnumConfig& cfg = {});
Partition state_quotient_oracle(const MonadSignature& sig, const StateSignature& st, const Context& ctx,
                                const Type& ty, std::size_t dTerm, std::size_t dAug, const EnumConfig& cfg = {});

// groups the universe by a canonical-form function, same ordering conventions
Partition partition_by(const std::vector<Term>& universe, const std::function<Term(const Term&)>& canon);

}  // namespace tmonad
