#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tmonad/transitions.hpp"

namespace tmonad {

// Random well-typed syntax for a bundle. Every call is driven by the one
// seeded engine so runs are reproducible.
class Generator {
 public:
  Generator(const LanguageBundle& lang, std::uint64_t seed);

  std::mt19937_64& rng() { return rng_; }
  std::size_t below(std::size_t n);  // uniform in [0, n)

  const std::vector<Type>& types() const { return types_; }
  // one variable of every candidate type plus up to `extra` random ones, shuffled
  Context context(std::size_t extra = 2);
  Type type();

  // null when no term of that type exists within the depth
  Term term(const Context& ctx, const Type& ty, std::size_t depth);
  Term state(const StateSignature& st, const Context& ctx, const Type& ty, std::size_t depth);
  std::optional<Val> value(const StateSignature* own, const Context& ctx, const Shape& shape, std::size_t depth);

  // images of depth <= depth; falls back to variables of the target
  Substitution substitution(const Context& source, const Context& target, std::size_t depth);
  // type-preserving; target must contain every type of source
  Renaming renaming(const Context& source, const Context& target);

 private:
  Term build(const std::vector<OperationScheme>& ops, Node::Kind kind, const StateSignature* own, const Context& ctx,
             const Type& ty, std::size_t depth);

  const LanguageBundle& lang_;
  std::mt19937_64 rng_;
  std::vector<Type> types_;
};

struct LawConfig {
  std::uint64_t seed = 7;
  std::size_t cases = 1000;       // per syntactic law
  std::size_t proofCases = 500;   // (proof, substitution) pairs
  std::size_t depth = 3;
  std::size_t fuel = 6;
};

struct LawReport {
  std::string law;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string counterexample;  // first failure

  bool ok() const { return failures == 0 && cases > 0; }
};

std::vector<std::string> law_names();
// all suites, or the named ones
std::vector<LawReport> run_laws(const LanguageBundle& lang, const LawConfig& cfg,
                                const std::vector<std::string>& only = {});
std::string format_reports(const std::string& language, const std::vector<LawReport>& reports);

// derived proofs from random sources, for stability tests
std::vector<ProofPtr> proof_pool(const LanguageBundle& lang, Generator& gen, std::size_t want, std::size_t depth,
                                 std::size_t fuel);

}  // namespace tmonad
