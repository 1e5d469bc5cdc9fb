#pragma once

#include <string>
#include <vector>

#include "tmonad/model.hpp"

namespace tmonad {

// Cached, validated bundles. Throws Error(UnknownLanguage).
const LanguageBundle& bundled(const std::string& name);
const std::vector<std::string>& bundle_names();
// the five calculi plus the GSOS sample
const std::vector<std::string>& primary_bundles();
// spec text a bundle was built from (gsos-sample: its gsos-system form)
const std::string& bundle_source(const std::string& name);

// Differential λ. Multiterms are sorted vectors of terms over ctx; x must be
// in scope and every term of type *.
std::vector<Term> multiterm_substitute(const Context& ctx, const Term& e, std::size_t x, const std::vector<Term>& U);
std::vector<Term> partial_derivative(const Context& ctx, const Term& e, std::size_t x, const std::vector<Term>& U);
Term multiterm_state(const std::vector<Term>& U);  // (state ms (bag ...))

}  // namespace tmonad
