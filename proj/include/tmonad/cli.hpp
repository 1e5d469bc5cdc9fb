#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tmonad/spec.hpp"

namespace tmonad {

// A path to a .spec file, or the name of a bundled language (a trailing
// directory and .spec/.gsos extension are ignored for the lookup).
Document load_document(const std::string& file);

// Exit status: 0 ok, 1 property or derivation failure, 2 usage or parse error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace tmonad
