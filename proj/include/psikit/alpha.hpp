// Structural comparison of functions up to a consistent renaming of
// variables and block labels.
#pragma once

#include <optional>
#include <string>

#include "psikit/ir.hpp"

namespace psikit {

/// First difference found, or nullopt when `a` and `b` are alpha-equivalent
/// (blocks are matched by position, variables by a bijection).
std::optional<std::string> alpha_difference(const Function& a, const Function& b);

inline bool alpha_equivalent(const Function& a, const Function& b) { return !alpha_difference(a, b); }

}  // namespace psikit
