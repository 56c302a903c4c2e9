// Structural and SSA validation. Diagnostics are returned, never thrown.
#pragma once

#include <vector>

#include "psikit/analysis.hpp"
#include "psikit/ir.hpp"

namespace psikit {

enum class ValidateMode { NonSsa, Ssa };

std::vector<Diagnostic> validate(const Function& f, ValidateMode mode);
std::vector<Diagnostic> validate(const Module& m, ValidateMode mode);

bool has_errors(const std::vector<Diagnostic>& diags);
std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace psikit
