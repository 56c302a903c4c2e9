// Reference interpreter for every program form, and the differential
// checker built on it.
//
// Values are 64-bit integers or undefined. Undefined values flow through
// computation (so speculated code never traps); reading one where it
// becomes observable (a guard, a branch, a psi predicate, a memory address,
// a stored value, a returned value) traps.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psikit/ir.hpp"

namespace psikit {

inline constexpr std::size_t kMemoryWords = 8;
inline constexpr std::uint64_t kDefaultBudget = 1'000'000;

enum class Trap { None, UndefinedRead, PsiNoneTrue, StepBudgetExhausted, OutOfBoundsMemory };
std::string_view trap_name(Trap t);

struct ExecResult {
  std::optional<std::int64_t> value;  // set when `ret %x` was executed
  Trap trap = Trap::None;
  std::string detail;                 // where the trap happened
  std::vector<std::int64_t> memory;   // final memory

  bool returned() const { return trap == Trap::None; }
  std::string str() const;
};

ExecResult eval(const Function& f, const std::vector<std::int64_t>& args, std::vector<std::int64_t> mem = {},
                std::uint64_t budget = kDefaultBudget);

struct Mismatch {
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> memory;
  ExecResult expected;
  ExecResult actual;
};

struct DiffReport {
  std::size_t trials = 0;
  std::size_t compared = 0;
  std::size_t excluded = 0;  // the reference trapped on its own
  std::vector<Mismatch> mismatches;

  bool ok() const { return mismatches.empty(); }
  std::string str() const;
};

/// Runs both functions on `trials` pseudo-random vectors: arguments in
/// [-8, 8] (0/1 for guard parameters) and kMemoryWords memory words.
/// Vectors on which `reference` traps with UndefinedRead, PsiNoneTrue or
/// StepBudgetExhausted are excluded; the others must agree on the trap
/// kind, the returned value and the final memory.
DiffReport differential_check(const Function& reference, const Function& candidate, int trials, std::uint64_t seed);

}  // namespace psikit
