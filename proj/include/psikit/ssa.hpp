// SSA construction and the psi-level transformations: copy folding,
// inlining, reduction, projection, predicate promotion, plus the
// normalized-psi check.
//
// Psi instructions are addressed by the name of the variable they define.
#pragma once

#include <string>

#include "psikit/analysis.hpp"
#include "psikit/ir.hpp"
#include "psikit/machine.hpp"
#include "psikit/predicates.hpp"

namespace psikit {

struct SsaForm {
  Function function;
  bool is_ssa = false;
  bool psi_present = false;
};

class NotPsiDefined : public Error {
 public:
  explicit NotPsiDefined(const std::string& v) : Error("%" + v + " is not defined by a psi") {}
};

class EmptyProjection : public Error {
 public:
  explicit EmptyProjection(const std::string& v) : Error("projection of %" + v + " has no arguments left") {}
};

class ConditionViolated : public Error {
 public:
  ConditionViolated(int which, const std::string& msg)
      : Error("promotion condition " + std::to_string(which) + " violated: " + msg), which_(which) {}
  int which() const { return which_; }

 private:
  int which_;
};

bool contains_psi(const Function& f);
bool contains_phi(const Function& f);

/// Pruned SSA: phis at iterated dominance frontiers where the variable is
/// live. A guarded redefinition `p? x = ...` becomes `p? x.k = ...`
/// followed by `x.m = psi(1 ? <previous>, p ? x.k)`. Variables read before
/// any definition are given `x.undef = const 0` in the entry block.
SsaForm construct_ssa(const Function& f);

/// Removes unguarded register copies, and folds guarded copies into psi
/// arguments when the argument predicate is provably inside the copy's
/// guard and the source's definition guard. Returns the number of movs
/// removed.
std::size_t copy_fold(Function& f, const GuardEnv& env);

/// Replaces argument `arg_index` of the psi defining `psi` by the argument
/// list of the psi defining that argument. Throws NotPsiDefined, or Error
/// when an inner predicate is not covered by the outer argument predicate
/// together with the predicates to its right.
void psi_inline(Function& f, const std::string& psi, std::size_t arg_index, const GuardEnv& env);
/// Inlines every psi-defined psi argument until none is left that can be
/// inlined. Returns the number of inlining steps.
std::size_t psi_inline_all(Function& f);

/// Left-to-right removal of arguments whose predicate is covered by the
/// predicates to their right. Returns the number of arguments removed.
std::size_t psi_reduce(Function& f, const std::string& psi, const GuardEnv& env);
std::size_t psi_reduce_all(Function& f);

/// Inserts `<psi>.proj.N = psi(...)` right after the original, keeping the
/// arguments not provably disjoint from `onto`. Returns the new name.
std::string psi_project(Function& f, const std::string& psi, const PredExpr& onto, const GuardEnv& env);

/// Replaces the predicate of one argument. Condition 2 (the new predicate
/// is covered by the argument's own predicate and those to its right) is
/// checked first; Condition 1 (the definition guard covers the new
/// predicate) may be met by speculating the definition when the machine
/// allows it. Throws ConditionViolated and leaves `f` unchanged on failure.
void psi_promote(Function& f, const std::string& psi, std::size_t arg_index, const PredRef& new_pred,
                 const GuardEnv& env, const MachineModel& machine);
/// Default policy: the first argument of every psi is promoted to TRUE,
/// the others to their definition guard, whenever allowed. Returns the
/// number of promoted arguments.
std::size_t psi_promote_all(Function& f, const MachineModel& machine);

/// Both normalized-psi characteristics: every argument predicate is
/// equivalent to its definition's guard, and no argument's definition
/// (resolved through psi chains) dominates the definition of the argument
/// to its left.
bool is_normalized(const Function& f, const Instr& psi, const DomTree& dom, const GuardEnv& env);
bool all_normalized(const Function& f);

/// Select form of normalized psis: for each argument b after the first,
/// `p? b = op` becomes `p? t = op; b = select p, t, <previous arg>` and
/// the psi becomes a copy of its last argument. Psis whose arguments are
/// shared with another psi, or not defined in the psi's block in argument
/// order, are left alone. Returns the number of psis rewritten.
std::size_t psi_to_select(Function& f);

}  // namespace psikit
