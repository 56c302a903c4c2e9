// Predicate domains: boolean formulas over base condition symbols, and the
// subset / disjointness / union queries the psi transformations rely on.
//
// Queries are decided by enumerating every assignment of the symbols that
// occur in the two formulas. A `false` answer means "not proven"; callers
// must treat it conservatively.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "psikit/ir.hpp"

namespace psikit {

class PredExpr {
 public:
  enum class Kind { True, False, Sym, Not, And, Or };

  PredExpr();  // TRUE
  static PredExpr top();
  static PredExpr bottom();
  static PredExpr sym(unsigned id);

  friend PredExpr operator!(const PredExpr& a);
  friend PredExpr operator&&(const PredExpr& a, const PredExpr& b);
  friend PredExpr operator||(const PredExpr& a, const PredExpr& b);

  Kind kind() const;
  unsigned symbol() const;
  const PredExpr& lhs() const;
  const PredExpr& rhs() const;

  /// Evaluate under an assignment; `value_of(sym)` gives each symbol's value.
  template <typename F>
  bool eval(const F& value_of) const {
    switch (kind()) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Sym:
        return value_of(symbol());
      case Kind::Not:
        return !lhs().eval(value_of);
      case Kind::And:
        return lhs().eval(value_of) && rhs().eval(value_of);
      case Kind::Or:
        return lhs().eval(value_of) || rhs().eval(value_of);
    }
    return false;
  }

  void collect_symbols(std::vector<unsigned>& out) const;
  std::string str() const;

  /// Structural equality.
  bool same_as(const PredExpr& other) const;

 private:
  struct Node;
  explicit PredExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class SymbolBudgetExceeded : public Error {
 public:
  SymbolBudgetExceeded() : Error("predicate symbol budget exceeded") {}
};

/// Maps each guard register of a function to its formula.
class GuardEnv {
 public:
  static constexpr unsigned kSymbolBudget = 16;

  /// Formula for a predicate reference; TRUE for the constant predicate.
  /// Registers unknown to the environment (created after it was built) are
  /// given a fresh opaque symbol.
  PredExpr of(const PredRef& p) const;
  PredExpr formula(const std::string& reg) const;
  bool has(const std::string& reg) const { return formulas_.count(reg) != 0; }

  unsigned symbol_count() const { return symbol_count_; }
  bool conservative() const { return conservative_; }

 private:
  friend GuardEnv build_guard_env(const Function& f);
  friend GuardEnv build_conservative_guard_env(const Function& f);

  mutable std::map<std::string, PredExpr> formulas_;
  mutable unsigned symbol_count_ = 0;
  bool conservative_ = false;
};

/// Throws SymbolBudgetExceeded when the function needs more than
/// GuardEnv::kSymbolBudget fresh symbols.
GuardEnv build_guard_env(const Function& f);
/// Every guard register is an independent atom; only polarity, syntactic
/// equality and TRUE remain decidable.
GuardEnv build_conservative_guard_env(const Function& f);
/// build_guard_env, falling back to the conservative environment.
GuardEnv guard_env_for(const Function& f);

bool domain_subset(const PredExpr& a, const PredExpr& b, const GuardEnv& env);
bool domain_disjoint(const PredExpr& a, const PredExpr& b, const GuardEnv& env);
bool domain_equivalent(const PredExpr& a, const PredExpr& b, const GuardEnv& env);
PredExpr domain_union(const std::vector<PredExpr>& preds);

}  // namespace psikit
