#include "psikit/predicates.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace psikit {

struct PredExpr::Node {
  Kind kind;
  unsigned sym = 0;
  PredExpr a;
  PredExpr b;
  Node(Kind k, unsigned s) : kind(k), sym(s), a(nullptr), b(nullptr) {}
  Node(Kind k, PredExpr x, PredExpr y) : kind(k), a(std::move(x)), b(std::move(y)) {}
};

PredExpr::PredExpr() : PredExpr(top()) {}

PredExpr PredExpr::top() {
  static const std::shared_ptr<const Node> n = std::make_shared<const Node>(Kind::True, 0u);
  return PredExpr(n);
}

PredExpr PredExpr::bottom() {
  static const std::shared_ptr<const Node> n = std::make_shared<const Node>(Kind::False, 0u);
  return PredExpr(n);
}

PredExpr PredExpr::sym(unsigned id) { return PredExpr(std::make_shared<const Node>(Kind::Sym, id)); }

PredExpr::Kind PredExpr::kind() const { return node_->kind; }
unsigned PredExpr::symbol() const { return node_->sym; }
const PredExpr& PredExpr::lhs() const { return node_->a; }
const PredExpr& PredExpr::rhs() const { return node_->b; }

PredExpr operator!(const PredExpr& a) {
  switch (a.kind()) {
    case PredExpr::Kind::True:
      return PredExpr::bottom();
    case PredExpr::Kind::False:
      return PredExpr::top();
    case PredExpr::Kind::Not:
      return a.lhs();
    default:
      return PredExpr(std::make_shared<const PredExpr::Node>(PredExpr::Kind::Not, a, PredExpr::top()));
  }
}

PredExpr operator&&(const PredExpr& a, const PredExpr& b) {
  if (a.kind() == PredExpr::Kind::False || b.kind() == PredExpr::Kind::True) return a;
  if (b.kind() == PredExpr::Kind::False || a.kind() == PredExpr::Kind::True) return b;
  return PredExpr(std::make_shared<const PredExpr::Node>(PredExpr::Kind::And, a, b));
}

PredExpr operator||(const PredExpr& a, const PredExpr& b) {
  if (a.kind() == PredExpr::Kind::True || b.kind() == PredExpr::Kind::False) return a;
  if (b.kind() == PredExpr::Kind::True || a.kind() == PredExpr::Kind::False) return b;
  return PredExpr(std::make_shared<const PredExpr::Node>(PredExpr::Kind::Or, a, b));
}

void PredExpr::collect_symbols(std::vector<unsigned>& out) const {
  switch (kind()) {
    case Kind::Sym:
      out.push_back(symbol());
      break;
    case Kind::Not:
      lhs().collect_symbols(out);
      break;
    case Kind::And:
    case Kind::Or:
      lhs().collect_symbols(out);
      rhs().collect_symbols(out);
      break;
    default:
      break;
  }
}

std::string PredExpr::str() const {
  switch (kind()) {
    case Kind::True:
      return "TRUE";
    case Kind::False:
      return "FALSE";
    case Kind::Sym:
      return "S" + std::to_string(symbol());
    case Kind::Not:
      return "!" + lhs().str();
    case Kind::And:
      return "(" + lhs().str() + " & " + rhs().str() + ")";
    case Kind::Or:
      return "(" + lhs().str() + " | " + rhs().str() + ")";
  }
  return "?";
}

bool PredExpr::same_as(const PredExpr& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case Kind::True:
    case Kind::False:
      return true;
    case Kind::Sym:
      return symbol() == o.symbol();
    case Kind::Not:
      return lhs().same_as(o.lhs());
    default:
      return lhs().same_as(o.lhs()) && rhs().same_as(o.rhs());
  }
}

namespace {

// Above this many distinct symbols in one query, give up (not proven).
constexpr std::size_t kMaxQuerySymbols = 20;

// True iff `pred(a_val, b_val)` holds for every assignment of the symbols
// that occur in a or b.
template <typename P>
bool for_all_assignments(const PredExpr& a, const PredExpr& b, P pred) {
  std::vector<unsigned> syms;
  a.collect_symbols(syms);
  b.collect_symbols(syms);
  std::sort(syms.begin(), syms.end());
  syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
  if (syms.size() > kMaxQuerySymbols) return false;
  const std::uint64_t total = std::uint64_t{1} << syms.size();
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    auto value_of = [&](unsigned s) {
      auto it = std::lower_bound(syms.begin(), syms.end(), s);
      return ((bits >> (it - syms.begin())) & 1u) != 0;
    };
    if (!pred(a.eval(value_of), b.eval(value_of))) return false;
  }
  return true;
}

}  // namespace

bool domain_subset(const PredExpr& a, const PredExpr& b, const GuardEnv&) {
  if (a.same_as(b) || b.kind() == PredExpr::Kind::True || a.kind() == PredExpr::Kind::False) return true;
  return for_all_assignments(a, b, [](bool x, bool y) { return !x || y; });
}

bool domain_disjoint(const PredExpr& a, const PredExpr& b, const GuardEnv&) {
  if (a.kind() == PredExpr::Kind::False || b.kind() == PredExpr::Kind::False) return true;
  return for_all_assignments(a, b, [](bool x, bool y) { return !(x && y); });
}

bool domain_equivalent(const PredExpr& a, const PredExpr& b, const GuardEnv& env) {
  return domain_subset(a, b, env) && domain_subset(b, a, env);
}

PredExpr domain_union(const std::vector<PredExpr>& preds) {
  PredExpr acc = PredExpr::bottom();
  for (const auto& p : preds) acc = acc || p;
  return acc;
}

PredExpr GuardEnv::formula(const std::string& reg) const {
  auto it = formulas_.find(reg);
  if (it != formulas_.end()) return it->second;
  PredExpr fresh = PredExpr::sym(symbol_count_++);
  formulas_.emplace(reg, fresh);
  return fresh;
}

PredExpr GuardEnv::of(const PredRef& p) const {
  if (p.is_true()) return PredExpr::top();
  PredExpr f = formula(p.reg);
  return p.negated ? !f : f;
}

namespace {

std::map<std::string, int> def_counts(const Function& f) {
  std::map<std::string, int> counts;
  for (const auto& p : f.params) ++counts[p.name];
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (!in.def.empty()) ++counts[in.def];
  return counts;
}

std::set<std::string> guard_registers(const Function& f) {
  // Guard registers: guard params, results of guard-defining ops, and
  // anything read in a predicate position or copied from a guard.
  std::set<std::string> guards;
  for (const auto& p : f.params)
    if (p.guard) guards.insert(p.name);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs) {
      if (defines_guard(in.op)) guards.insert(in.def);
      if (!in.guard.is_true()) guards.insert(in.guard.reg);
      for (const auto& a : in.psi_args)
        if (!a.pred.is_true()) guards.insert(a.pred.reg);
      if (in.op == Opcode::Br) guards.insert(in.operands[0].name);
      if (in.op == Opcode::Select && in.operands[0].is_var()) guards.insert(in.operands[0].name);
      if ((in.op == Opcode::And || in.op == Opcode::Or || in.op == Opcode::Not))
        for (const auto& o : in.operands)
          if (o.is_var()) guards.insert(o.name);
    }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs) {
        if (in.def.empty() || guards.count(in.def)) continue;
        bool from_guard = false;
        if (in.op == Opcode::Mov && in.operands[0].is_var()) from_guard = guards.count(in.operands[0].name) != 0;
        for (const auto& a : in.phi_args) from_guard = from_guard || guards.count(a.value);
        for (const auto& a : in.psi_args) from_guard = from_guard || guards.count(a.value);
        if (from_guard) {
          guards.insert(in.def);
          changed = true;
        }
      }
  }
  return guards;
}

}  // namespace

GuardEnv build_guard_env(const Function& f) {
  GuardEnv env;
  const auto counts = def_counts(f);
  std::map<std::string, const Instr*> defs;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (!in.def.empty()) defs.emplace(in.def, &in);

  std::set<std::string> in_progress;
  std::function<PredExpr(const std::string&)> compute = [&](const std::string& reg) -> PredExpr {
    if (auto it = env.formulas_.find(reg); it != env.formulas_.end()) return it->second;
    auto fresh = [&]() {
      if (env.symbol_count_ >= GuardEnv::kSymbolBudget) throw SymbolBudgetExceeded();
      PredExpr s = PredExpr::sym(env.symbol_count_++);
      env.formulas_.emplace(reg, s);
      return s;
    };
    auto dit = defs.find(reg);
    auto cit = counts.find(reg);
    if (dit == defs.end() || (cit != counts.end() && cit->second > 1) || in_progress.count(reg)) return fresh();
    const Instr& in = *dit->second;
    auto operand = [&](std::size_t i) -> PredExpr {
      const auto& o = in.operands[i];
      if (o.is_imm()) return o.imm != 0 ? PredExpr::top() : PredExpr::bottom();
      return compute(o.name);
    };
    in_progress.insert(reg);
    PredExpr result;
    switch (in.op) {
      case Opcode::Const:
        result = in.operands[0].imm != 0 ? PredExpr::top() : PredExpr::bottom();
        break;
      case Opcode::Mov:
        result = operand(0);
        break;
      case Opcode::Not:
        result = !operand(0);
        break;
      case Opcode::And:
        result = operand(0) && operand(1);
        break;
      case Opcode::Or:
        result = operand(0) || operand(1);
        break;
      default:
        in_progress.erase(reg);
        return fresh();
    }
    in_progress.erase(reg);
    env.formulas_.emplace(reg, result);
    return result;
  };

  for (const auto& p : f.params)
    if (p.guard) compute(p.name);
  // Deterministic symbol numbering: program order of definitions.
  const auto guards = guard_registers(f);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (!in.def.empty() && guards.count(in.def)) compute(in.def);
  for (const auto& g : guards) compute(g);
  return env;
}

GuardEnv build_conservative_guard_env(const Function& f) {
  GuardEnv env;
  env.conservative_ = true;
  for (const auto& p : f.params)
    if (p.guard) env.formula(p.name);
  const auto guards = guard_registers(f);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (!in.def.empty() && guards.count(in.def)) env.formula(in.def);
  for (const auto& g : guards) env.formula(g);
  return env;
}

GuardEnv guard_env_for(const Function& f) {
  try {
    return build_guard_env(f);
  } catch (const SymbolBudgetExceeded&) {
    return build_conservative_guard_env(f);
  }
}

}  // namespace psikit
