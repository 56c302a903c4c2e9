#include "psikit/alpha.hpp"

#include <map>

#include "psikit/text.hpp"

namespace psikit {

namespace {

class Bijection {
 public:
  bool bind(const std::string& a, const std::string& b) {
    auto f = fwd_.find(a);
    auto r = bwd_.find(b);
    if (f != fwd_.end() || r != bwd_.end()) return f != fwd_.end() && r != bwd_.end() && f->second == b;
    fwd_[a] = b;
    bwd_[b] = a;
    return true;
  }

 private:
  std::map<std::string, std::string> fwd_, bwd_;
};

struct Matcher {
  Bijection vars;
  std::map<std::string, std::string> labels;

  bool pred(const PredRef& a, const PredRef& b) {
    if (a.is_true() || b.is_true()) return a.is_true() && b.is_true();
    return a.negated == b.negated && vars.bind(a.reg, b.reg);
  }

  bool label(const std::string& a, const std::string& b) {
    auto it = labels.find(a);
    return it != labels.end() && it->second == b;
  }

  bool instr(const Instr& a, const Instr& b) {
    if (a.op != b.op || !pred(a.guard, b.guard)) return false;
    if (a.def.empty() != b.def.empty() || (!a.def.empty() && !vars.bind(a.def, b.def))) return false;
    if (a.operands.size() != b.operands.size() || a.phi_args.size() != b.phi_args.size() ||
        a.psi_args.size() != b.psi_args.size())
      return false;
    for (std::size_t i = 0; i < a.operands.size(); ++i) {
      const auto& x = a.operands[i];
      const auto& y = b.operands[i];
      if (x.kind != y.kind) return false;
      if (x.is_imm() && x.imm != y.imm) return false;
      if (x.is_var() && !vars.bind(x.name, y.name)) return false;
      if (x.is_label() && !label(x.name, y.name)) return false;
    }
    // Phi arguments are an unordered mapping from predecessor to value.
    for (const auto& x : a.phi_args) {
      bool found = false;
      for (const auto& y : b.phi_args)
        if (label(x.block, y.block)) {
          if (!vars.bind(x.value, y.value)) return false;
          found = true;
        }
      if (!found) return false;
    }
    for (std::size_t i = 0; i < a.psi_args.size(); ++i)
      if (!pred(a.psi_args[i].pred, b.psi_args[i].pred) || !vars.bind(a.psi_args[i].value, b.psi_args[i].value))
        return false;
    return true;
  }
};

}  // namespace

std::optional<std::string> alpha_difference(const Function& a, const Function& b) {
  if (a.params.size() != b.params.size()) return "parameter count differs";
  if (a.blocks.size() != b.blocks.size())
    return "block count differs (" + std::to_string(a.blocks.size()) + " vs " + std::to_string(b.blocks.size()) + ")";
  Matcher m;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].guard != b.params[i].guard || !m.vars.bind(a.params[i].name, b.params[i].name))
      return "parameter " + std::to_string(i) + " differs";
  for (std::size_t i = 0; i < a.blocks.size(); ++i) m.labels[a.blocks[i].label] = b.blocks[i].label;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    const Block& x = a.blocks[i];
    const Block& y = b.blocks[i];
    for (std::size_t k = 0; k < std::max(x.instrs.size(), y.instrs.size()); ++k) {
      if (k >= x.instrs.size() || k >= y.instrs.size())
        return "block " + x.label + ": instruction count differs";
      if (!m.instr(x.instrs[k], y.instrs[k]))
        return "block " + x.label + ": '" + print_instr(x.instrs[k]) + "' vs '" + print_instr(y.instrs[k]) + "'";
    }
  }
  return std::nullopt;
}

}  // namespace psikit
