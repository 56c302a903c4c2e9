#include "psikit/validate.hpp"

#include <sstream>

namespace psikit {

namespace {

enum class Kind { Unknown, Guard, Value, Mixed };

Kind join(Kind a, Kind b) {
  if (a == Kind::Unknown) return b;
  if (b == Kind::Unknown || a == b) return a;
  return Kind::Mixed;
}

class Checker {
 public:
  Checker(const Function& f, ValidateMode mode) : f_(f), mode_(mode) {}

  std::vector<Diagnostic> run() {
    if (f_.blocks.empty()) {
      error("function has no blocks");
      return diags_;
    }
    if (!structure()) return diags_;
    kinds();
    if (mode_ == ValidateMode::Ssa)
      ssa();
    else
      defined_somewhere();
    return diags_;
  }

 private:
  void error(const std::string& msg) { diags_.push_back({Diagnostic::Severity::Error, f_.name, msg}); }
  void warning(const std::string& msg) { diags_.push_back({Diagnostic::Severity::Warning, f_.name, msg}); }

  bool structure() {
    bool ok = true;
    std::set<std::string> labels;
    for (const auto& b : f_.blocks)
      if (!labels.insert(b.label).second) {
        error("duplicate block " + b.label);
        ok = false;
      }
    for (const auto& b : f_.blocks) {
      if (b.instrs.empty() || !b.instrs.back().is_terminator()) {
        error("block " + b.label + " does not end with a terminator");
        ok = false;
        continue;
      }
      bool body = false;
      for (std::size_t i = 0; i < b.instrs.size(); ++i) {
        const Instr& in = b.instrs[i];
        if (in.is_terminator() && i + 1 != b.instrs.size()) {
          error("terminator in the middle of block " + b.label);
          ok = false;
        }
        if (in.is_phi() && body) {
          error("phi %" + in.def + " after a non-phi instruction in " + b.label);
          ok = false;
        }
        if (!in.is_phi()) body = true;
        for (const auto& o : in.operands)
          if (o.is_label() && f_.block_index(o.name) < 0) {
            error("undefined block " + o.name);
            ok = false;
          }
        if (in.is_psi() && in.psi_args.empty()) {
          error("psi %" + in.def + " has no arguments");
          ok = false;
        }
      }
    }
    if (!ok) return false;

    Cfg cfg = Cfg::build(f_);
    DomTree dom(f_, cfg);
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      if (!dom.reachable(static_cast<int>(b))) warning("unreachable block " + f_.blocks[b].label);
      std::set<std::string> preds;
      for (int p : cfg.preds[b]) preds.insert(f_.blocks[p].label);
      for (const auto& in : f_.blocks[b].instrs) {
        if (!in.is_phi()) continue;
        std::set<std::string> seen;
        for (const auto& a : in.phi_args) {
          if (!preds.count(a.block)) {
            error("phi %" + in.def + " names " + a.block + ", not a predecessor of " + f_.blocks[b].label);
            ok = false;
          }
          if (!seen.insert(a.block).second) {
            error("phi %" + in.def + " has two arguments for " + a.block);
            ok = false;
          }
        }
        if (in.phi_args.size() != preds.size()) {
          error("phi %" + in.def + " has " + std::to_string(in.phi_args.size()) + " arguments for " +
                std::to_string(preds.size()) + " predecessors");
          ok = false;
        }
      }
    }
    return ok;
  }

  // Guard typing: infer a kind for every register, then reject value-kind
  // registers read as guards and const guards other than 0/1.
  void kinds() {
    std::map<std::string, Kind> kind;
    std::map<std::string, std::vector<std::int64_t>> consts;
    for (const auto& p : f_.params) kind[p.name] = join(kind[p.name], p.guard ? Kind::Guard : Kind::Value);
    for (const auto& b : f_.blocks)
      for (const auto& in : b.instrs) {
        if (in.def.empty()) continue;
        if (defines_guard(in.op)) {
          kind[in.def] = join(kind[in.def], Kind::Guard);
        } else if (in.op == Opcode::Const) {
          consts[in.def].push_back(in.operands[0].imm);
          kind[in.def];
        } else if (in.op == Opcode::Mov && in.operands[0].is_imm()) {
          consts[in.def].push_back(in.operands[0].imm);
          kind[in.def];
        } else if (in.op != Opcode::Mov && !in.is_phi() && !in.is_psi()) {
          kind[in.def] = join(kind[in.def], Kind::Value);
        } else {
          kind[in.def];
        }
      }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& b : f_.blocks)
        for (const auto& in : b.instrs) {
          if (in.def.empty()) continue;
          Kind k = kind[in.def];
          auto pull = [&](const std::string& v) {
            if (auto it = kind.find(v); it != kind.end()) k = join(k, it->second);
          };
          if (in.is_copy()) pull(in.operands[0].name);
          for (const auto& a : in.phi_args) pull(a.value);
          for (const auto& a : in.psi_args) pull(a.value);
          if (k != kind[in.def]) {
            kind[in.def] = k;
            changed = true;
          }
        }
    }
    std::set<std::string> reported;
    auto check_guard = [&](const std::string& reg, const char* what) {
      if (reg.empty() || reported.count(reg)) return;
      auto it = kind.find(reg);
      if (it == kind.end()) return;
      if (it->second == Kind::Value || it->second == Kind::Mixed) {
        error("value-kind variable %" + reg + " used as " + what);
        reported.insert(reg);
        return;
      }
      if (auto c = consts.find(reg); c != consts.end())
        for (auto v : c->second)
          if (v != 0 && v != 1) {
            error("constant %" + reg + " = " + std::to_string(v) + " used as " + what);
            reported.insert(reg);
            return;
          }
    };
    for (const auto& b : f_.blocks)
      for (const auto& in : b.instrs) {
        check_guard(in.guard.reg, "a guard");
        for (const auto& a : in.psi_args) check_guard(a.pred.reg, "a psi predicate");
        if (in.op == Opcode::Br && in.operands[0].is_var()) check_guard(in.operands[0].name, "a branch condition");
      }
  }

  void defined_somewhere() {
    auto sites = definition_sites(f_);
    std::set<std::string> reported;
    for (const auto& b : f_.blocks)
      for (const auto& in : b.instrs)
        for_each_use(in, [&](const std::string& v) {
          if (!sites.count(v) && reported.insert(v).second) error("use of undefined variable %" + v);
        });
  }

  void ssa() {
    std::map<std::string, int> counts;
    for (const auto& p : f_.params) ++counts[p.name];
    for (const auto& b : f_.blocks)
      for (const auto& in : b.instrs)
        if (!in.def.empty()) ++counts[in.def];
    for (const auto& [v, n] : counts)
      if (n > 1) error("multiple definitions of %" + v);

    auto sites = definition_sites(f_);
    DomTree dom(f_);
    auto check = [&](const std::string& v, Pos use, bool strict, const std::string& where) {
      auto it = sites.find(v);
      if (it == sites.end()) {
        error("use of undefined variable %" + v + " in " + where);
        return;
      }
      if (!dom.dominates(it->second, use) || (strict && it->second == use))
        error("definition of %" + v + " does not dominate its use in " + where);
    };
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto& instrs = f_.blocks[b].instrs;
      for (std::size_t i = 0; i < instrs.size(); ++i) {
        const Instr& in = instrs[i];
        Pos here{static_cast<int>(b), static_cast<int>(i)};
        std::string where = in.def.empty() ? std::string(opcode_name(in.op)) + " in " + f_.blocks[b].label
                                           : "definition of %" + in.def;
        if (in.is_phi()) {
          for (const auto& a : in.phi_args) {
            int p = f_.block_index(a.block);
            check(a.value, Pos{p, static_cast<int>(f_.blocks[p].instrs.size())}, false, where);
          }
          continue;
        }
        for_each_use(in, [&](const std::string& v) { check(v, here, true, where); });
      }
    }
  }

  const Function& f_;
  ValidateMode mode_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate(const Function& f, ValidateMode mode) { return Checker(f, mode).run(); }

std::vector<Diagnostic> validate(const Module& m, ValidateMode mode) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& f : m.functions) {
    if (!names.insert(f.name).second) out.push_back({Diagnostic::Severity::Error, f.name, "duplicate function @" + f.name});
    auto d = validate(f, mode);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (const auto& d : diags)
    os << (d.severity == Diagnostic::Severity::Error ? "error" : "warning") << ": @" << d.function << ": " << d.message
       << '\n';
  return os.str();
}

}  // namespace psikit
