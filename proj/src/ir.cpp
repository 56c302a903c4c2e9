#include "psikit/ir.hpp"

#include <array>
#include <cctype>

namespace psikit {

namespace {

struct OpInfo {
  Opcode op;
  std::string_view name;
};

constexpr std::array<OpInfo, 20> kOps{{
    {Opcode::Const, "const"},   {Opcode::Mov, "mov"},       {Opcode::Add, "add"},
    {Opcode::Sub, "sub"},       {Opcode::Mul, "mul"},       {Opcode::Neg, "neg"},
    {Opcode::CmpEq, "cmp_eq"},  {Opcode::CmpLt, "cmp_lt"},  {Opcode::CmpLe, "cmp_le"},
    {Opcode::And, "and"},       {Opcode::Or, "or"},         {Opcode::Not, "not"},
    {Opcode::Select, "select"}, {Opcode::Load, "load"},     {Opcode::Store, "store"},
    {Opcode::Br, "br"},         {Opcode::Goto, "goto"},     {Opcode::Ret, "ret"},
    {Opcode::Phi, "phi"},       {Opcode::Psi, "psi"},
}};

}  // namespace

std::string_view opcode_name(Opcode op) {
  for (const auto& info : kOps)
    if (info.op == op) return info.name;
  return "?";
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (const auto& info : kOps)
    if (info.name == name) return info.op;
  return std::nullopt;
}

bool is_terminator(Opcode op) { return op == Opcode::Br || op == Opcode::Goto || op == Opcode::Ret; }

bool defines_guard(Opcode op) {
  switch (op) {
    case Opcode::CmpEq:
    case Opcode::CmpLt:
    case Opcode::CmpLe:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Not:
      return true;
    default:
      return false;
  }
}

std::string PredRef::str() const {
  if (is_true()) return "1";
  return (negated ? "!%" : "%") + reg;
}

Instr make_op(Opcode op, std::string def, std::vector<Operand> operands, PredRef guard) {
  Instr in;
  in.op = op;
  in.def = std::move(def);
  in.operands = std::move(operands);
  in.guard = std::move(guard);
  return in;
}

Instr make_copy(std::string def, std::string src, PredRef guard) {
  return make_op(Opcode::Mov, std::move(def), {Operand::var(std::move(src))}, std::move(guard));
}

Instr make_phi(std::string def, std::vector<PhiArg> args) {
  Instr in;
  in.op = Opcode::Phi;
  in.def = std::move(def);
  in.phi_args = std::move(args);
  return in;
}

Instr make_psi(std::string def, std::vector<PsiArg> args, PredRef guard) {
  Instr in;
  in.op = Opcode::Psi;
  in.def = std::move(def);
  in.psi_args = std::move(args);
  in.guard = std::move(guard);
  return in;
}

std::size_t Block::first_non_phi() const {
  std::size_t i = 0;
  while (i < instrs.size() && instrs[i].is_phi()) ++i;
  return i;
}

int Function::block_index(std::string_view label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> Function::successors(std::size_t block) const {
  std::vector<std::string> out;
  const auto& b = blocks.at(block);
  if (b.instrs.empty()) return out;
  const auto& t = b.terminator();
  if (t.op == Opcode::Br) {
    if (t.operands.size() == 3) {
      out.push_back(t.operands[1].name);
      if (t.operands[2].name != t.operands[1].name) out.push_back(t.operands[2].name);
    }
  } else if (t.op == Opcode::Goto) {
    if (!t.operands.empty()) out.push_back(t.operands[0].name);
  }
  return out;
}

const Function* Module::find(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

void for_each_use(const Instr& in, const std::function<void(const std::string&)>& fn) {
  if (!in.guard.is_true()) fn(in.guard.reg);
  for (const auto& o : in.operands)
    if (o.is_var()) fn(o.name);
  for (const auto& a : in.phi_args) fn(a.value);
  for (const auto& a : in.psi_args) {
    if (!a.pred.is_true()) fn(a.pred.reg);
    fn(a.value);
  }
}

void for_each_use(Instr& in, const std::function<void(std::string&)>& fn) {
  if (!in.guard.is_true()) fn(in.guard.reg);
  for (auto& o : in.operands)
    if (o.is_var()) fn(o.name);
  for (auto& a : in.phi_args) fn(a.value);
  for (auto& a : in.psi_args) {
    if (!a.pred.is_true()) fn(a.pred.reg);
    fn(a.value);
  }
}

void replace_uses(Instr& in, const std::string& from, const std::string& to) {
  for_each_use(in, [&](std::string& v) {
    if (v == from) v = to;
  });
}

void replace_uses(Function& f, const std::string& from, const std::string& to) {
  for (auto& b : f.blocks)
    for (auto& in : b.instrs) replace_uses(in, from, to);
}

std::map<std::string, Pos> definition_sites(const Function& f) {
  std::map<std::string, Pos> sites;
  const int n = static_cast<int>(f.params.size());
  for (int i = 0; i < n; ++i) sites.emplace(f.params[i].name, Pos{0, i - n});
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    const auto& instrs = f.blocks[b].instrs;
    for (std::size_t i = 0; i < instrs.size(); ++i)
      if (!instrs[i].def.empty())
        sites.emplace(instrs[i].def, Pos{static_cast<int>(b), static_cast<int>(i)});
  }
  return sites;
}

NameGen::NameGen(const Function& f) {
  for (const auto& p : f.params) used_.insert(p.name);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs) {
      if (!in.def.empty()) used_.insert(in.def);
      for_each_use(in, [&](const std::string& v) { used_.insert(v); });
    }
}

std::string NameGen::fresh(std::string_view base) {
  // Strip a trailing ".<digits>" so repeated renaming stays readable.
  std::string root(base);
  if (auto dot = root.rfind('.'); dot != std::string::npos && dot + 1 < root.size()) {
    bool digits = true;
    for (std::size_t i = dot + 1; i < root.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(root[i]))) digits = false;
    if (digits) root.resize(dot);
  }
  if (root.empty()) root = "t";
  int& counter = counters_[root];
  for (;;) {
    std::string candidate = root + "." + std::to_string(++counter);
    if (used_.insert(candidate).second) return candidate;
  }
}

std::size_t count_copies(const Function& f) {
  std::size_t n = 0;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_copy()) ++n;
  return n;
}

}  // namespace psikit
