// Predicated IR: modules, functions, blocks and guarded instructions over
// named virtual registers.
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psikit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Opcode {
  Const,
  Mov,
  Add,
  Sub,
  Mul,
  Neg,
  CmpEq,
  CmpLt,
  CmpLe,
  And,
  Or,
  Not,
  Select,
  Load,
  Store,
  Br,
  Goto,
  Ret,
  Phi,
  Psi,
};

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);
bool is_terminator(Opcode op);
/// cmp_*, and, or, not: the opcodes whose result is a guard register.
bool defines_guard(Opcode op);

/// A predicate reference: the constant TRUE, or a guard register read with
/// a polarity. Compound predicates are computed by guard-defining
/// instructions, never written inline.
struct PredRef {
  std::string reg;  // empty means TRUE
  bool negated = false;

  static PredRef always() { return {}; }
  static PredRef of(std::string r, bool neg = false) { return {std::move(r), neg}; }

  bool is_true() const { return reg.empty(); }
  PredRef inverted() const { return {reg, !negated}; }
  std::string str() const;

  auto operator<=>(const PredRef&) const = default;
};

struct Operand {
  enum class Kind { Var, Imm, Label };
  Kind kind = Kind::Imm;
  std::string name;  // variable or block label
  std::int64_t imm = 0;

  static Operand var(std::string n) { return {Kind::Var, std::move(n), 0}; }
  static Operand immediate(std::int64_t v) { return {Kind::Imm, {}, v}; }
  static Operand label(std::string n) { return {Kind::Label, std::move(n), 0}; }

  bool is_var() const { return kind == Kind::Var; }
  bool is_imm() const { return kind == Kind::Imm; }
  bool is_label() const { return kind == Kind::Label; }

  bool operator==(const Operand&) const = default;
};

struct PhiArg {
  std::string block;
  std::string value;
  bool operator==(const PhiArg&) const = default;
};

struct PsiArg {
  PredRef pred;
  std::string value;
  bool operator==(const PsiArg&) const = default;
};

struct Instr {
  Opcode op = Opcode::Const;
  PredRef guard;    // TRUE when unguarded
  std::string def;  // empty when the instruction defines nothing
  std::vector<Operand> operands;
  std::vector<PhiArg> phi_args;
  std::vector<PsiArg> psi_args;

  bool is_phi() const { return op == Opcode::Phi; }
  bool is_psi() const { return op == Opcode::Psi; }
  bool is_terminator() const { return psikit::is_terminator(op); }
  bool is_copy() const { return op == Opcode::Mov && operands.size() == 1 && operands[0].is_var(); }

  bool operator==(const Instr&) const = default;
};

Instr make_op(Opcode op, std::string def, std::vector<Operand> operands, PredRef guard = {});
Instr make_copy(std::string def, std::string src, PredRef guard = {});
Instr make_phi(std::string def, std::vector<PhiArg> args);
Instr make_psi(std::string def, std::vector<PsiArg> args, PredRef guard = {});

struct Block {
  std::string label;
  std::vector<Instr> instrs;

  const Instr& terminator() const { return instrs.back(); }
  Instr& terminator() { return instrs.back(); }
  /// Index of the first non-phi instruction.
  std::size_t first_non_phi() const;

  bool operator==(const Block&) const = default;
};

struct Param {
  std::string name;
  bool guard = false;
  bool operator==(const Param&) const = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<Block> blocks;  // blocks[0] is the entry

  int block_index(std::string_view label) const;  // -1 when absent
  std::vector<std::string> successors(std::size_t block) const;

  bool operator==(const Function&) const = default;
};

struct Module {
  std::vector<Function> functions;

  const Function* find(std::string_view name) const;
  bool operator==(const Module&) const = default;
};

/// Visit every variable read by an instruction, including the guard
/// register, psi predicate registers and phi/psi argument values.
void for_each_use(const Instr& in, const std::function<void(const std::string&)>& fn);
void for_each_use(Instr& in, const std::function<void(std::string&)>& fn);

/// Rename every read of `from` to `to` in the instruction.
void replace_uses(Instr& in, const std::string& from, const std::string& to);
void replace_uses(Function& f, const std::string& from, const std::string& to);

/// Position of an instruction. Parameters are modelled as definitions at
/// negative indices of the entry block, in declaration order.
struct Pos {
  int block = 0;
  int index = 0;
  auto operator<=>(const Pos&) const = default;
};

/// Definition site of every variable (first one in non-SSA code).
std::map<std::string, Pos> definition_sites(const Function& f);

/// Fresh-name generator that never collides with names already present in
/// the function.
class NameGen {
 public:
  explicit NameGen(const Function& f);
  std::string fresh(std::string_view base);
  void reserve(const std::string& name) { used_.insert(name); }

 private:
  std::set<std::string> used_;
  std::map<std::string, int, std::less<>> counters_;
};

/// Count of register-to-register `mov` instructions.
std::size_t count_copies(const Function& f);

}  // namespace psikit
