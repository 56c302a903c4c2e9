#include "psikit/machine.hpp"

#include <sstream>

namespace psikit {

namespace {

const std::set<Opcode> kComputational{Opcode::Const, Opcode::Mov,   Opcode::Add,   Opcode::Sub,    Opcode::Mul,
                                      Opcode::Neg,   Opcode::CmpEq, Opcode::CmpLt, Opcode::CmpLe,  Opcode::And,
                                      Opcode::Or,    Opcode::Not,   Opcode::Select, Opcode::Load, Opcode::Store};

std::set<Opcode> without_memory() {
  auto ops = kComputational;
  ops.erase(Opcode::Load);
  ops.erase(Opcode::Store);
  return ops;
}

}  // namespace

MachineModel MachineModel::full() { return {kComputational, without_memory(), true}; }

MachineModel MachineModel::partial() {
  return {{Opcode::Mov, Opcode::Load, Opcode::Store, Opcode::Select}, without_memory(), true};
}

std::set<Opcode> parse_opcode_list(const std::string& list) {
  std::set<Opcode> ops;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto op = opcode_from_name(item);
    if (!op || is_terminator(*op) || *op == Opcode::Phi || *op == Opcode::Psi) throw Error("unknown opcode '" + item + "'");
    ops.insert(*op);
  }
  return ops;
}

}  // namespace psikit
