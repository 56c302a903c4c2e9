// Target model: which opcodes accept a guard and which may execute
// speculatively.
#pragma once

#include <set>
#include <string>

#include "psikit/ir.hpp"

namespace psikit {

struct MachineModel {
  std::set<Opcode> predicable;
  std::set<Opcode> speculatable;
  bool has_select = true;

  /// Every real opcode is predicable; everything but memory access is
  /// speculatable.
  static MachineModel full();
  /// Only mov, load, store and select accept a guard.
  static MachineModel partial();

  bool can_predicate(Opcode op) const { return predicable.count(op) != 0; }
  bool can_speculate(Opcode op) const { return speculatable.count(op) != 0; }
};

/// Parses "add,sub,mov" into an opcode set; throws Error on unknown names.
std::set<Opcode> parse_opcode_list(const std::string& list);

}  // namespace psikit
