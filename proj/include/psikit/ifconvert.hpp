// If-conversion of diamond and triangle regions into predicated straight
// line code, with the merge phis turned into psis.
#pragma once

#include <string>
#include <vector>

#include "psikit/analysis.hpp"
#include "psikit/ir.hpp"
#include "psikit/machine.hpp"

namespace psikit {

struct Region {
  enum class Shape { Diamond, Triangle };
  Shape shape = Shape::Diamond;
  int head = -1;
  std::vector<int> then_arm;  // taken when cond holds
  std::vector<int> else_arm;  // taken when cond is false
  int merge = -1;
  std::string cond;
};

class NotConvertible : public Error {
 public:
  using Error::Error;
};

/// Convertible regions, deepest head first. A region qualifies when every
/// arm instruction can be predicated or speculated on `machine`.
std::vector<Region> find_regions(const Function& f, const DomTree& dom, const MachineModel& machine);

/// Linearizes one region into its head block (SSA input). Arm definitions
/// are guarded by the arm predicate when predicable, otherwise speculated;
/// merge phis become psis ordered by definition dominance.
void if_convert(Function& f, const Region& region, const MachineModel& machine);

/// Converts regions until none is left, then inlines chained psis.
/// Returns the number of regions converted.
std::size_t if_convert_all(Function& f, const MachineModel& machine);

}  // namespace psikit
