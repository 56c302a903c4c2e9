// Named pass pipelines and the copy statistics tables.
#pragma once

#include <string>
#include <vector>

#include "psikit/ir.hpp"
#include "psikit/machine.hpp"
#include "psikit/out_of_ssa.hpp"

namespace psikit {

class PipelineError : public Error {
 public:
  using Error::Error;
};

struct PipelineConfig {
  std::vector<std::string> passes;
  MachineModel machine = MachineModel::full();
  OutOfSsaOptions options;
  bool ssa_input = false;                // input is already in SSA form
  std::vector<std::string> dump_after;  // pass names, or "all"
};

struct PassDump {
  std::string pass;
  std::string text;
};

struct PipelineResult {
  Function function;
  PassStats stats;
  bool is_ssa = false;
  std::vector<PassDump> dumps;
};

const std::vector<std::string>& registered_passes();
/// Comma-separated pass list; throws PipelineError on unknown names.
std::vector<std::string> parse_pass_list(const std::string& list);
/// Throws PipelineError when a pass that needs SSA form comes before `ssa`
/// (and the input is not declared SSA), or when `ssa` runs twice.
void check_pipeline(const PipelineConfig& config);
PipelineResult run_pipeline(const Function& f, const PipelineConfig& config);

/// The six pipeline variants of the statistics tables.
struct StatsColumn {
  std::string name;
  bool promotion = false;
  std::vector<std::string> passes;
};
std::vector<StatsColumn> stats_columns(bool ssa_input);

struct StatsTable {
  std::vector<StatsColumn> columns;
  std::vector<PassStats> totals;  // one per column
};

/// Runs every variant over `functions` and sums the per-phase counts.
StatsTable collect_stats(const std::vector<Function>& functions, const PipelineConfig& base);
std::string format_stats(const StatsTable& t, bool csv);

}  // namespace psikit
