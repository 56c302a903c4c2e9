// CFG analyses: dominator tree, dominance frontiers, liveness under the psi
// use-point rule, and the variable interference graph.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "psikit/ir.hpp"
#include "psikit/predicates.hpp"

namespace psikit {

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string function;
  std::string message;
};

struct Cfg {
  std::vector<std::vector<int>> succs;
  std::vector<std::vector<int>> preds;

  static Cfg build(const Function& f);
};

/// Drops blocks the entry cannot reach (and phi arguments naming them).
/// Returns one warning per dropped block.
std::vector<Diagnostic> remove_unreachable(Function& f);

class DomTree {
 public:
  explicit DomTree(const Function& f);
  DomTree(const Function& f, const Cfg& cfg);

  /// Immediate dominator; -1 for the entry and for unreachable blocks.
  int idom(int block) const { return idom_[block]; }
  bool reachable(int block) const { return block == 0 || idom_[block] >= 0; }
  /// Reflexive block dominance.
  bool dominates(int a, int b) const;
  /// Reflexive instruction-level dominance; within a block the earlier
  /// position dominates.
  bool dominates(Pos a, Pos b) const;
  int depth(int block) const { return depth_[block]; }

  const std::vector<int>& preorder() const { return preorder_; }
  const std::vector<int>& children(int block) const { return children_[block]; }
  std::vector<std::set<int>> frontiers(const Cfg& cfg) const;

 private:
  void compute(const Cfg& cfg);

  std::vector<int> idom_;
  std::vector<std::vector<int>> children_;
  std::vector<int> preorder_;
  std::vector<int> pre_;
  std::vector<int> post_;
  std::vector<int> depth_;
};

/// Definition sites (see definition_sites) together with the dominance
/// order helpers needed by the psi algorithms.
class DefInfo {
 public:
  explicit DefInfo(const Function& f);

  bool has(const std::string& v) const { return sites_.count(v) != 0; }
  Pos site(const std::string& v) const { return sites_.at(v); }
  /// Defining instruction; nullptr for parameters and unknown names.
  const Instr* instr(const std::string& v) const;
  /// Guard on the definition (TRUE for params, phis and unguarded defs).
  PredRef def_pred(const std::string& v) const;
  /// Where the value of `v` comes into existence for psi ordering purposes:
  /// psi-defined values are resolved through their first argument.
  Pos resolved_site(const std::string& v) const;

 private:
  const Function* f_;
  std::map<std::string, Pos> sites_;
};

struct LivenessInfo {
  std::vector<std::set<std::string>> live_in;   // before the phi section
  std::vector<std::set<std::string>> live_out;
  /// Extra use events created by the psi rule: (block, index) -> vars
  /// used just before that instruction.
  std::map<Pos, std::set<std::string>> relocated_uses;
};

/// Backward liveness where a phi argument is live-out of its predecessor,
/// phi results are defined at the block head, and psi argument i is used
/// at the definition of argument i+1 (the last argument at the psi).
LivenessInfo liveness(const Function& f);

class InterferenceGraph {
 public:
  void add_node(const std::string& v) { adj_[v]; }
  void add_edge(const std::string& a, const std::string& b);
  bool interferes(const std::string& a, const std::string& b) const;
  const std::set<std::string>& neighbors(const std::string& v) const;
  const std::map<std::string, std::set<std::string>>& adjacency() const { return adj_; }
  bool refined() const { return refined_; }
  void set_refined(bool r) { refined_ = r; }

 private:
  std::map<std::string, std::set<std::string>> adj_;
  bool refined_ = false;
};

/// Edge (x, y) iff one is live just after the other's definition, unless
/// `refine_disjoint` and both definitions are guarded by provably disjoint
/// predicates.
InterferenceGraph interference_graph(const Function& f, const LivenessInfo& live, const GuardEnv& env,
                                     bool refine_disjoint);

std::string dump_liveness(const Function& f, const LivenessInfo& live);
std::string dump_interference(const InterferenceGraph& ig);

}  // namespace psikit
