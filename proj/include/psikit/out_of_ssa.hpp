// Leaving psi-SSA: psi-normalize, psi-congruence, phi-congruence, then
// renaming every congruence class to one name and dropping phis and psis.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "psikit/analysis.hpp"
#include "psikit/ir.hpp"

namespace psikit {

struct OutOfSsaOptions {
  bool reorder_disjoint = true;       // swap out-of-order args with disjoint predicates
  bool disjoint_interference = true;  // no edge between defs under disjoint guards
  bool left_only = true;              // repair only the left arg of an interfering pair
  bool ignore_result = true;          // arg/result overlaps need no repair
  bool phi_naive = false;             // copy every phi resource

  static OutOfSsaOptions none() { return {false, false, false, false, false}; }
};

struct PassStats {
  std::size_t copies_normalize = 0;
  std::size_t copies_psi_congruence = 0;
  std::size_t copies_phi_congruence = 0;
  std::size_t total_copies = 0;
  // psis and phis redone with the naive repair by to_cssa
  std::size_t naive_psis = 0;
  std::size_t basic_psis = 0;  // psis redone with the basic rule
  std::size_t naive_phis = 0;

  std::size_t inserted() const { return copies_normalize + copies_psi_congruence + copies_phi_congruence; }
  PassStats& operator+=(const PassStats& o);
};

class CongruenceClasses {
 public:
  const std::string& find(const std::string& v);
  void unite(const std::string& a, const std::string& b);
  bool same(const std::string& a, const std::string& b) { return find(a) == find(b); }
  /// Members of the class of `v` (just `v` when never united).
  std::set<std::string> members(const std::string& v);
  /// Every class with more than one member, keyed by union-find root.
  std::map<std::string, std::set<std::string>> classes();

 private:
  std::map<std::string, std::string> parent_;
  std::map<std::string, std::set<std::string>> members_;
};

class ClassInterferenceDetected : public Error {
 public:
  using Error::Error;
};

/// Puts every psi in normalized form by inserting guarded copies (or
/// swapping disjoint arguments). Returns the number of copies inserted.
std::size_t psi_normalize(Function& f, bool reorder_disjoint);

/// Grows one class per psi, repairing interfering arguments (and the
/// result) with guarded copies. Returns the number of copies inserted.
std::size_t psi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts);

// Per-psi repair used by the to_cssa fallback. Basic is the paper rule with
// left_only and ignore_result off; Naive copies every argument right before
// the psi.
enum class PsiRepair { Paper, Basic, Naive };

/// Same, with per-psi repair modes (missing names use Paper). `psi_defs`
/// receives the final result name of each psi (keyed by its original name).
std::size_t psi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts,
                           const std::map<std::string, PsiRepair>& modes,
                           std::map<std::string, std::string>* psi_defs);

/// Extends the classes with phi resources, copying interfering resources in
/// the predecessor (arguments) or after the phi section (results).
std::size_t phi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts);
std::size_t phi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts,
                           const std::set<std::string>& naive, std::map<std::string, std::string>* phi_defs);

/// Intra-class interference edges still present under the psi liveness
/// rule; with `ignore_result`, a psi result and its last argument may
/// overlap.
std::vector<std::pair<std::string, std::string>> class_conflicts(const Function& f, CongruenceClasses& classes,
                                                                 const OutOfSsaOptions& opts);

/// Throws ClassInterferenceDetected when class_conflicts is not empty.
void rename_and_strip(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts);

/// psi_normalize, psi_congruence and phi_congruence. Psis whose classes
/// still overlap afterwards are redone with the basic rule, then with the
/// naive repair, until the classes are clean.
PassStats to_cssa(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts);

PassStats run_out_of_ssa(Function& f, const OutOfSsaOptions& opts);

}  // namespace psikit
