#include "psikit/out_of_ssa.hpp"

#include <algorithm>

#include "psikit/predicates.hpp"

namespace psikit {

PassStats& PassStats::operator+=(const PassStats& o) {
  copies_normalize += o.copies_normalize;
  copies_psi_congruence += o.copies_psi_congruence;
  copies_phi_congruence += o.copies_phi_congruence;
  total_copies += o.total_copies;
  naive_psis += o.naive_psis;
  basic_psis += o.basic_psis;
  naive_phis += o.naive_phis;
  return *this;
}

const std::string& CongruenceClasses::find(const std::string& v) {
  auto it = parent_.find(v);
  if (it == parent_.end()) {
    it = parent_.emplace(v, v).first;
    members_[v] = {v};
    return it->second;
  }
  if (it->second == v) return it->second;
  std::string root = find(it->second);
  parent_[v] = root;
  return parent_.find(root)->second;
}

void CongruenceClasses::unite(const std::string& a, const std::string& b) {
  std::string ra = find(a), rb = find(b);
  if (ra == rb) return;
  if (members_[ra].size() < members_[rb].size()) std::swap(ra, rb);
  parent_[rb] = ra;
  members_[ra].insert(members_[rb].begin(), members_[rb].end());
  members_.erase(rb);
}

std::set<std::string> CongruenceClasses::members(const std::string& v) { return members_[find(v)]; }

std::map<std::string, std::set<std::string>> CongruenceClasses::classes() {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& [root, m] : members_)
    if (m.size() > 1) out.emplace(root, m);
  return out;
}

namespace {

// Insert position: the new instruction goes before `index`.
struct Slot {
  int block = 0;
  int index = 0;
};

Slot below(const Function& f, Pos def) {
  if (def.index < 0) return {0, static_cast<int>(f.blocks[0].first_non_phi())};
  if (f.blocks[def.block].instrs[def.index].is_phi())
    return {def.block, static_cast<int>(f.blocks[def.block].first_non_phi())};
  return {def.block, def.index + 1};
}

Slot lowest(const DomTree& dom, Slot a, Slot b) {
  if (a.block == b.block) return a.index >= b.index ? a : b;
  return dom.dominates(a.block, b.block) ? b : a;
}

void insert_at(Function& f, Slot s, Instr in) {
  auto& instrs = f.blocks[s.block].instrs;
  instrs.insert(instrs.begin() + s.index, std::move(in));
}

// Psi (or phi) definitions in dominator-tree preorder, then block order.
std::vector<std::string> ordered_defs(const Function& f, const DomTree& dom, Opcode op) {
  std::vector<std::string> out;
  for (int b : dom.preorder())
    for (const auto& in : f.blocks[b].instrs)
      if (in.op == op) out.push_back(in.def);
  return out;
}

Instr* find_def(Function& f, const std::string& v) {
  for (auto& b : f.blocks)
    for (auto& in : b.instrs)
      if (in.def == v) return &in;
  return nullptr;
}

Pos site_of(const Function& f, const std::string& v) {
  for (std::size_t b = 0; b < f.blocks.size(); ++b)
    for (std::size_t i = 0; i < f.blocks[b].instrs.size(); ++i)
      if (f.blocks[b].instrs[i].def == v) return {static_cast<int>(b), static_cast<int>(i)};
  throw Error("no definition of %" + v);
}

bool classes_interfere(const InterferenceGraph& ig, CongruenceClasses& cc, const std::string& a,
                       const std::string& b) {
  if (cc.same(a, b)) return false;
  const std::string rb = cc.find(b);
  for (const auto& x : cc.members(a))
    for (const auto& n : ig.neighbors(x))
      if (cc.find(n) == rb) return true;
  return false;
}

}  // namespace

std::size_t psi_normalize(Function& f, bool reorder_disjoint) {
  DomTree dom(f);
  GuardEnv env = guard_env_for(f);
  NameGen names(f);
  std::size_t copies = 0;
  for (const auto& name : ordered_defs(f, dom, Opcode::Psi)) {
    std::size_t guard = 0;
    for (std::size_t i = 0;;) {
      DefInfo defs(f);
      Pos at = site_of(f, name);
      auto& args = f.blocks[at.block].instrs[at.index].psi_args;
      if (i >= args.size()) break;
      auto pred_slot = [&](const PredRef& p, Slot s) {
        if (!p.is_true() && defs.has(p.reg)) s = lowest(dom, s, below(f, defs.site(p.reg)));
        return s;
      };
      // Predicate of the argument must match its definition's guard.
      if (!defs.has(args[i].value)) throw Error("psi %" + name + " reads undefined %" + args[i].value);
      if (!domain_equivalent(env.of(args[i].pred), env.of(defs.def_pred(args[i].value)), env)) {
        const PsiArg a = args[i];
        std::string t = names.fresh(a.value);
        Slot s = pred_slot(a.pred, below(f, defs.site(a.value)));
        args[i].value = t;
        insert_at(f, s, make_copy(t, a.value, a.pred));
        ++copies;
        continue;
      }
      if (i + 1 >= args.size()) break;
      if (!defs.has(args[i + 1].value)) throw Error("psi %" + name + " reads undefined %" + args[i + 1].value);
      Pos cur = defs.site(args[i].value);
      if (dom.dominates(defs.resolved_site(args[i + 1].value), cur)) {
        const PsiArg next = args[i + 1];
        bool swap_ok = reorder_disjoint && ++guard < 4 * args.size() * args.size() &&
                       defs.site(next.value) != cur &&
                       !dom.dominates(defs.resolved_site(args[i].value), defs.site(next.value)) &&
                       domain_disjoint(env.of(args[i].pred), env.of(next.pred), env);
        if (swap_ok) {
          std::swap(args[i], args[i + 1]);
          if (i > 0) --i;
          continue;
        }
        std::string t = names.fresh(next.value);
        Slot s = lowest(dom, below(f, cur), below(f, defs.site(next.value)));
        s = pred_slot(next.pred, s);
        args[i + 1].value = t;
        insert_at(f, s, make_copy(t, next.value, next.pred));
        ++copies;
      }
      ++i;
    }
  }
  return copies;
}

std::size_t psi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts,
                           const std::map<std::string, PsiRepair>& modes,
                           std::map<std::string, std::string>* psi_defs) {
  DomTree dom(f);
  GuardEnv env = guard_env_for(f);
  LivenessInfo live = liveness(f);
  InterferenceGraph ig = interference_graph(f, live, env, opts.disjoint_interference);
  NameGen names(f);
  std::size_t copies = 0;
  for (const auto& name : ordered_defs(f, dom, Opcode::Psi)) {
    Instr* psi = find_def(f, name);
    const std::size_t n = psi->psi_args.size();
    // Slots 0..n-1 are the arguments, slot n the result.
    std::vector<std::string> slot(n + 1);
    for (std::size_t k = 0; k < n; ++k) slot[k] = psi->psi_args[k].value;
    slot[n] = psi->def;
    std::vector<std::pair<std::string, std::string>> renamed;  // original -> copy

    auto mode = modes.find(name);
    const PsiRepair how = mode == modes.end() ? PsiRepair::Paper : mode->second;
    if (how == PsiRepair::Naive) {
      // Every argument copied right before the psi: the copies die one
      // after the other, so nothing in the class can overlap.
      Pos at = site_of(f, name);
      const PredRef guard = f.blocks[at.block].instrs[at.index].guard;
      for (std::size_t k = 0; k < n; ++k) {
        const PsiArg arg = f.blocks[at.block].instrs[at.index].psi_args[k];
        std::string t = names.fresh(arg.value);
        insert_at(f, {at.block, at.index}, make_copy(t, arg.value, arg.pred.is_true() ? guard : arg.pred));
        ++at.index;
        f.blocks[at.block].instrs[at.index].psi_args[k].value = t;
        slot[k] = t;
        renamed.push_back({arg.value, t});
        ++copies;
      }
    } else {
      const bool left_only = opts.left_only && how == PsiRepair::Paper;
      const bool ignore_result = opts.ignore_result && how == PsiRepair::Paper;
      std::vector<bool> repair(n + 1, false);
      auto clash = [&](std::size_t a, std::size_t b) { return classes_interfere(ig, classes, slot[a], slot[b]); };
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (clash(i, j)) {
            repair[i] = true;
            if (!left_only) repair[j] = true;
          }
      for (std::size_t i = 0; i < n; ++i) {
        if (!clash(i, n)) continue;
        if (ignore_result) {
          // The last argument becomes the result; any other overlap with the
          // result also overlaps the last argument and is repaired there.
          if (i + 1 == n || clash(i, n - 1)) continue;
          repair[i] = true;
        } else {
          repair[i] = true;
          repair[n] = true;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (!repair[k]) continue;
        DefInfo defs(f);
        const std::string a = slot[k];
        std::string t = names.fresh(a);
        insert_at(f, below(f, defs.site(a)), make_copy(t, a, defs.def_pred(a)));
        psi = find_def(f, name);
        psi->psi_args[k].value = t;
        slot[k] = t;
        renamed.push_back({a, t});
        ++copies;
      }
      if (repair[n]) {
        const std::string x = slot[n];
        std::string t = names.fresh(x);
        Pos at = site_of(f, name);
        Instr& in = f.blocks[at.block].instrs[at.index];
        PredRef guard = in.guard;
        in.def = t;
        insert_at(f, {at.block, at.index + 1}, make_copy(x, t, guard));
        slot[n] = t;
        renamed.push_back({x, t});
        ++copies;
      }
    }
    if (psi_defs) (*psi_defs)[name] = slot[n];
    for (const auto& [orig, copy] : renamed) ig.add_node(copy);
    for (std::size_t k = 1; k <= n; ++k) classes.unite(slot[0], slot[k]);
    // Conservative update: a copy inherits the interferences of the
    // original, except with its own class, and interferes with the original.
    for (const auto& [orig, copy] : renamed) {
      std::set<std::string> nbrs = ig.neighbors(orig);
      for (const auto& v : nbrs)
        if (!classes.same(v, copy)) ig.add_edge(copy, v);
      ig.add_edge(orig, copy);
    }
  }
  return copies;
}

std::size_t psi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts) {
  return psi_congruence(f, classes, opts, {}, nullptr);
}

std::size_t phi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts,
                           const std::set<std::string>& naive, std::map<std::string, std::string>* phi_defs) {
  DomTree dom(f);
  NameGen names(f);
  const LivenessInfo live = liveness(f);
  InterferenceGraph ig = interference_graph(f, live, guard_env_for(f), opts.disjoint_interference);
  std::map<int, std::set<std::string>> copies_at_end;  // per predecessor
  std::size_t copies = 0;
  auto connect = [&](const std::string& t, const std::set<std::string>& others) {
    ig.add_node(t);
    for (const auto& v : others)
      if (v != t) ig.add_edge(t, v);
  };
  // Copies one phi resource; returns the phi's (possibly new) result name.
  auto copy_slot = [&](const std::string& phi_name, std::size_t k) {
    Pos at = site_of(f, phi_name);
    std::string result = phi_name;
    Block& block = f.blocks[at.block];
    Instr& phi = block.instrs[at.index];
    if (k == 0) {
      const std::string x = phi.def;
      std::string t = names.fresh(x);
      phi.def = t;
      result = t;
      std::set<std::string> around = live.live_in[at.block];
      for (std::size_t i = 0; i < block.first_non_phi(); ++i) around.insert(block.instrs[i].def);
      around.insert(x);
      insert_at(f, {at.block, static_cast<int>(block.first_non_phi())}, make_copy(x, t));
      connect(t, around);
    } else {
      PhiArg& arg = phi.phi_args[k - 1];
      const std::string a = arg.value;
      std::string t = names.fresh(a);
      arg.value = t;
      int p = f.block_index(arg.block);
      Block& pred = f.blocks[p];
      std::set<std::string> around = live.live_out[p];
      for_each_use(pred.terminator(), [&](const std::string& v) { around.insert(v); });
      around.insert(a);
      auto& earlier = copies_at_end[p];
      around.insert(earlier.begin(), earlier.end());
      earlier.insert(t);
      insert_at(f, {p, static_cast<int>(pred.instrs.size()) - 1}, make_copy(t, a));
      connect(t, around);
    }
    ++copies;
    return result;
  };
  auto slots_of = [&](const std::string& phi_name) {
    Pos at = site_of(f, phi_name);
    const Instr& phi = f.blocks[at.block].instrs[at.index];
    std::vector<std::string> s{phi.def};
    for (const auto& a : phi.phi_args) s.push_back(a.value);
    return s;
  };

  for (const auto& name : ordered_defs(f, dom, Opcode::Phi)) {
    std::string phi_name = name;
    const std::size_t nslots = slots_of(phi_name).size();
    std::vector<bool> copied(nslots, false);
    if (opts.phi_naive || naive.count(name)) {
      for (std::size_t k = 0; k < nslots; ++k) phi_name = copy_slot(phi_name, k);
    } else {
      // Greedy: copy the resource involved in the most interferences until
      // the classes of the resources are pairwise disjoint.
      for (;;) {
        auto s = slots_of(phi_name);
        std::vector<int> hits(nslots, 0);
        bool any = false;
        for (std::size_t i = 0; i < nslots; ++i)
          for (std::size_t j = i + 1; j < nslots; ++j)
            if (s[i] != s[j] && classes_interfere(ig, classes, s[i], s[j])) {
              ++hits[i];
              ++hits[j];
              any = true;
            }
        if (!any) break;
        std::size_t pick = nslots;
        for (std::size_t k = 0; k < nslots; ++k)
          if (!copied[k] && hits[k] > 0 && (pick == nslots || hits[k] > hits[pick])) pick = k;
        if (pick == nslots) break;  // left to the final class check
        phi_name = copy_slot(phi_name, pick);
        copied[pick] = true;
      }
    }
    if (phi_defs) (*phi_defs)[name] = phi_name;
    auto s = slots_of(phi_name);
    for (std::size_t k = 1; k < s.size(); ++k) classes.unite(s[0], s[k]);
  }
  return copies;
}

std::size_t phi_congruence(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts) {
  return phi_congruence(f, classes, opts, {}, nullptr);
}

std::vector<std::pair<std::string, std::string>> class_conflicts(const Function& f, CongruenceClasses& classes,
                                                                 const OutOfSsaOptions& opts) {
  GuardEnv env = guard_env_for(f);
  LivenessInfo live = liveness(f);
  InterferenceGraph ig = interference_graph(f, live, env, opts.disjoint_interference);
  std::set<std::pair<std::string, std::string>> allowed;
  if (opts.ignore_result)
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        if (in.is_psi()) {
          const std::string& last = in.psi_args.back().value;
          allowed.insert(std::minmax(in.def, last));
        }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [v, nbrs] : ig.adjacency())
    for (const auto& w : nbrs)
      if (v < w && classes.same(v, w) && !allowed.count({v, w})) out.push_back({v, w});
  return out;
}

void rename_and_strip(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts) {
  auto conflicts = class_conflicts(f, classes, opts);
  if (!conflicts.empty())
    throw ClassInterferenceDetected("@" + f.name + ": %" + conflicts[0].first + " and %" + conflicts[0].second +
                                    " interfere inside one congruence class");
  std::set<std::string> merge_results;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_phi() || in.is_psi()) merge_results.insert(in.def);
  std::map<std::string, std::string> rep;
  for (const auto& [root, members] : classes.classes()) {
    std::string best;
    for (const auto& m : members)
      if (merge_results.count(m) && (best.empty() || m < best)) best = m;
    if (best.empty()) best = *members.begin();
    for (const auto& m : members) rep[m] = best;
  }
  auto map_name = [&](std::string& v) {
    if (auto it = rep.find(v); it != rep.end()) v = it->second;
  };
  for (auto& p : f.params) map_name(p.name);
  for (auto& b : f.blocks) {
    std::erase_if(b.instrs, [](const Instr& in) { return in.is_phi() || in.is_psi(); });
    for (auto& in : b.instrs) {
      if (!in.def.empty()) map_name(in.def);
      for_each_use(in, map_name);
    }
  }
}

PassStats to_cssa(Function& f, CongruenceClasses& classes, const OutOfSsaOptions& opts) {
  PassStats s;
  s.copies_normalize = psi_normalize(f, opts.reorder_disjoint);
  const Function normalized = f;
  std::map<std::string, PsiRepair> psi_mode;
  std::set<std::string> naive_phi;
  const bool has_basic = opts.left_only || opts.ignore_result;
  // One step up the ladder Paper -> Basic -> Naive; false when already naive.
  auto escalate_psi = [&](const std::string& name) {
    auto it = psi_mode.find(name);
    PsiRepair cur = it == psi_mode.end() ? PsiRepair::Paper : it->second;
    if (cur == PsiRepair::Naive) return false;
    psi_mode[name] = cur == PsiRepair::Paper && has_basic ? PsiRepair::Basic : PsiRepair::Naive;
    return true;
  };
  for (;;) {
    f = normalized;
    classes = CongruenceClasses();
    std::map<std::string, std::string> psi_defs, phi_defs;
    s.copies_psi_congruence = psi_congruence(f, classes, opts, psi_mode, &psi_defs);
    s.copies_phi_congruence = phi_congruence(f, classes, opts, naive_phi, &phi_defs);
    auto conflicts = class_conflicts(f, classes, opts);
    if (conflicts.empty()) break;
    // The incremental repair missed an overlap (the conservative graph
    // update, or a copy stretching a value into an older class). Psis
    // reading or defining the overlapping pair move one step towards the
    // naive repair, phis go naive; the whole class when that changes nothing.
    std::map<std::string, std::string> psi_name, phi_name;  // current def -> original
    for (const auto& [name, def] : psi_defs) psi_name[def] = name;
    for (const auto& [name, def] : phi_defs) phi_name[def] = name;
    std::multimap<std::string, std::pair<bool, std::string>> owners;  // var -> (is psi, original)
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs) {
        if (in.is_psi() && psi_name.count(in.def)) {
          const std::string& n = psi_name[in.def];
          owners.insert({in.def, {true, n}});
          for (const auto& a : in.psi_args) owners.insert({a.value, {true, n}});
        } else if (in.is_phi() && phi_name.count(in.def)) {
          const std::string& n = phi_name[in.def];
          owners.insert({in.def, {false, n}});
          for (const auto& a : in.phi_args) owners.insert({a.value, {false, n}});
        }
      }
    std::set<std::pair<bool, std::string>> hit;
    for (const auto& [v, w] : conflicts)
      for (const std::string* x : {&v, &w}) {
        auto [lo, hi] = owners.equal_range(*x);
        for (auto it = lo; it != hi; ++it) hit.insert(it->second);
      }
    bool grew = false;
    for (const auto& [is_psi, name] : hit) grew = (is_psi ? escalate_psi(name) : naive_phi.insert(name).second) || grew;
    if (!grew) {
      for (const auto& [v, w] : conflicts) {
        for (const auto& [name, def] : psi_defs)
          if (classes.same(def, v)) grew = escalate_psi(name) || grew;
        for (const auto& [name, def] : phi_defs)
          if (classes.same(def, v)) grew = naive_phi.insert(name).second || grew;
      }
    }
    if (!grew) break;
  }
  s.naive_psis = 0;
  for (const auto& [name, mode] : psi_mode) {
    s.naive_psis += mode == PsiRepair::Naive;
    s.basic_psis += mode == PsiRepair::Basic;
  }
  s.naive_phis = naive_phi.size();
  s.total_copies = count_copies(f);
  return s;
}

PassStats run_out_of_ssa(Function& f, const OutOfSsaOptions& opts) {
  CongruenceClasses classes;
  PassStats s = to_cssa(f, classes, opts);
  rename_and_strip(f, classes, opts);
  s.total_copies = count_copies(f);
  return s;
}

}  // namespace psikit
