#include "psikit/analysis.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace psikit {

Cfg Cfg::build(const Function& f) {
  Cfg cfg;
  const std::size_t n = f.blocks.size();
  cfg.succs.resize(n);
  cfg.preds.resize(n);
  for (std::size_t b = 0; b < n; ++b)
    for (const auto& label : f.successors(b)) {
      int s = f.block_index(label);
      if (s < 0) continue;
      cfg.succs[b].push_back(s);
      cfg.preds[s].push_back(static_cast<int>(b));
    }
  return cfg;
}

std::vector<Diagnostic> remove_unreachable(Function& f) {
  std::vector<Diagnostic> diags;
  if (f.blocks.empty()) return diags;
  Cfg cfg = Cfg::build(f);
  std::vector<bool> seen(f.blocks.size(), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int b = stack.back();
    stack.pop_back();
    for (int s : cfg.succs[b])
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
  }
  std::set<std::string> dead;
  std::vector<Block> kept;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    if (seen[b]) {
      kept.push_back(std::move(f.blocks[b]));
    } else {
      dead.insert(f.blocks[b].label);
      diags.push_back({Diagnostic::Severity::Warning, f.name, "unreachable block " + f.blocks[b].label + " removed"});
    }
  }
  f.blocks = std::move(kept);
  if (!dead.empty())
    for (auto& b : f.blocks)
      for (auto& in : b.instrs)
        if (in.is_phi())
          std::erase_if(in.phi_args, [&](const PhiArg& a) { return dead.count(a.block) != 0; });
  return diags;
}

DomTree::DomTree(const Function& f) { compute(Cfg::build(f)); }
DomTree::DomTree(const Function&, const Cfg& cfg) { compute(cfg); }

void DomTree::compute(const Cfg& cfg) {
  const int n = static_cast<int>(cfg.succs.size());
  idom_.assign(n, -1);
  children_.assign(n, {});
  pre_.assign(n, -1);
  post_.assign(n, -1);
  depth_.assign(n, 0);
  preorder_.clear();
  if (n == 0) return;

  // Reverse postorder from the entry.
  std::vector<int> rpo;
  std::vector<int> state(n, 0);
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < cfg.succs[b].size()) {
      int s = cfg.succs[b][next++];
      if (!state[s]) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      rpo.push_back(b);
      stack.pop_back();
    }
  }
  std::reverse(rpo.begin(), rpo.end());
  std::vector<int> order(n, -1);
  for (std::size_t i = 0; i < rpo.size(); ++i) order[rpo[i]] = static_cast<int>(i);

  // Iterative dominators over the RPO (Cooper, Harvey and Kennedy).
  std::vector<int> doms(n, -1);
  doms[0] = 0;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (order[a] > order[b]) a = doms[a];
      while (order[b] > order[a]) b = doms[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < rpo.size(); ++i) {
      int b = rpo[i];
      int candidate = -1;
      for (int p : cfg.preds[b]) {
        if (doms[p] < 0) continue;
        candidate = candidate < 0 ? p : intersect(p, candidate);
      }
      if (candidate != doms[b]) {
        doms[b] = candidate;
        changed = true;
      }
    }
  }
  for (int b = 1; b < n; ++b) idom_[b] = doms[b];
  for (int b = 1; b < n; ++b)
    if (idom_[b] >= 0) children_[idom_[b]].push_back(b);

  int clock = 0;
  std::vector<std::pair<int, std::size_t>> walk{{0, 0}};
  pre_[0] = clock++;
  preorder_.push_back(0);
  while (!walk.empty()) {
    auto& [b, next] = walk.back();
    if (next < children_[b].size()) {
      int c = children_[b][next++];
      pre_[c] = clock++;
      depth_[c] = depth_[b] + 1;
      preorder_.push_back(c);
      walk.push_back({c, 0});
    } else {
      post_[b] = clock++;
      walk.pop_back();
    }
  }
}

bool DomTree::dominates(int a, int b) const {
  if (a == b) return true;
  if (!reachable(a) || !reachable(b)) return false;
  return pre_[a] <= pre_[b] && post_[b] <= post_[a];
}

bool DomTree::dominates(Pos a, Pos b) const {
  if (a.block == b.block) return a.index <= b.index;
  return dominates(a.block, b.block);
}

std::vector<std::set<int>> DomTree::frontiers(const Cfg& cfg) const {
  const int n = static_cast<int>(cfg.preds.size());
  std::vector<std::set<int>> df(n);
  for (int b = 0; b < n; ++b) {
    if (cfg.preds[b].size() < 2 || !reachable(b)) continue;
    for (int p : cfg.preds[b]) {
      if (!reachable(p)) continue;
      int runner = p;
      while (runner >= 0 && runner != idom_[b]) {
        df[runner].insert(b);
        runner = idom_[runner];
      }
    }
  }
  return df;
}

DefInfo::DefInfo(const Function& f) : f_(&f), sites_(definition_sites(f)) {}

const Instr* DefInfo::instr(const std::string& v) const {
  auto it = sites_.find(v);
  if (it == sites_.end() || it->second.index < 0) return nullptr;
  return &f_->blocks[it->second.block].instrs[it->second.index];
}

PredRef DefInfo::def_pred(const std::string& v) const {
  const Instr* in = instr(v);
  if (!in || in->is_phi()) return PredRef::always();
  return in->guard;
}

Pos DefInfo::resolved_site(const std::string& v) const {
  std::string cur = v;
  std::set<std::string> seen;
  for (;;) {
    const Instr* in = instr(cur);
    if (!in || !in->is_psi() || in->psi_args.empty() || !seen.insert(cur).second) break;
    cur = in->psi_args.front().value;
  }
  auto it = sites_.find(cur);
  return it == sites_.end() ? Pos{0, 0} : it->second;
}

namespace {

// Use events of one function under the psi rule.
struct UseMap {
  // Uses just before instruction (b, i), excluding phis.
  std::map<Pos, std::set<std::string>> at;
  // Uses just before the phi section of a block.
  std::vector<std::set<std::string>> head;
  // Phi argument uses: (pred block, succ block) -> vars live-out of pred.
  std::vector<std::set<std::string>> phi_out;
  std::map<Pos, std::set<std::string>> relocated;
};

UseMap collect_uses(const Function& f) {
  UseMap u;
  const std::size_t n = f.blocks.size();
  u.head.resize(n);
  u.phi_out.resize(n);
  DefInfo defs(f);
  auto add_at = [&](Pos p, const std::string& v, bool relocated) {
    if (p.index < 0) {
      u.head[p.block].insert(v);
    } else if (f.blocks[p.block].instrs[p.index].is_phi()) {
      u.head[p.block].insert(v);
    } else {
      u.at[p].insert(v);
    }
    if (relocated) u.relocated[p].insert(v);
  };
  for (std::size_t b = 0; b < n; ++b) {
    const auto& instrs = f.blocks[b].instrs;
    for (std::size_t i = 0; i < instrs.size(); ++i) {
      const Instr& in = instrs[i];
      Pos here{static_cast<int>(b), static_cast<int>(i)};
      if (in.is_phi()) {
        for (const auto& a : in.phi_args) {
          int p = f.block_index(a.block);
          if (p >= 0) u.phi_out[p].insert(a.value);
        }
        continue;
      }
      if (in.is_psi()) {
        if (!in.guard.is_true()) add_at(here, in.guard.reg, false);
        for (const auto& a : in.psi_args)
          if (!a.pred.is_true()) add_at(here, a.pred.reg, false);
        const std::size_t k = in.psi_args.size();
        for (std::size_t j = 0; j < k; ++j) {
          if (j + 1 == k) {
            add_at(here, in.psi_args[j].value, false);
          } else {
            const std::string& next = in.psi_args[j + 1].value;
            if (!defs.has(next)) {
              add_at(here, in.psi_args[j].value, false);
            } else {
              add_at(defs.resolved_site(next), in.psi_args[j].value, true);
            }
          }
        }
        continue;
      }
      for_each_use(in, [&](const std::string& v) { add_at(here, v, false); });
    }
  }
  return u;
}

template <typename OnDef>
std::set<std::string> scan_block(const Function& f, const UseMap& uses, int b, std::set<std::string> live,
                                 OnDef on_def) {
  const auto& instrs = f.blocks[b].instrs;
  const int first = static_cast<int>(f.blocks[b].first_non_phi());
  for (int i = static_cast<int>(instrs.size()) - 1; i >= first; --i) {
    const Instr& in = instrs[i];
    if (!in.def.empty()) {
      on_def(in.def, live);
      live.erase(in.def);
    }
    if (auto it = uses.at.find(Pos{b, i}); it != uses.at.end()) live.insert(it->second.begin(), it->second.end());
  }
  return live;
}

}  // namespace

LivenessInfo liveness(const Function& f) {
  const int n = static_cast<int>(f.blocks.size());
  LivenessInfo info;
  info.live_in.assign(n, {});
  info.live_out.assign(n, {});
  UseMap uses = collect_uses(f);
  info.relocated_uses = uses.relocated;
  Cfg cfg = Cfg::build(f);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = n - 1; b >= 0; --b) {
      std::set<std::string> out;
      for (int s : cfg.succs[b]) out.insert(info.live_in[s].begin(), info.live_in[s].end());
      out.insert(uses.phi_out[b].begin(), uses.phi_out[b].end());
      std::set<std::string> live = scan_block(f, uses, b, out, [](const std::string&, const std::set<std::string>&) {});
      for (std::size_t i = 0; i < f.blocks[b].first_non_phi(); ++i) live.erase(f.blocks[b].instrs[i].def);
      live.insert(uses.head[b].begin(), uses.head[b].end());
      if (out != info.live_out[b] || live != info.live_in[b]) {
        info.live_out[b] = std::move(out);
        info.live_in[b] = std::move(live);
        changed = true;
      }
    }
  }
  return info;
}

void InterferenceGraph::add_edge(const std::string& a, const std::string& b) {
  if (a == b) return;
  adj_[a].insert(b);
  adj_[b].insert(a);
}

bool InterferenceGraph::interferes(const std::string& a, const std::string& b) const {
  auto it = adj_.find(a);
  return it != adj_.end() && it->second.count(b) != 0;
}

const std::set<std::string>& InterferenceGraph::neighbors(const std::string& v) const {
  static const std::set<std::string> empty;
  auto it = adj_.find(v);
  return it == adj_.end() ? empty : it->second;
}

InterferenceGraph interference_graph(const Function& f, const LivenessInfo& live, const GuardEnv& env,
                                     bool refine_disjoint) {
  InterferenceGraph ig;
  ig.set_refined(refine_disjoint);
  DefInfo defs(f);
  auto disjoint_defs = [&](const std::string& a, const std::string& b) {
    if (!refine_disjoint) return false;
    PredRef pa = defs.def_pred(a), pb = defs.def_pred(b);
    if (pa.is_true() || pb.is_true()) return false;
    return domain_disjoint(env.of(pa), env.of(pb), env);
  };
  auto connect = [&](const std::string& d, const std::set<std::string>& others) {
    ig.add_node(d);
    for (const auto& v : others)
      if (v != d && !disjoint_defs(d, v)) ig.add_edge(d, v);
  };
  UseMap uses = collect_uses(f);
  // Parameters arrive together: they interfere with each other and with
  // everything live into the entry.
  std::set<std::string> at_entry = live.live_in.empty() ? std::set<std::string>{} : live.live_in[0];
  for (const auto& p : f.params) at_entry.insert(p.name);
  for (const auto& p : f.params) connect(p.name, at_entry);
  for (int b = 0; b < static_cast<int>(f.blocks.size()); ++b) {
    std::set<std::string> after_phis =
        scan_block(f, uses, b, live.live_out[b], [&](const std::string& d, const std::set<std::string>& l) { connect(d, l); });
    std::set<std::string> phi_defs;
    for (std::size_t i = 0; i < f.blocks[b].first_non_phi(); ++i) phi_defs.insert(f.blocks[b].instrs[i].def);
    for (const auto& d : phi_defs) {
      connect(d, after_phis);
    }
  }
  return ig;
}

std::string dump_liveness(const Function& f, const LivenessInfo& live) {
  std::ostringstream os;
  auto list = [&](const std::set<std::string>& s) {
    std::string out;
    for (const auto& v : s) out += (out.empty() ? "%" : " %") + v;
    return out;
  };
  os << "liveness @" << f.name << '\n';
  for (std::size_t b = 0; b < f.blocks.size(); ++b)
    os << "  " << f.blocks[b].label << ": in=[" << list(live.live_in[b]) << "] out=[" << list(live.live_out[b]) << "]\n";
  return os.str();
}

std::string dump_interference(const InterferenceGraph& ig) {
  std::ostringstream os;
  for (const auto& [v, nbrs] : ig.adjacency()) {
    os << "  %" << v << ':';
    for (const auto& n : nbrs) os << " %" << n;
    os << '\n';
  }
  return os.str();
}

}  // namespace psikit
