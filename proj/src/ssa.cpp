#include "psikit/ssa.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace psikit {

bool contains_psi(const Function& f) {
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_psi()) return true;
  return false;
}

bool contains_phi(const Function& f) {
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_phi()) return true;
  return false;
}

namespace {

// Upward-exposed uses and kills per block for non-SSA code. A guarded
// definition does not kill: the merged value still reads the old one.
struct BlockSets {
  std::set<std::string> gen;
  std::set<std::string> kill;
};

std::vector<std::set<std::string>> non_ssa_live_in(const Function& f, const Cfg& cfg) {
  const std::size_t n = f.blocks.size();
  std::vector<BlockSets> sets(n);
  for (std::size_t b = 0; b < n; ++b) {
    auto& s = sets[b];
    for (const auto& in : f.blocks[b].instrs) {
      for_each_use(in, [&](const std::string& v) {
        if (!s.kill.count(v)) s.gen.insert(v);
      });
      if (in.def.empty()) continue;
      if (in.guard.is_true())
        s.kill.insert(in.def);
      else if (!s.kill.count(in.def))
        s.gen.insert(in.def);
    }
  }
  std::vector<std::set<std::string>> live_in(n);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t b = n; b-- > 0;) {
      std::set<std::string> live;
      for (int s : cfg.succs[b]) live.insert(live_in[s].begin(), live_in[s].end());
      for (const auto& k : sets[b].kill) live.erase(k);
      live.insert(sets[b].gen.begin(), sets[b].gen.end());
      if (live != live_in[b]) {
        live_in[b] = std::move(live);
        changed = true;
      }
    }
  }
  return live_in;
}

class Renamer {
 public:
  Renamer(Function& f, const DomTree& dom, const Cfg& cfg, std::vector<std::vector<std::string>> phi_vars)
      : f_(f), dom_(dom), cfg_(cfg), phi_vars_(std::move(phi_vars)), names_(f) {
    for (const auto& p : f.params) {
      stacks_[p.name].push_back(p.name);
      named_.insert(p.name);
    }
  }

  void run() {
    rename(0);
    if (undef_.empty()) return;
    std::vector<Instr> init;
    for (const auto& [v, name] : undef_) init.push_back(make_op(Opcode::Const, name, {Operand::immediate(0)}));
    auto& entry = f_.blocks[0].instrs;
    entry.insert(entry.begin(), init.begin(), init.end());
  }

 private:
  std::string top(const std::string& v) {
    auto& st = stacks_[v];
    if (!st.empty()) return st.back();
    auto it = undef_.find(v);
    if (it == undef_.end()) it = undef_.emplace(v, names_.fresh(v + ".undef")).first;
    return it->second;
  }

  std::string fresh_def(const std::string& v) {
    if (named_.insert(v).second) return v;
    return names_.fresh(v);
  }

  void rename(int b) {
    std::vector<std::string> pushed;
    auto push = [&](const std::string& v, const std::string& name) {
      stacks_[v].push_back(name);
      pushed.push_back(v);
    };
    auto& block = f_.blocks[b];
    std::vector<Instr> out;
    const std::size_t nphi = phi_vars_[b].size();
    for (std::size_t i = 0; i < nphi; ++i) {
      Instr phi = block.instrs[i];
      phi.def = fresh_def(phi_vars_[b][i]);
      push(phi_vars_[b][i], phi.def);
      out.push_back(std::move(phi));
    }
    for (std::size_t i = nphi; i < block.instrs.size(); ++i) {
      Instr in = block.instrs[i];
      for_each_use(in, [&](std::string& u) { u = top(u); });
      if (in.def.empty()) {
        out.push_back(std::move(in));
        continue;
      }
      const std::string v = in.def;
      if (in.guard.is_true()) {
        in.def = fresh_def(v);
        push(v, in.def);
        out.push_back(std::move(in));
      } else {
        std::string prev = top(v);
        in.def = fresh_def(v);
        PredRef guard = in.guard;
        std::string inner = in.def;
        out.push_back(std::move(in));
        std::string merged = names_.fresh(v);
        out.push_back(make_psi(merged, {{PredRef::always(), prev}, {guard, inner}}));
        push(v, merged);
      }
    }
    block.instrs = std::move(out);
    for (int s : cfg_.succs[b])
      for (std::size_t i = 0; i < phi_vars_[s].size(); ++i)
        for (auto& a : f_.blocks[s].instrs[i].phi_args)
          if (a.block == block.label) a.value = top(phi_vars_[s][i]);
    for (int c : dom_.children(b)) rename(c);
    for (auto it = pushed.rbegin(); it != pushed.rend(); ++it) stacks_[*it].pop_back();
  }

  Function& f_;
  const DomTree& dom_;
  const Cfg& cfg_;
  std::vector<std::vector<std::string>> phi_vars_;
  NameGen names_;
  std::map<std::string, std::vector<std::string>> stacks_;
  std::set<std::string> named_;
  std::map<std::string, std::string> undef_;
};

struct PsiLoc {
  int block = -1;
  int index = -1;
};

PsiLoc find_psi(const Function& f, const std::string& name) {
  for (std::size_t b = 0; b < f.blocks.size(); ++b)
    for (std::size_t i = 0; i < f.blocks[b].instrs.size(); ++i) {
      const Instr& in = f.blocks[b].instrs[i];
      if (in.def == name) {
        if (!in.is_psi()) throw NotPsiDefined(name);
        return {static_cast<int>(b), static_cast<int>(i)};
      }
    }
  throw NotPsiDefined(name);
}

std::vector<std::string> psi_names(const Function& f) {
  std::vector<std::string> out;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_psi()) out.push_back(in.def);
  return out;
}

PredExpr union_from(const std::vector<PsiArg>& args, std::size_t from, const GuardEnv& env) {
  std::vector<PredExpr> preds;
  for (std::size_t k = from; k < args.size(); ++k) preds.push_back(env.of(args[k].pred));
  return domain_union(preds);
}

std::map<std::string, int> use_counts(const Function& f) {
  std::map<std::string, int> uses;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs) for_each_use(in, [&](const std::string& v) { ++uses[v]; });
  return uses;
}

}  // namespace

SsaForm construct_ssa(const Function& input) {
  if (contains_phi(input) || contains_psi(input)) throw Error("@" + input.name + " already contains phi or psi");
  Function f = input;
  remove_unreachable(f);
  if (!Cfg::build(f).preds[0].empty()) {
    std::string label = "entry";
    for (int k = 1; f.block_index(label) >= 0; ++k) label = "entry." + std::to_string(k);
    Block entry{label, {make_op(Opcode::Goto, "", {Operand::label(f.blocks[0].label)})}};
    f.blocks.insert(f.blocks.begin(), std::move(entry));
  }
  Cfg cfg = Cfg::build(f);
  DomTree dom(f, cfg);
  auto df = dom.frontiers(cfg);
  auto live_in = non_ssa_live_in(f, cfg);

  std::map<std::string, std::set<int>> def_blocks;
  for (const auto& p : f.params) def_blocks[p.name].insert(0);
  for (std::size_t b = 0; b < f.blocks.size(); ++b)
    for (const auto& in : f.blocks[b].instrs)
      if (!in.def.empty()) def_blocks[in.def].insert(static_cast<int>(b));

  std::vector<std::vector<std::string>> phi_vars(f.blocks.size());
  for (const auto& [v, blocks] : def_blocks) {
    std::vector<int> work(blocks.begin(), blocks.end());
    std::set<int> has_phi;
    std::set<int> queued(blocks.begin(), blocks.end());
    while (!work.empty()) {
      int d = work.back();
      work.pop_back();
      for (int y : df[d]) {
        if (has_phi.count(y) || !live_in[y].count(v)) continue;
        has_phi.insert(y);
        phi_vars[y].push_back(v);
        if (queued.insert(y).second) work.push_back(y);
      }
    }
  }
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    std::sort(phi_vars[b].begin(), phi_vars[b].end());
    std::vector<Instr> phis;
    for (const auto& v : phi_vars[b]) {
      std::vector<PhiArg> args;
      for (int p : cfg.preds[b]) args.push_back({f.blocks[p].label, v});
      phis.push_back(make_phi(v, std::move(args)));
    }
    auto& instrs = f.blocks[b].instrs;
    instrs.insert(instrs.begin(), phis.begin(), phis.end());
  }

  Renamer(f, dom, cfg, phi_vars).run();
  SsaForm out;
  out.psi_present = contains_psi(f);
  out.function = std::move(f);
  out.is_ssa = true;
  return out;
}

std::size_t copy_fold(Function& f, const GuardEnv& env) {
  std::size_t removed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    // Unguarded register copies.
    for (auto& b : f.blocks)
      for (std::size_t i = 0; i < b.instrs.size(); ++i) {
        const Instr& in = b.instrs[i];
        if (!in.is_copy() || !in.guard.is_true()) continue;
        std::string from = in.def, to = in.operands[0].name;
        b.instrs.erase(b.instrs.begin() + static_cast<std::ptrdiff_t>(i));
        replace_uses(f, from, to);
        ++removed;
        changed = true;
        --i;
      }
    // Guarded copies feeding psi arguments.
    DefInfo defs(f);
    std::vector<std::pair<PsiArg*, std::string>> folds;
    for (auto& b : f.blocks)
      for (auto& in : b.instrs) {
        if (!in.is_psi()) continue;
        for (auto& a : in.psi_args) {
          const Instr* d = defs.instr(a.value);
          if (!d || !d->is_copy() || d->guard.is_true()) continue;
          const std::string& src = d->operands[0].name;
          PredExpr within = env.of(d->guard) && env.of(defs.def_pred(src));
          if (domain_subset(env.of(a.pred), within, env)) folds.push_back({&a, src});
        }
      }
    for (auto& [arg, src] : folds) {
      arg->value = src;
      changed = true;
    }
    // Dead copies.
    auto uses = use_counts(f);
    for (auto& b : f.blocks)
      for (std::size_t i = 0; i < b.instrs.size(); ++i) {
        const Instr& in = b.instrs[i];
        if (in.is_copy() && !uses.count(in.def)) {
          b.instrs.erase(b.instrs.begin() + static_cast<std::ptrdiff_t>(i));
          ++removed;
          changed = true;
          --i;
        }
      }
  }
  return removed;
}

void psi_inline(Function& f, const std::string& psi, std::size_t arg_index, const GuardEnv& env) {
  PsiLoc loc = find_psi(f, psi);
  Instr& outer = f.blocks[loc.block].instrs[loc.index];
  if (arg_index >= outer.psi_args.size()) throw Error("psi %" + psi + " has no argument " + std::to_string(arg_index));
  const std::string inner_name = outer.psi_args[arg_index].value;
  PsiLoc inner_loc = find_psi(f, inner_name);
  const Instr inner = f.blocks[inner_loc.block].instrs[inner_loc.index];
  PredExpr cover = union_from(outer.psi_args, arg_index, env);
  for (const auto& a : inner.psi_args)
    if (!domain_subset(env.of(a.pred), env.of(inner.guard), env))
      throw Error("psi %" + inner_name + " has a predicate outside its guard");
  for (const auto& a : inner.psi_args)
    if (!domain_subset(env.of(a.pred), cover, env))
      throw Error("inlining %" + inner_name + " into %" + psi + " would expose " + a.pred.str() + " ? %" + a.value);
  Instr& target = f.blocks[loc.block].instrs[loc.index];
  auto pos = target.psi_args.erase(target.psi_args.begin() + static_cast<std::ptrdiff_t>(arg_index));
  target.psi_args.insert(pos, inner.psi_args.begin(), inner.psi_args.end());
}

std::size_t psi_inline_all(Function& f) {
  GuardEnv env = guard_env_for(f);
  std::size_t steps = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    DefInfo defs(f);
    for (const auto& name : psi_names(f)) {
      PsiLoc loc = find_psi(f, name);
      const auto& args = f.blocks[loc.block].instrs[loc.index].psi_args;
      for (std::size_t k = 0; k < args.size(); ++k) {
        const Instr* d = defs.instr(args[k].value);
        if (!d || !d->is_psi()) continue;
        try {
          psi_inline(f, name, k, env);
        } catch (const Error&) {
          continue;
        }
        ++steps;
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
  return steps;
}

std::size_t psi_reduce(Function& f, const std::string& psi, const GuardEnv& env) {
  PsiLoc loc = find_psi(f, psi);
  auto& args = f.blocks[loc.block].instrs[loc.index].psi_args;
  std::size_t removed = 0;
  for (std::size_t i = 0; i + 1 < args.size();) {
    if (domain_subset(env.of(args[i].pred), union_from(args, i + 1, env), env)) {
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      ++removed;
    } else {
      ++i;
    }
  }
  return removed;
}

std::size_t psi_reduce_all(Function& f) {
  GuardEnv env = guard_env_for(f);
  std::size_t removed = 0;
  for (const auto& name : psi_names(f)) removed += psi_reduce(f, name, env);
  return removed;
}

std::string psi_project(Function& f, const std::string& psi, const PredExpr& onto, const GuardEnv& env) {
  PsiLoc loc = find_psi(f, psi);
  Instr proj = f.blocks[loc.block].instrs[loc.index];
  std::erase_if(proj.psi_args, [&](const PsiArg& a) { return domain_disjoint(env.of(a.pred), onto, env); });
  if (proj.psi_args.empty()) throw EmptyProjection(psi);
  NameGen names(f);
  proj.def = names.fresh(psi + ".proj");
  std::string name = proj.def;
  auto& instrs = f.blocks[loc.block].instrs;
  instrs.insert(instrs.begin() + loc.index + 1, std::move(proj));
  return name;
}

void psi_promote(Function& f, const std::string& psi, std::size_t arg_index, const PredRef& new_pred,
                 const GuardEnv& env, const MachineModel& machine) {
  PsiLoc loc = find_psi(f, psi);
  const auto& args = f.blocks[loc.block].instrs[loc.index].psi_args;
  if (arg_index >= args.size()) throw Error("psi %" + psi + " has no argument " + std::to_string(arg_index));
  PredExpr wanted = env.of(new_pred);
  if (!domain_subset(wanted, union_from(args, arg_index, env), env))
    throw ConditionViolated(2, new_pred.str() + " not covered by the predicates from argument " +
                                   std::to_string(arg_index) + " of %" + psi);
  DefInfo defs(f);
  const std::string value = args[arg_index].value;
  if (!domain_subset(wanted, env.of(defs.def_pred(value)), env)) {
    const Instr* d = defs.instr(value);
    if (!d || d->is_phi() || d->is_psi() || !machine.can_speculate(d->op))
      throw ConditionViolated(1, "definition of %" + value + " cannot be speculated");
    Pos site = defs.site(value);
    f.blocks[site.block].instrs[site.index].guard = PredRef::always();
  }
  f.blocks[loc.block].instrs[loc.index].psi_args[arg_index].pred = new_pred;
}

std::size_t psi_promote_all(Function& f, const MachineModel& machine) {
  GuardEnv env = guard_env_for(f);
  std::size_t promoted = 0;
  for (const auto& name : psi_names(f)) {
    PsiLoc loc = find_psi(f, name);
    const std::size_t n = f.blocks[loc.block].instrs[loc.index].psi_args.size();
    for (std::size_t k = 0; k < n; ++k) {
      const PsiArg arg = f.blocks[loc.block].instrs[loc.index].psi_args[k];
      PredRef target = PredRef::always();
      if (k > 0) {
        DefInfo defs(f);
        if (!defs.has(arg.value)) continue;
        target = defs.def_pred(arg.value);
      }
      if (arg.pred == target || domain_equivalent(env.of(arg.pred), env.of(target), env)) continue;
      try {
        psi_promote(f, name, k, target, env, machine);
        ++promoted;
      } catch (const ConditionViolated&) {
      }
    }
  }
  return promoted;
}

bool is_normalized(const Function& f, const Instr& psi, const DomTree& dom, const GuardEnv& env) {
  DefInfo defs(f);
  const auto& args = psi.psi_args;
  for (const auto& a : args) {
    if (!defs.has(a.value)) return false;
    if (!domain_equivalent(env.of(a.pred), env.of(defs.def_pred(a.value)), env)) return false;
  }
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (dom.dominates(defs.resolved_site(args[i + 1].value), defs.site(args[i].value))) return false;
  return true;
}

bool all_normalized(const Function& f) {
  DomTree dom(f);
  GuardEnv env = guard_env_for(f);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.is_psi() && !is_normalized(f, in, dom, env)) return false;
  return true;
}

std::size_t psi_to_select(Function& f) {
  std::map<std::string, int> psi_uses;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      for (const auto& a : in.psi_args) ++psi_uses[a.value];
  NameGen names(f);
  std::size_t rewritten = 0;
  for (auto& block : f.blocks) {
    for (std::size_t at = 0; at < block.instrs.size(); ++at) {
      if (!block.instrs[at].is_psi()) continue;
      const Instr psi = block.instrs[at];
      auto index_of = [&](const std::string& v) -> int {
        for (std::size_t i = 0; i < at; ++i)
          if (block.instrs[i].def == v) return static_cast<int>(i);
        return -1;
      };
      bool ok = true;
      int last = index_of(psi.psi_args[0].value);
      for (std::size_t k = 1; k < psi.psi_args.size() && ok; ++k) {
        const PsiArg& arg = psi.psi_args[k];
        int i = index_of(arg.value);
        ok = i > last && psi_uses[arg.value] == 1 && !block.instrs[i].is_phi() && !block.instrs[i].is_psi() &&
             block.instrs[i].guard == arg.pred;
        last = i;
      }
      if (!ok) continue;
      // Back to front, so earlier indices stay valid.
      for (std::size_t k = psi.psi_args.size(); k-- > 1;) {
        const PsiArg& arg = psi.psi_args[k];
        if (arg.pred.is_true()) continue;
        const int i = index_of(arg.value);
        const std::string prev = psi.psi_args[k - 1].value;
        std::string t = names.fresh(arg.value);
        block.instrs[i].def = t;
        std::vector<Operand> ops{Operand::var(arg.pred.reg), Operand::var(t), Operand::var(prev)};
        if (arg.pred.negated) std::swap(ops[1], ops[2]);
        block.instrs.insert(block.instrs.begin() + i + 1, make_op(Opcode::Select, arg.value, std::move(ops)));
        ++at;
      }
      block.instrs[at] = make_copy(psi.def, psi.psi_args.back().value, psi.guard);
      ++rewritten;
    }
  }
  return rewritten;
}

}  // namespace psikit
