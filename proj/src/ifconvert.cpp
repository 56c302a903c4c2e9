#include "psikit/ifconvert.hpp"

#include <algorithm>
#include <tuple>

#include "psikit/ssa.hpp"

namespace psikit {

namespace {

bool arm_block_ok(const Function& f, const Cfg& cfg, int arm, int head, int merge) {
  if (arm == 0 || arm == head || arm == merge) return false;
  if (cfg.preds[arm].size() != 1 || cfg.preds[arm][0] != head) return false;
  const Block& b = f.blocks[arm];
  const Instr& t = b.terminator();
  if (t.op != Opcode::Goto || f.block_index(t.operands[0].name) != merge) return false;
  return b.first_non_phi() == 0;
}

bool same_preds(const std::vector<int>& preds, std::initializer_list<int> want) {
  std::vector<int> a = preds, b = want;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

bool instr_convertible(const Instr& in, const MachineModel& m) {
  if (in.is_psi()) return true;
  if (defines_guard(in.op) && in.guard.is_true() && m.can_speculate(in.op)) return true;
  return m.can_predicate(in.op) || m.can_speculate(in.op);
}

bool arms_convertible(const Function& f, const Region& r, const MachineModel& m) {
  for (const auto* arm : {&r.then_arm, &r.else_arm})
    for (int b : *arm)
      for (const auto& in : f.blocks[b].instrs) {
        if (in.is_terminator()) continue;
        if (in.is_phi() || !instr_convertible(in, m)) return false;
      }
  return true;
}

class Linearizer {
 public:
  Linearizer(Function& f, std::vector<Instr>& out) : names_(f), out_(out) {}

  PredRef conj(const PredRef& a, const PredRef& b) {
    if (b.is_true()) return a;
    if (a.is_true() || a == b) return b;
    auto key = std::minmax(a, b);
    auto it = ands_.find(key);
    if (it == ands_.end()) {
      std::string reg = names_.fresh(a.reg);
      out_.push_back(make_op(Opcode::And, reg, {positive(key.first), positive(key.second)}));
      it = ands_.emplace(key, reg).first;
    }
    return PredRef::of(it->second);
  }

  void arm(const Function& f, const std::vector<int>& blocks, const PredRef& pred, const MachineModel& m) {
    for (int b : blocks)
      for (const auto& orig : f.blocks[b].instrs) {
        if (orig.is_terminator()) continue;
        Instr in = orig;
        if (in.is_psi()) {
          for (auto& a : in.psi_args) a.pred = conj(pred, a.pred);
          in.guard = conj(pred, in.guard);
        } else if (defines_guard(in.op) && in.guard.is_true() && m.can_speculate(in.op)) {
          // guard registers stay defined on every path
        } else if (m.can_predicate(in.op)) {
          in.guard = conj(pred, in.guard);
        } else if (m.can_speculate(in.op)) {
          in.guard = PredRef::always();
        } else {
          throw NotConvertible(std::string(opcode_name(in.op)) + " in " + f.blocks[b].label +
                               " can be neither predicated nor speculated");
        }
        out_.push_back(std::move(in));
      }
  }

 private:
  Operand positive(const PredRef& p) {
    if (!p.negated) return Operand::var(p.reg);
    auto it = nots_.find(p.reg);
    if (it == nots_.end()) {
      std::string reg = names_.fresh(p.reg);
      out_.push_back(make_op(Opcode::Not, reg, {Operand::var(p.reg)}));
      it = nots_.emplace(p.reg, reg).first;
    }
    return Operand::var(it->second);
  }

  NameGen names_;
  std::vector<Instr>& out_;
  std::map<std::pair<PredRef, PredRef>, std::string> ands_;
  std::map<std::string, std::string> nots_;
};

}  // namespace

std::vector<Region> find_regions(const Function& f, const DomTree& dom, const MachineModel& machine) {
  Cfg cfg = Cfg::build(f);
  std::vector<Region> out;
  for (int h = 0; h < static_cast<int>(f.blocks.size()); ++h) {
    if (!dom.reachable(h)) continue;
    const Instr& t = f.blocks[h].terminator();
    if (t.op != Opcode::Br || !t.operands[0].is_var()) continue;
    int x = f.block_index(t.operands[1].name), y = f.block_index(t.operands[2].name);
    if (x == y || x == h || y == h) continue;
    Region r;
    r.head = h;
    r.cond = t.operands[0].name;
    auto target_of = [&](int b) { return f.block_index(f.blocks[b].terminator().operands[0].name); };
    bool found = false;
    if (f.blocks[x].terminator().op == Opcode::Goto && f.blocks[y].terminator().op == Opcode::Goto &&
        target_of(x) == target_of(y)) {
      int m = target_of(x);
      if (m != h && m != x && m != y && arm_block_ok(f, cfg, x, h, m) && arm_block_ok(f, cfg, y, h, m) &&
          same_preds(cfg.preds[m], {x, y})) {
        r.shape = Region::Shape::Diamond;
        r.then_arm = {x};
        r.else_arm = {y};
        r.merge = m;
        found = true;
      }
    }
    if (!found && arm_block_ok(f, cfg, x, h, y) && same_preds(cfg.preds[y], {h, x})) {
      r.shape = Region::Shape::Triangle;
      r.then_arm = {x};
      r.merge = y;
      found = true;
    }
    if (!found && arm_block_ok(f, cfg, y, h, x) && same_preds(cfg.preds[x], {h, y})) {
      r.shape = Region::Shape::Triangle;
      r.else_arm = {y};
      r.merge = x;
      found = true;
    }
    if (found && arms_convertible(f, r, machine)) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const Region& a, const Region& b) { return dom.depth(a.head) > dom.depth(b.head); });
  return out;
}

void if_convert(Function& f, const Region& r, const MachineModel& machine) {
  const PredRef yes = PredRef::of(r.cond), no = PredRef::of(r.cond, true);
  const std::string head_label = f.blocks[r.head].label;
  const std::string merge_label = f.blocks[r.merge].label;
  std::set<int> arm_blocks(r.then_arm.begin(), r.then_arm.end());
  arm_blocks.insert(r.else_arm.begin(), r.else_arm.end());

  std::vector<Instr> linear(f.blocks[r.head].instrs.begin(), f.blocks[r.head].instrs.end() - 1);
  Linearizer lin(f, linear);
  lin.arm(f, r.then_arm, yes, machine);
  lin.arm(f, r.else_arm, no, machine);

  // Ordering keys: values defined before the region by (dominator depth,
  // index); values from the arms after them, in linear order.
  DomTree dom(f);
  DefInfo defs(f);
  std::map<std::string, std::size_t> linear_pos;
  for (std::size_t i = 0; i < linear.size(); ++i)
    if (!linear[i].def.empty()) linear_pos[linear[i].def] = i;
  auto key = [&](const std::string& v) {
    if (defs.has(v) && !arm_blocks.count(defs.site(v).block)) {
      Pos s = defs.site(v);
      return std::tuple<int, int, long>(0, dom.depth(s.block), s.index);
    }
    auto it = linear_pos.find(v);
    return std::tuple<int, int, long>(1, 0, it == linear_pos.end() ? 0 : static_cast<long>(it->second));
  };
  auto edge_pred = [&](const std::string& label) {
    int b = f.block_index(label);
    if (b == r.head) return r.then_arm.empty() ? yes : no;
    return std::find(r.then_arm.begin(), r.then_arm.end(), b) != r.then_arm.end() ? yes : no;
  };

  const Block& merge = f.blocks[r.merge];
  std::vector<std::pair<std::string, std::string>> renames;
  for (std::size_t i = 0; i < merge.first_non_phi(); ++i) {
    const Instr& phi = merge.instrs[i];
    bool trivial = std::all_of(phi.phi_args.begin(), phi.phi_args.end(),
                               [&](const PhiArg& a) { return a.value == phi.phi_args[0].value; });
    if (trivial) {
      renames.push_back({phi.def, phi.phi_args[0].value});
      continue;
    }
    std::vector<PsiArg> args;
    for (const auto& a : phi.phi_args) args.push_back({edge_pred(a.block), a.value});
    std::stable_sort(args.begin(), args.end(),
                     [&](const PsiArg& a, const PsiArg& b) { return key(a.value) < key(b.value); });
    if (std::get<0>(key(args[0].value)) == 0) args[0].pred = PredRef::always();
    linear.push_back(make_psi(phi.def, std::move(args)));
  }
  linear.insert(linear.end(), merge.instrs.begin() + static_cast<std::ptrdiff_t>(merge.first_non_phi()),
                merge.instrs.end());

  f.blocks[r.head].instrs = std::move(linear);
  std::set<int> drop = arm_blocks;
  drop.insert(r.merge);
  std::vector<Block> kept;
  for (int b = 0; b < static_cast<int>(f.blocks.size()); ++b)
    if (!drop.count(b)) kept.push_back(std::move(f.blocks[b]));
  f.blocks = std::move(kept);
  for (auto& b : f.blocks)
    for (auto& in : b.instrs)
      for (auto& a : in.phi_args)
        if (a.block == merge_label) a.block = head_label;
  for (const auto& [from, to] : renames) replace_uses(f, from, to);
}

std::size_t if_convert_all(Function& f, const MachineModel& machine) {
  std::size_t converted = 0;
  for (;;) {
    DomTree dom(f);
    auto regions = find_regions(f, dom, machine);
    if (regions.empty()) break;
    if_convert(f, regions.front(), machine);
    ++converted;
  }
  if (converted) psi_inline_all(f);
  return converted;
}

}  // namespace psikit
