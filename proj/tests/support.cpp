#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "psikit/alpha.hpp"
#include "psikit/text.hpp"

namespace testsupport {

using namespace psikit;

Function parse_one(const std::string& text) {
  Module m = parse_module(text);
  if (m.functions.size() != 1) throw std::runtime_error("expected one function");
  return m.functions[0];
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<GoldenCase> load_golden_cases(const std::string& dir) {
  std::vector<GoldenCase> out;
  std::istringstream lines(read_file(dir + "/cases.txt"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ws(line);
    GoldenCase c;
    std::string passes, flag;
    ws >> c.name >> c.input >> c.expected >> passes;
    c.input = dir + "/" + c.input;
    c.expected = dir + "/" + c.expected;
    c.config.passes = parse_pass_list(passes);
    while (ws >> flag) {
      if (flag == "--ssa-input")
        c.config.ssa_input = true;
      else if (flag == "--machine=partial")
        c.config.machine = MachineModel::partial();
      else if (flag == "--no-reorder-disjoint")
        c.config.options.reorder_disjoint = false;
      else if (flag == "--no-disjoint-interference")
        c.config.options.disjoint_interference = false;
      else if (flag == "--no-left-only")
        c.config.options.left_only = false;
      else if (flag == "--no-ignore-result")
        c.config.options.ignore_result = false;
      else
        throw std::runtime_error("unknown flag in cases.txt: " + flag);
    }
    out.push_back(c);
  }
  return out;
}

std::optional<std::string> run_golden(const GoldenCase& c) {
  Function in = parse_one(read_file(c.input));
  Function want = parse_one(read_file(c.expected));
  PipelineResult r = run_pipeline(in, c.config);
  if (auto d = alpha_difference(r.function, want))
    return *d + "\n--- got\n" + print_function(r.function) + "--- want\n" + print_function(want);
  return std::nullopt;
}

Formula random_formula(std::mt19937_64& rng, int symbols, int depth) {
  Formula f;
  auto build = [&](auto& self, int d) -> int {
    int pick = d <= 0 ? int(rng() % 8) : int(rng() % 11);
    Formula::Node n{Formula::Var};
    if (pick == 0) {
      n.kind = Formula::T;
    } else if (pick == 1) {
      n.kind = Formula::F;
    } else if (pick < 8) {
      n.kind = Formula::Var;
      n.a = int(rng() % symbols);
    } else if (pick == 8) {
      n.kind = Formula::Not;
      n.a = self(self, d - 1);
    } else {
      n.kind = pick == 9 ? Formula::And : Formula::Or;
      n.a = self(self, d - 1);
      n.b = self(self, d - 1);
    }
    f.nodes.push_back(n);
    return int(f.nodes.size()) - 1;
  };
  build(build, depth);
  return f;
}

std::bitset<256> truth_table(const Formula& f, int symbols) {
  std::bitset<256> out;
  for (unsigned a = 0; a < (1u << symbols); ++a) {
    std::vector<bool> v(f.nodes.size());
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      const auto& n = f.nodes[i];
      switch (n.kind) {
        case Formula::T: v[i] = true; break;
        case Formula::F: v[i] = false; break;
        case Formula::Var: v[i] = (a >> n.a) & 1; break;
        case Formula::Not: v[i] = !v[n.a]; break;
        case Formula::And: v[i] = v[n.a] && v[n.b]; break;
        case Formula::Or: v[i] = v[n.a] || v[n.b]; break;
      }
    }
    out[a] = v.back();
  }
  return out;
}

PredExpr to_pred(const Formula& f) {
  std::vector<PredExpr> e;
  for (const auto& n : f.nodes) {
    switch (n.kind) {
      case Formula::T: e.push_back(PredExpr::top()); break;
      case Formula::F: e.push_back(PredExpr::bottom()); break;
      case Formula::Var: e.push_back(PredExpr::sym(unsigned(n.a))); break;
      case Formula::Not: e.push_back(!e[n.a]); break;
      case Formula::And: e.push_back(e[n.a] && e[n.b]); break;
      case Formula::Or: e.push_back(e[n.a] || e[n.b]); break;
    }
  }
  return e.back();
}

namespace {

void uses_of(const Instr& in, std::set<std::string>& out) {
  if (!in.guard.is_true()) out.insert(in.guard.reg);
  for (const auto& o : in.operands)
    if (o.is_var()) out.insert(o.name);
}

void add_edge(PlainLiveness& l, const std::string& a, const std::string& b) {
  if (a == b) return;
  l.edges.insert(a < b ? std::pair{a, b} : std::pair{b, a});
}

}  // namespace

PlainLiveness plain_liveness(const Function& f) {
  const std::size_t n = f.blocks.size();
  std::map<std::string, int> index;
  for (std::size_t b = 0; b < n; ++b) index[f.blocks[b].label] = int(b);
  std::vector<std::vector<int>> succ(n);
  for (std::size_t b = 0; b < n; ++b)
    for (const auto& o : f.blocks[b].terminator().operands)
      if (o.is_label()) succ[b].push_back(index.at(o.name));

  PlainLiveness l;
  l.live_in.assign(n, {});
  l.live_out.assign(n, {});
  auto block_in = [&](std::size_t b, bool record) {
    const auto& blk = f.blocks[b];
    std::set<std::string> live = l.live_out[b];
    std::size_t first = 0;
    while (first < blk.instrs.size() && blk.instrs[first].is_phi()) ++first;
    for (std::size_t i = blk.instrs.size(); i-- > first;) {
      const Instr& in = blk.instrs[i];
      if (!in.def.empty()) {
        if (record)
          for (const auto& v : live) add_edge(l, in.def, v);
        live.erase(in.def);
      }
      uses_of(in, live);
    }
    if (record) {
      std::set<std::string> born = live;
      for (std::size_t i = 0; i < first; ++i) born.insert(blk.instrs[i].def);
      for (std::size_t i = 0; i < first; ++i)
        for (const auto& v : born) add_edge(l, blk.instrs[i].def, v);
    }
    for (std::size_t i = 0; i < first; ++i) live.erase(blk.instrs[i].def);
    return live;
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t b = n; b-- > 0;) {
      std::set<std::string> out;
      for (int s : succ[b]) {
        out.insert(l.live_in[s].begin(), l.live_in[s].end());
        for (const auto& in : f.blocks[s].instrs)
          if (in.is_phi())
            for (const auto& a : in.phi_args)
              if (a.block == f.blocks[b].label) out.insert(a.value);
      }
      l.live_out[b] = out;
      std::set<std::string> in = block_in(b, false);
      if (in != l.live_in[b]) {
        l.live_in[b] = in;
        changed = true;
      }
    }
  }
  for (std::size_t b = 0; b < n; ++b) block_in(b, true);
  for (const auto& p : f.params) {
    for (const auto& v : l.live_in[0]) add_edge(l, p.name, v);
    for (const auto& q : f.params) add_edge(l, p.name, q.name);
  }
  return l;
}

namespace {

class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  Function build() {
    f_.name = "r";
    for (int i = 0; i < 3; ++i) {
      f_.params.push_back({"u" + std::to_string(i), false});
      values_.push_back("u" + std::to_string(i));
    }
    block("entry");
    for (int i = 0; i < 3; ++i)
      emit(make_op(Opcode::CmpLt, fresh("g"), {var(pick(values_)), Operand::immediate(int(rng_() % 7) - 3)}),
           &guards_);
    emit(make_op(Opcode::And, fresh("g"), {var(guards_[0]), var(guards_[1])}), &guards_);
    emit(make_op(Opcode::Add, fresh("v"), {var(pick(values_)), Operand::immediate(1)}), &values_);

    const bool loop = rng_() % 2;
    std::string carried, init;
    if (loop) {
      init = values_.back();
      f_.blocks.back().instrs.push_back(make_op(Opcode::Goto, "", {Operand::label("body")}));
      block("body");
      carried = fresh("c");
      f_.blocks.back().instrs.push_back(make_phi(carried, {{"entry", init}, {"body", "?"}}));
      values_.push_back(carried);
      emit(make_op(Opcode::CmpLt, fresh("g"), {var(carried), Operand::immediate(2)}), &guards_);
    }
    const int groups = 1 + int(rng_() % 3);
    for (int g = 0; g < groups; ++g) psi_group();
    std::string ret = pick(values_);
    if (loop) {
      std::string next = fresh("n");
      emit(make_op(Opcode::Add, next, {var(pick(values_)), Operand::immediate(1)}), &values_);
      f_.blocks.back().instrs[0].phi_args[1].value = next;
      std::string lc = fresh("lc");
      emit(make_op(Opcode::CmpLt, lc, {var(carried), Operand::immediate(3)}), nullptr);
      f_.blocks.back().instrs.push_back(
          make_op(Opcode::Br, "", {var(lc), Operand::label("body"), Operand::label("exit")}));
      block("exit");
    }
    std::string sum = fresh("s");
    f_.blocks.back().instrs.push_back(make_op(Opcode::Add, sum, {var(ret), var(pick(values_))}));
    f_.blocks.back().instrs.push_back(make_op(Opcode::Ret, "", {var(sum)}));
    return f_;
  }

 private:
  static Operand var(const std::string& n) { return Operand::var(n); }

  std::string fresh(const std::string& base) { return base + std::to_string(counter_++); }
  const std::string& pick(const std::vector<std::string>& v) { return v[rng_() % v.size()]; }
  void block(const std::string& label) { f_.blocks.push_back({label, {}}); }
  void emit(Instr in, std::vector<std::string>* pool) {
    if (pool) pool->push_back(in.def);
    f_.blocks.back().instrs.push_back(std::move(in));
  }
  std::string any_value() {
    if (!args_.empty() && rng_() % 3 == 0) return pick(args_);
    return pick(values_);
  }
  void filler() {
    Opcode op = rng_() % 2 ? Opcode::Add : Opcode::Sub;
    emit(make_op(op, fresh("w"), {var(any_value()), var(pick(values_))}), &values_);
  }

  void psi_group() {
    if (rng_() % 2) filler();
    std::vector<PsiArg> args;
    if (rng_() % 2) {
      args.push_back({PredRef::always(), pick(values_)});
    } else {
      std::string a = fresh("a");
      emit(make_op(Opcode::Add, a, {var(any_value()), Operand::immediate(int(rng_() % 5))}), &values_);
      args.push_back({PredRef::always(), a});
    }
    const int k = 1 + int(rng_() % 3);
    for (int i = 0; i < k; ++i) {
      if (rng_() % 3 == 0) filler();
      PredRef p = PredRef::of(pick(guards_), rng_() % 2);
      std::string b = fresh("b");
      emit(make_op(Opcode::Add, b, {var(any_value()), Operand::immediate(int(rng_() % 5))}, p), nullptr);
      args_.push_back(b);
      args.push_back({p, b});
    }
    if (rng_() % 2) filler();
    emit(make_psi(fresh("x"), args), &values_);
  }

  std::mt19937_64 rng_;
  Function f_;
  int counter_ = 0;
  std::vector<std::string> values_, guards_, args_;
};

}  // namespace

Function random_psi_function(std::uint64_t seed) { return Builder(seed).build(); }

std::set<std::string> guard_names(const Function& f) {
  std::set<std::string> out;
  for (const auto& p : f.params)
    if (p.guard) out.insert(p.name);
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (!in.def.empty() && defines_guard(in.op)) out.insert(in.def);
  return out;
}

}  // namespace testsupport
