#include "psikit/interp.hpp"

#include <random>
#include <sstream>
#include <unordered_map>

namespace psikit {

std::string_view trap_name(Trap t) {
  switch (t) {
    case Trap::None:
      return "none";
    case Trap::UndefinedRead:
      return "UndefinedRead";
    case Trap::PsiNoneTrue:
      return "PsiNoneTrue";
    case Trap::StepBudgetExhausted:
      return "StepBudgetExhausted";
    case Trap::OutOfBoundsMemory:
      return "OutOfBoundsMemory";
  }
  return "?";
}

namespace {

using Value = std::optional<std::int64_t>;

struct TrapSignal {
  Trap trap;
  std::string detail;
};

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

std::string join(const std::vector<std::int64_t>& v) {
  std::string out;
  for (auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

class Machine {
 public:
  Machine(const Function& f, std::vector<std::int64_t> mem, std::uint64_t budget)
      : f_(f), mem_(std::move(mem)), budget_(budget) {
    mem_.resize(kMemoryWords, 0);
  }

  ExecResult run(const std::vector<std::int64_t>& args) {
    ExecResult r;
    try {
      if (args.size() != f_.params.size())
        throw Error("@" + f_.name + " expects " + std::to_string(f_.params.size()) + " arguments");
      for (std::size_t i = 0; i < args.size(); ++i) env_[f_.params[i].name] = args[i];
      r.value = execute();
    } catch (const TrapSignal& t) {
      r.trap = t.trap;
      r.detail = t.detail;
    }
    r.memory = mem_;
    return r;
  }

 private:
  Value get(const std::string& v) const {
    auto it = env_.find(v);
    return it == env_.end() ? Value{} : it->second;
  }

  std::int64_t observe(const std::string& v, const char* what) const {
    Value x = get(v);
    if (!x) throw TrapSignal{Trap::UndefinedRead, std::string(what) + " %" + v};
    return *x;
  }

  Value operand(const Operand& o) const { return o.is_imm() ? Value{o.imm} : get(o.name); }

  std::int64_t observe(const Operand& o, const char* what) const {
    if (o.is_imm()) return o.imm;
    return observe(o.name, what);
  }

  bool holds(const PredRef& p, const char* what) const {
    if (p.is_true()) return true;
    bool v = observe(p.reg, what) != 0;
    return p.negated ? !v : v;
  }

  std::size_t address(const Operand& o) const {
    std::int64_t a = observe(o, "address");
    if (a < 0 || static_cast<std::size_t>(a) >= mem_.size())
      throw TrapSignal{Trap::OutOfBoundsMemory, "address " + std::to_string(a)};
    return static_cast<std::size_t>(a);
  }

  void tick() {
    if (steps_++ >= budget_) throw TrapSignal{Trap::StepBudgetExhausted, "after " + std::to_string(budget_) + " steps"};
  }

  Value compute(const Instr& in) {
    auto a = [&](std::size_t i) { return operand(in.operands[i]); };
    auto both = [&](auto fn) -> Value {
      Value x = a(0), y = a(1);
      if (!x || !y) return {};
      return fn(static_cast<std::uint64_t>(*x), static_cast<std::uint64_t>(*y), *x, *y);
    };
    switch (in.op) {
      case Opcode::Const:
        return in.operands[0].imm;
      case Opcode::Mov:
        return a(0);
      case Opcode::Add:
        return both([](std::uint64_t x, std::uint64_t y, auto, auto) { return wrap(x + y); });
      case Opcode::Sub:
        return both([](std::uint64_t x, std::uint64_t y, auto, auto) { return wrap(x - y); });
      case Opcode::Mul:
        return both([](std::uint64_t x, std::uint64_t y, auto, auto) { return wrap(x * y); });
      case Opcode::Neg: {
        Value x = a(0);
        if (!x) return {};
        return wrap(std::uint64_t{0} - static_cast<std::uint64_t>(*x));
      }
      case Opcode::CmpEq:
        return both([](auto, auto, std::int64_t x, std::int64_t y) { return std::int64_t{x == y}; });
      case Opcode::CmpLt:
        return both([](auto, auto, std::int64_t x, std::int64_t y) { return std::int64_t{x < y}; });
      case Opcode::CmpLe:
        return both([](auto, auto, std::int64_t x, std::int64_t y) { return std::int64_t{x <= y}; });
      case Opcode::And: {
        Value x = a(0), y = a(1);
        if ((x && *x == 0) || (y && *y == 0)) return 0;
        if (!x || !y) return {};
        return 1;
      }
      case Opcode::Or: {
        Value x = a(0), y = a(1);
        if ((x && *x != 0) || (y && *y != 0)) return 1;
        if (!x || !y) return {};
        return 0;
      }
      case Opcode::Not: {
        Value x = a(0);
        if (!x) return {};
        return std::int64_t{*x == 0};
      }
      case Opcode::Select: {
        Value c = a(0);
        if (!c) return {};
        return *c != 0 ? a(1) : a(2);
      }
      case Opcode::Load:
        return mem_[address(in.operands[0])];
      case Opcode::Psi: {
        for (auto it = in.psi_args.rbegin(); it != in.psi_args.rend(); ++it)
          if (holds(it->pred, "psi predicate")) return get(it->value);
        throw TrapSignal{Trap::PsiNoneTrue, "%" + in.def};
      }
      default:
        throw Error("cannot compute " + std::string(opcode_name(in.op)));
    }
  }

  std::optional<std::int64_t> execute() {
    int block = 0;
    std::string from;
    for (;;) {
      const Block& b = f_.blocks[block];
      const std::size_t nphi = b.first_non_phi();
      if (nphi) {
        std::vector<Value> incoming;
        for (std::size_t i = 0; i < nphi; ++i) {
          tick();
          Value v;
          bool found = false;
          for (const auto& a : b.instrs[i].phi_args)
            if (a.block == from) {
              v = get(a.value);
              found = true;
            }
          if (!found) throw Error("phi %" + b.instrs[i].def + " has no argument for " + from);
          incoming.push_back(v);
        }
        for (std::size_t i = 0; i < nphi; ++i) set(b.instrs[i].def, incoming[i]);
      }
      for (std::size_t i = nphi; i < b.instrs.size(); ++i) {
        const Instr& in = b.instrs[i];
        tick();
        if (!holds(in.guard, "guard")) continue;
        switch (in.op) {
          case Opcode::Store: {
            std::size_t addr = address(in.operands[0]);
            mem_[addr] = observe(in.operands[1], "stored value");
            break;
          }
          case Opcode::Br: {
            bool c = observe(in.operands[0], "branch condition") != 0;
            from = b.label;
            block = f_.block_index(in.operands[c ? 1 : 2].name);
            break;
          }
          case Opcode::Goto:
            from = b.label;
            block = f_.block_index(in.operands[0].name);
            break;
          case Opcode::Ret:
            if (in.operands.empty()) return std::nullopt;
            return observe(in.operands[0], "returned value");
          default:
            set(in.def, compute(in));
        }
      }
    }
  }

  void set(const std::string& v, Value x) {
    if (!v.empty()) env_[v] = x;
  }

  const Function& f_;
  std::vector<std::int64_t> mem_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::string, Value> env_;
};

}  // namespace

std::string ExecResult::str() const {
  std::ostringstream os;
  if (trap != Trap::None)
    os << "trap " << trap_name(trap) << " (" << detail << ")";
  else if (value)
    os << "ret " << *value;
  else
    os << "ret";
  os << " mem=[" << join(memory) << "]";
  return os.str();
}

ExecResult eval(const Function& f, const std::vector<std::int64_t>& args, std::vector<std::int64_t> mem,
                std::uint64_t budget) {
  return Machine(f, std::move(mem), budget).run(args);
}

std::string DiffReport::str() const {
  std::ostringstream os;
  os << "trials=" << trials << " compared=" << compared << " excluded=" << excluded
     << " mismatches=" << mismatches.size() << '\n';
  for (const auto& m : mismatches)
    os << "  mismatch args=[" << join(m.args) << "] mem=[" << join(m.memory) << "]\n    expected: " << m.expected.str()
       << "\n    actual:   " << m.actual.str() << '\n';
  return os.str();
}

DiffReport differential_check(const Function& reference, const Function& candidate, int trials, std::uint64_t seed) {
  if (reference.params.size() != candidate.params.size())
    throw Error("@" + reference.name + " and @" + candidate.name + " have different signatures");
  DiffReport report;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> small(-8, 8);
  std::uniform_int_distribution<std::int64_t> bit(0, 1);
  for (int t = 0; t < trials; ++t) {
    std::vector<std::int64_t> args, mem;
    for (const auto& p : reference.params) args.push_back(p.guard ? bit(rng) : small(rng));
    for (std::size_t i = 0; i < kMemoryWords; ++i) mem.push_back(small(rng));
    ++report.trials;
    ExecResult expected = eval(reference, args, mem);
    if (expected.trap == Trap::UndefinedRead || expected.trap == Trap::PsiNoneTrue ||
        expected.trap == Trap::StepBudgetExhausted) {
      ++report.excluded;
      continue;
    }
    ++report.compared;
    ExecResult actual = eval(candidate, args, mem);
    bool same = expected.trap == actual.trap;
    if (same && expected.returned()) same = expected.value == actual.value && expected.memory == actual.memory;
    if (!same) report.mismatches.push_back({args, mem, expected, actual});
  }
  return report;
}

}  // namespace psikit
