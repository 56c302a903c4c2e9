#include "psikit/generator.hpp"

#include <random>

namespace psikit {

Profile parse_profile(std::string_view name) {
  if (name == "tiny") return Profile::Tiny;
  if (name == "small") return Profile::Small;
  throw Error("unknown profile '" + std::string(name) + "'");
}

std::string_view profile_name(Profile p) { return p == Profile::Tiny ? "tiny" : "small"; }

namespace {

struct Shape {
  int params;
  int vars;
  int top_statements;
  int arm_statements;
  int max_depth;
  int max_loops;
};

class Gen {
 public:
  Gen(std::uint64_t seed, Profile p)
      : rng_(seed),
        shape_(p == Profile::Tiny ? Shape{2, 3, 4, 2, 2, 1} : Shape{3, 5, 8, 3, 3, 2}) {}

  Function build(std::uint64_t seed) {
    f_.name = "gen" + std::to_string(seed);
    for (int i = 0; i < shape_.params; ++i) f_.params.push_back({"a" + std::to_string(i), false});
    cur_ = new_block();
    for (int i = 0; i < shape_.vars; ++i) {
      std::string v = "v" + std::to_string(i);
      vars_.push_back(v);
      if (pick(2) == 0)
        emit(make_op(Opcode::Const, v, {Operand::immediate(pick(9) - 4)}));
      else
        emit(make_op(Opcode::Add, v, {Operand::var(param()), Operand::immediate(pick(5) - 2)}));
    }
    statements(shape_.top_statements, 0);
    std::string acc = vars_[0];
    for (std::size_t i = 1; i < vars_.size(); ++i) {
      std::string t = temp("r");
      emit(make_op(Opcode::Add, t, {Operand::var(acc), Operand::var(vars_[i])}));
      acc = t;
    }
    emit(make_op(Opcode::Ret, "", {Operand::var(acc)}));
    return std::move(f_);
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string param() { return f_.params[pick(static_cast<int>(f_.params.size()))].name; }
  std::string var() { return vars_[pick(static_cast<int>(vars_.size()))]; }
  std::string source() { return pick(4) == 0 ? param() : var(); }
  Operand operand() { return pick(5) == 0 ? Operand::immediate(pick(7) - 3) : Operand::var(source()); }
  std::string temp(const char* base) { return base + std::to_string(temps_++); }

  int new_block() {
    f_.blocks.push_back({"b" + std::to_string(f_.blocks.size()), {}});
    return static_cast<int>(f_.blocks.size()) - 1;
  }
  const std::string& label(int b) const { return f_.blocks[b].label; }
  void emit(Instr in) { f_.blocks[cur_].instrs.push_back(std::move(in)); }

  std::string condition() {
    static const Opcode cmps[] = {Opcode::CmpEq, Opcode::CmpLt, Opcode::CmpLe};
    std::string c = temp("c");
    emit(make_op(cmps[pick(3)], c, {Operand::var(source()), operand()}));
    return c;
  }

  void assignment() {
    static const Opcode ops[] = {Opcode::Add, Opcode::Sub, Opcode::Mul};
    std::string v = var();
    switch (pick(8)) {
      case 0:
        emit(make_op(Opcode::Neg, v, {Operand::var(source())}));
        break;
      case 1:
        emit(make_copy(v, source()));
        break;
      case 2: {
        std::string c = condition();
        emit(make_op(Opcode::Select, v, {Operand::var(c), Operand::var(source()), operand()}));
        break;
      }
      case 3: {
        std::string c = condition();
        emit(make_op(ops[pick(3)], v, {Operand::var(source()), operand()}, PredRef::of(c, pick(2) == 0)));
        break;
      }
      case 4:
        emit(make_op(Opcode::Load, v, {Operand::immediate(pick(static_cast<int>(kWords)))}));
        break;
      case 5:
        emit(make_op(Opcode::Store, "", {Operand::immediate(pick(static_cast<int>(kWords))), Operand::var(source())}));
        break;
      default:
        emit(make_op(ops[pick(3)], v, {Operand::var(source()), operand()}));
    }
  }

  void statements(int n, int depth) {
    for (int i = 0; i < n; ++i) {
      int roll = pick(10);
      if (depth < shape_.max_depth && roll < 3)
        branch(depth);
      else if (depth < shape_.max_depth && loops_ < shape_.max_loops && roll == 3)
        loop(depth);
      else
        assignment();
    }
  }

  void branch(int depth) {
    std::string c = condition();
    bool diamond = pick(3) != 0;
    int then_b = new_block();
    int else_b = diamond ? new_block() : -1;
    int merge = new_block();
    emit(make_op(Opcode::Br, "", {Operand::var(c), Operand::label(label(then_b)),
                                  Operand::label(label(diamond ? else_b : merge))}));
    cur_ = then_b;
    statements(1 + pick(shape_.arm_statements), depth + 1);
    emit(make_op(Opcode::Goto, "", {Operand::label(label(merge))}));
    if (diamond) {
      cur_ = else_b;
      statements(1 + pick(shape_.arm_statements), depth + 1);
      emit(make_op(Opcode::Goto, "", {Operand::label(label(merge))}));
    }
    cur_ = merge;
  }

  void loop(int depth) {
    ++loops_;
    std::string i = "i" + std::to_string(loops_);
    emit(make_op(Opcode::Const, i, {Operand::immediate(0)}));
    int head = new_block();
    int body = new_block();
    int exit = new_block();
    emit(make_op(Opcode::Goto, "", {Operand::label(label(head))}));
    cur_ = head;
    std::string c = temp("c");
    emit(make_op(Opcode::CmpLt, c, {Operand::var(i), Operand::immediate(1 + pick(3))}));
    emit(make_op(Opcode::Br, "", {Operand::var(c), Operand::label(label(body)), Operand::label(label(exit))}));
    cur_ = body;
    statements(1 + pick(shape_.arm_statements), depth + 1);
    emit(make_op(Opcode::Add, i, {Operand::var(i), Operand::immediate(1)}));
    emit(make_op(Opcode::Goto, "", {Operand::label(label(head))}));
    cur_ = exit;
  }

  static constexpr std::size_t kWords = 8;

  std::mt19937_64 rng_;
  Shape shape_;
  Function f_;
  std::vector<std::string> vars_;
  int cur_ = 0;
  int temps_ = 0;
  int loops_ = 0;
};

}  // namespace

Function gen_random_program(std::uint64_t seed, Profile profile) { return Gen(seed, profile).build(seed); }

}  // namespace psikit
