#include <gtest/gtest.h>

#include "psikit/alpha.hpp"
#include "psikit/generator.hpp"
#include "psikit/interp.hpp"
#include "psikit/ssa.hpp"
#include "psikit/text.hpp"
#include "psikit/validate.hpp"
#include "support.hpp"

using namespace psikit;
using testsupport::parse_one;

namespace {

const Instr& def_of(const Function& f, const std::string& v) {
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (in.def == v) return in;
  throw std::runtime_error("no def of " + v);
}

const char* kCopyFold = R"(
func @f(%p:guard, %q:guard, %u) {
b0:
  %p ? %a = add %u, 1
  %q ? %b = add %u, 2
  %p ? %c = mov %a
  %x = psi(%p ? %a, %q ? %b)
  %y = psi(%q ? %b, %p ? %c)
  %s = add %x, %y
  ret %s
}
)";

Function psi_fn(const std::string& psi_line, const std::string& extra = "") {
  return parse_one(R"(
func @f(%p:guard, %q:guard, %u) {
b0:
  %p ? %a = add %u, 1
  !%p ? %b = add %u, 2
  %q ? %c = add %u, 3
)" + extra + "  " + psi_line + "\n  ret %x\n}\n");
}

}  // namespace

TEST(ConstructSsa, DiamondGetsPhi) {
  Function f = parse_one(R"(
func @f(%p:guard, %i) {
b0:
  br %p, then, else
then:
  %x = add %i, 1
  goto join
else:
  %x = add %i, 2
  goto join
join:
  ret %x
}
)");
  SsaForm s = construct_ssa(f);
  EXPECT_TRUE(s.is_ssa);
  EXPECT_FALSE(has_errors(validate(s.function, ValidateMode::Ssa)));
  const Instr& phi = s.function.blocks[3].instrs[0];
  ASSERT_TRUE(phi.is_phi());
  EXPECT_EQ(phi.phi_args.size(), 2u);
  EXPECT_NE(phi.phi_args[0].value, phi.phi_args[1].value);
}

TEST(ConstructSsa, StraightLineUnchanged) {
  Function f = parse_one("func @f(%a) { b0:\n %x = add %a, 1\n %y = mul %x, %x\n ret %y\n }");
  EXPECT_TRUE(alpha_equivalent(construct_ssa(f).function, f));
}

TEST(ConstructSsa, GuardedRedefinitionBecomesPsi) {
  Function f = parse_one("func @f(%p:guard, %a) { b0:\n %x = add %a, 1\n %p ? %x = add %a, 2\n ret %x\n }");
  Function s = construct_ssa(f).function;
  EXPECT_TRUE(contains_psi(s));
  EXPECT_TRUE(differential_check(f, s, 32, 1).ok());
}

TEST(ConstructSsa, RandomProgramsEquivalent) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Function f = gen_random_program(seed, seed % 2 ? Profile::Small : Profile::Tiny);
    Function s = construct_ssa(f).function;
    ASSERT_FALSE(has_errors(validate(s, ValidateMode::Ssa))) << seed;
    DiffReport r = differential_check(f, s, 32, seed);
    ASSERT_TRUE(r.ok()) << "seed " << seed << "\n" << r.str();
  }
}

TEST(CopyFold, FigureFoldsGuardedCopy) {
  Function f = parse_one(kCopyFold);
  Function before = f;
  EXPECT_EQ(copy_fold(f, guard_env_for(f)), 1u);
  const Instr& y = def_of(f, "y");
  EXPECT_EQ(y.psi_args[1].value, "a");
  EXPECT_EQ(y.psi_args[1].pred, PredRef::of("p"));
  EXPECT_TRUE(differential_check(before, f, 32, 3).ok());
}

TEST(CopyFold, UnguardedCopy) {
  Function f = parse_one("func @f(%y) { b0:\n %x = mov %y\n %z = add %x, 1\n ret %z\n }");
  copy_fold(f, guard_env_for(f));
  EXPECT_EQ(def_of(f, "z").operands[0].name, "y");
  EXPECT_EQ(count_copies(f), 0u);
}

TEST(CopyFold, GuardedCopyUnderTrueNotFolded) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %a = add %u, 1
  %p ? %c = mov %a
  %x = psi(1 ? %c)
  ret %x
}
)");
  copy_fold(f, guard_env_for(f));
  EXPECT_EQ(def_of(f, "x").psi_args[0].value, "c");
}

TEST(IsNormalized, CopyFoldFigure) {
  Function a = parse_one(kCopyFold);
  DomTree dom_a(a);
  GuardEnv env_a = guard_env_for(a);
  EXPECT_TRUE(is_normalized(a, def_of(a, "x"), dom_a, env_a));
  EXPECT_TRUE(is_normalized(a, def_of(a, "y"), dom_a, env_a));
  Function b = a;
  copy_fold(b, guard_env_for(b));
  DomTree dom_b(b);
  EXPECT_FALSE(is_normalized(b, def_of(b, "y"), dom_b, guard_env_for(b)));
  EXPECT_FALSE(all_normalized(b));
}

TEST(PsiInline, NonDisjointFigure) {
  Function f = parse_one(R"(
func @f(%p:guard, %q:guard) {
b0:
  %p ? %a = const 1
  !%p ? %b = const -1
  %x = psi(%p ? %a, !%p ? %b)
  %q ? %c = const 0
  %y = psi(1 ? %x, %q ? %c)
  ret %y
}
)");
  Function before = f;
  psi_inline(f, "y", 0, guard_env_for(f));
  const Instr& y = def_of(f, "y");
  ASSERT_EQ(y.psi_args.size(), 3u);
  EXPECT_EQ(y.psi_args[0], (PsiArg{PredRef::of("p"), "a"}));
  EXPECT_EQ(y.psi_args[1], (PsiArg{PredRef::of("p", true), "b"}));
  EXPECT_EQ(y.psi_args[2], (PsiArg{PredRef::of("q"), "c"}));
  EXPECT_TRUE(differential_check(before, f, 32, 2).ok());
}

TEST(PsiInline, SingleArgument) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %p ? %a = add %u, 1
  %x = psi(%p ? %a)
  %y = psi(1 ? %u, %p ? %x)
  ret %y
}
)");
  psi_inline(f, "y", 1, guard_env_for(f));
  EXPECT_EQ(def_of(f, "y").psi_args[1], (PsiArg{PredRef::of("p"), "a"}));
}

TEST(PsiInline, NotPsiDefined) {
  Function f = psi_fn("%x = psi(%p ? %a, !%p ? %b)");
  EXPECT_THROW(psi_inline(f, "x", 0, guard_env_for(f)), NotPsiDefined);
}

TEST(PsiReduce, Examples) {
  Function f = psi_fn("%x = psi(%p ? %a, 1 ? %b)");
  EXPECT_EQ(psi_reduce(f, "x", guard_env_for(f)), 1u);
  EXPECT_EQ(def_of(f, "x").psi_args, (std::vector<PsiArg>{{PredRef::always(), "b"}}));

  Function g = psi_fn("%x = psi(%p ? %a, !%p ? %b)");
  EXPECT_EQ(psi_reduce(g, "x", guard_env_for(g)), 0u);

  Function h = psi_fn("%x = psi(%p ? %a, %p ? %c, !%p ? %b)", "  %p ? %c2 = add %u, 4\n");
  // second argument rewritten to a p-guarded value
  for (auto& b : h.blocks)
    for (auto& in : b.instrs)
      if (in.is_psi()) in.psi_args[1].value = "c2";
  Function before = h;
  EXPECT_EQ(psi_reduce(h, "x", guard_env_for(h)), 1u);
  auto args = def_of(h, "x").psi_args;
  ASSERT_EQ(args.size(), 2u);
  EXPECT_EQ(args[0], (PsiArg{PredRef::of("p"), "c2"}));
  EXPECT_EQ(args[1], (PsiArg{PredRef::of("p", true), "b"}));
}

TEST(PsiProject, Examples) {
  Function f = psi_fn("%x = psi(%p ? %a, !%p ? %b)");
  GuardEnv env = guard_env_for(f);
  std::string xp = psi_project(f, "x", env.of(PredRef::of("p")), env);
  EXPECT_EQ(def_of(f, xp).psi_args, (std::vector<PsiArg>{{PredRef::of("p"), "a"}}));
  std::string xt = psi_project(f, "x", PredExpr::top(), env);
  EXPECT_EQ(def_of(f, xt).psi_args, def_of(f, "x").psi_args);

  Function g = psi_fn("%x = psi(%p ? %a, %q ? %c)");
  GuardEnv genv = guard_env_for(g);
  std::string gp = psi_project(g, "x", genv.of(PredRef::of("p")), genv);
  EXPECT_EQ(def_of(g, gp).psi_args.size(), 2u);
}

TEST(PsiPromote, FirstArgumentToTrue) {
  Function f = psi_fn("%x = psi(%p ? %a, !%p ? %b)");
  Function before = f;
  psi_promote(f, "x", 0, PredRef::always(), guard_env_for(f), MachineModel::full());
  const Instr& x = def_of(f, "x");
  EXPECT_EQ(x.psi_args[0], (PsiArg{PredRef::always(), "a"}));
  EXPECT_EQ(x.psi_args[1], (PsiArg{PredRef::of("p", true), "b"}));
  EXPECT_TRUE(def_of(f, "a").guard.is_true());
  EXPECT_TRUE(differential_check(before, f, 32, 4).ok());
}

TEST(PsiPromote, InterferencesFigure) {
  Function f = parse_one(testsupport::read_file(std::string(PSIKIT_GOLDEN_DIR) + "/interferences.in.pir"));
  psi_promote(f, "b", 0, PredRef::always(), guard_env_for(f), MachineModel::full());
  EXPECT_EQ(def_of(f, "b").psi_args[0], (PsiArg{PredRef::always(), "c"}));
  EXPECT_TRUE(all_normalized(f));
}

TEST(PsiPromote, LastArgumentBeyondDomainViolatesCondition2) {
  Function f = psi_fn("%x = psi(%q ? %c, %p ? %a)");
  Function before = f;
  try {
    psi_promote(f, "x", 1, PredRef::always(), guard_env_for(f), MachineModel::full());
    FAIL();
  } catch (const ConditionViolated& e) {
    EXPECT_EQ(e.which(), 2);
  }
  EXPECT_EQ(f, before);
}

TEST(PsiPromote, Condition1NeedsSpeculation) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %p ? %a = load 2
  %x = psi(%p ? %a, !%p ? %u)
  ret %x
}
)");
  try {
    psi_promote(f, "x", 0, PredRef::always(), guard_env_for(f), MachineModel::full());
    FAIL();
  } catch (const ConditionViolated& e) {
    EXPECT_EQ(e.which(), 1);
  }
}

TEST(SelectForm, FigureEquivalence) {
  const char* text = R"(
func @f(%p:guard, %q:guard, %u) {
b0:
  %a = add %u, 1
  %p ? %b = add %u, 2
  %q ? %c = add %u, 3
  %x = psi(1 ? %a, %p ? %b, %q ? %c)
  ret %x
}
)";
  Function f = parse_one(text);
  Function s = f;
  EXPECT_EQ(psi_to_select(s), 1u);
  EXPECT_FALSE(contains_psi(s));
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      ExecResult a = eval(f, {p, q, 10}), b = eval(s, {p, q, 10});
      ASSERT_TRUE(a.returned() && b.returned());
      EXPECT_EQ(*a.value, *b.value) << p << q;
      EXPECT_EQ(*a.value, q ? 13 : p ? 12 : 11);
    }
}
