#include <gtest/gtest.h>

#include "psikit/generator.hpp"
#include "psikit/interp.hpp"
#include "support.hpp"

using namespace psikit;
using testsupport::parse_one;

namespace {

const char* kFig1 = R"(
func @f(%p:guard, %i) {
b0:
  %p ? %a = add %i, 1
  !%p ? %b = add %i, 2
  %x = psi(%p ? %a, !%p ? %b)
  ret %x
}
)";

const char* kPartialBefore = R"(
func @f(%p:guard, %i) {
b0:
  br %p, then, else
then:
  %a = add %i, 1
  goto join
else:
  %b = add %i, 2
  goto join
join:
  %x = phi(then: %a, else: %b)
  ret %x
}
)";

}  // namespace

TEST(Eval, FirstFigure) {
  Function f = parse_one(kFig1);
  EXPECT_EQ(*eval(f, {1, 10}).value, 11);
  EXPECT_EQ(*eval(f, {0, 10}).value, 12);
}

TEST(Eval, SingleArgumentPsi) {
  Function f = parse_one("func @f(%u) { b0:\n %a = mul %u, 3\n %x = psi(1 ? %a)\n ret %x\n }");
  for (int u = -3; u <= 3; ++u) EXPECT_EQ(*eval(f, {u}).value, 3 * u);
}

TEST(Eval, PsiWithNoTruePredicateTraps) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %p ? %a = add %u, 1
  %x = psi(%p ? %a)
  ret %x
}
)");
  EXPECT_EQ(eval(f, {0, 1}).trap, Trap::PsiNoneTrue);
  EXPECT_EQ(*eval(f, {1, 1}).value, 2);
}

TEST(Eval, UndefinedOnlyTrapsWhenObserved) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %p ? %a = add %u, 1
  %b = add %a, 1
  %c = add %u, 2
  ret %c
}
)");
  EXPECT_TRUE(eval(f, {0, 1}).returned());
  Function g = parse_one("func @f(%p:guard, %u) { b0:\n %p ? %a = add %u, 1\n ret %a\n }");
  EXPECT_EQ(eval(g, {0, 1}).trap, Trap::UndefinedRead);
}

TEST(Eval, KleeneAnd) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %p ? %a = cmp_lt %u, 3
  %z = cmp_lt %u, -100
  %g = and %z, %a
  %g ? %r = const 1
  %s = const 0
  %x = psi(1 ? %s, %g ? %r)
  ret %x
}
)");
  ExecResult r = eval(f, {0, 1});
  ASSERT_TRUE(r.returned()) << r.str();
  EXPECT_EQ(*r.value, 0);
}

TEST(Eval, MemoryAndBounds) {
  Function f = parse_one("func @f(%v) { b0:\n store 2, %v\n %x = load 2\n ret %x\n }");
  ExecResult r = eval(f, {7});
  EXPECT_EQ(*r.value, 7);
  EXPECT_EQ(r.memory[2], 7);
  Function g = parse_one("func @f(%a) { b0:\n %x = load %a\n ret %x\n }");
  EXPECT_EQ(eval(g, {8}).trap, Trap::OutOfBoundsMemory);
  EXPECT_EQ(eval(g, {-1}).trap, Trap::OutOfBoundsMemory);
}

TEST(Eval, StepBudget) {
  Function f = parse_one("func @f() { b0:\n goto b0\n }");
  EXPECT_EQ(eval(f, {}, {}, 1000).trap, Trap::StepBudgetExhausted);
}

TEST(Eval, SelectFormAgreesOnAllPredicates) {
  Function psi = parse_one(R"(
func @f(%p:guard, %q:guard, %u) {
b0:
  %a = add %u, 1
  %p ? %b = add %u, 2
  %q ? %c = add %u, 3
  %x = psi(1 ? %a, %p ? %b, %q ? %c)
  ret %x
}
)");
  Function sel = parse_one(R"(
func @f(%p:guard, %q:guard, %u) {
b0:
  %a = add %u, 1
  %t = add %u, 2
  %b = select %p, %t, %a
  %s = add %u, 3
  %c = select %q, %s, %b
  %x = mov %c
  ret %x
}
)");
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) EXPECT_EQ(*eval(psi, {p, q, 5}).value, *eval(sel, {p, q, 5}).value);
}

TEST(DifferentialCheck, Reflexive) {
  Function f = gen_random_program(3, Profile::Small);
  DiffReport r = differential_check(f, f, 32, 17);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.trials, 32);
}

TEST(DifferentialCheck, PartialPredicationForms) {
  Function a = parse_one(kPartialBefore);
  Function c = parse_one(R"(
func @f(%p:guard, %i) {
b0:
  %a = add %i, 1
  %b = add %i, 2
  %x = psi(%p ? %a, !%p ? %b)
  ret %x
}
)");
  DiffReport r = differential_check(a, c, 32, 1);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.excluded, 0);
}

TEST(DifferentialCheck, FindsSwappedArguments) {
  Function f = parse_one(R"(
func @f(%p:guard, %u) {
b0:
  %a = add %u, 1
  %p ? %b = add %u, 2
  %x = psi(1 ? %a, %p ? %b)
  ret %x
}
)");
  Function bad = f;
  std::swap(bad.blocks[0].instrs[2].psi_args[0], bad.blocks[0].instrs[2].psi_args[1]);
  DiffReport r = differential_check(f, bad, 32, 1);
  EXPECT_FALSE(r.ok());
  ASSERT_FALSE(r.mismatches.empty());
  EXPECT_EQ(r.mismatches[0].args[0], 1);
}

TEST(Generator, Deterministic) {
  EXPECT_EQ(gen_random_program(0, Profile::Tiny), gen_random_program(0, Profile::Tiny));
  EXPECT_NE(gen_random_program(0, Profile::Tiny), gen_random_program(1, Profile::Tiny));
}

TEST(Generator, ProgramsRunWithoutTraps) {
  int runs = 0, traps = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    for (Profile p : {Profile::Tiny, Profile::Small}) {
      Function f = gen_random_program(seed, p);
      std::vector<std::int64_t> args;
      for (std::size_t i = 0; i < f.params.size(); ++i) args.push_back(f.params[i].guard ? int(seed % 2) : int(seed % 7) - 3);
      ++runs;
      if (!eval(f, args).returned()) ++traps;
    }
  EXPECT_LE(traps * 100, runs);
}
