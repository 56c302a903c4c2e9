#include <gtest/gtest.h>

#include "psikit/generator.hpp"
#include "psikit/text.hpp"
#include "psikit/validate.hpp"
#include "support.hpp"

using namespace psikit;
using testsupport::parse_one;

namespace {

const char* kFig1Psi = R"(
func @f(%p:guard, %i) {
b0:
  %p ? %a = add %i, 1
  !%p ? %b = add %i, 2
  %x = psi(%p ? %a, !%p ? %b)
  ret %x
}
)";

}  // namespace

TEST(Text, MinimalProgram) {
  Module m = parse_module("func @f(%a){ b0: %x = add %a, 1\n ret %x }");
  ASSERT_EQ(m.functions.size(), 1u);
  ASSERT_EQ(m.functions[0].blocks.size(), 1u);
  EXPECT_EQ(m.functions[0].blocks[0].instrs.size(), 2u);
}

TEST(Text, PsiArgsKeepOrder) {
  Function f = parse_one(kFig1Psi);
  const Instr& psi = f.blocks[0].instrs[2];
  ASSERT_TRUE(psi.is_psi());
  ASSERT_EQ(psi.psi_args.size(), 2u);
  EXPECT_EQ(psi.psi_args[0].pred, PredRef::of("p"));
  EXPECT_EQ(psi.psi_args[0].value, "a");
  EXPECT_EQ(psi.psi_args[1].pred, PredRef::of("p", true));
  EXPECT_EQ(psi.psi_args[1].value, "b");
}

TEST(Text, UndefinedBlockIsAnError) {
  EXPECT_THROW(parse_module("func @f(){ b0: goto b9 }"), ParseError);
}

TEST(Text, SyntaxErrorCarriesPosition) {
  try {
    parse_module("func @f() {\nb0:\n  %x = frob 1\n  ret %x\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Text, EmptyFunctionPrints) {
  Module m = parse_module("func @f(){ b0: ret }");
  std::string s = print_module(m);
  EXPECT_NE(s.find("func @f()"), std::string::npos);
  EXPECT_NE(s.find("ret"), std::string::npos);
}

TEST(Text, PrintsPsiArguments) {
  std::string s = print_function(parse_one(kFig1Psi));
  EXPECT_NE(s.find("psi(%p ? %a, !%p ? %b)"), std::string::npos);
}

TEST(Text, StoreAndLoadRoundTrip) {
  const char* text = R"(
func @m(%p:guard, %a) {
b0:
  %p ? store 3, %a
  %v = load 3
  ret %v
}
)";
  Module m = parse_module(text);
  EXPECT_EQ(parse_module(print_module(m)), m);
}

TEST(Text, GeneratedProgramsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Module m;
    m.functions.push_back(gen_random_program(seed, seed % 2 ? Profile::Small : Profile::Tiny));
    Module again = parse_module(print_module(m));
    ASSERT_EQ(again, m) << "seed " << seed;
    ASSERT_EQ(print_module(again), print_module(m));
  }
}

TEST(Validate, NonDisjointFigureIsCleanSsa) {
  const char* text = R"(
func @f(%p:guard, %q:guard) {
b0:
  %p ? %a = const 1
  !%p ? %b = const -1
  %x = psi(%p ? %a, !%p ? %b)
  %q ? %c = const 0
  %y = psi(%p ? %a, !%p ? %b, %q ? %c)
  ret %y
}
)";
  EXPECT_TRUE(validate(parse_one(text), ValidateMode::Ssa).empty());
}

TEST(Validate, MultipleDefinitions) {
  Function f = parse_one("func @f(%a) { b0:\n %x = add %a, 1\n %x = add %a, 2\n ret %x\n }");
  auto d = validate(f, ValidateMode::Ssa);
  ASSERT_TRUE(has_errors(d));
  EXPECT_NE(format_diagnostics(d).find("multiple definitions"), std::string::npos);
  EXPECT_FALSE(has_errors(validate(f, ValidateMode::NonSsa)));
}

TEST(Validate, PsiArgumentNotDominating) {
  const char* text = R"(
func @f(%p:guard, %u) {
b0:
  br %p, l, r
l:
  %a = add %u, 1
  goto j
r:
  %b = add %u, 2
  goto j
j:
  %x = psi(%p ? %a, !%p ? %b)
  ret %x
}
)";
  EXPECT_TRUE(has_errors(validate(parse_one(text), ValidateMode::Ssa)));
}

TEST(Validate, GeneratedProgramsAreValid) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    for (Profile p : {Profile::Tiny, Profile::Small}) {
      auto d = validate(gen_random_program(seed, p), ValidateMode::NonSsa);
      ASSERT_FALSE(has_errors(d)) << "seed " << seed << "\n" << format_diagnostics(d);
    }
}
