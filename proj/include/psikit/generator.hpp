// Random structured programs for differential fuzzing.
#pragma once

#include <cstdint>
#include <string_view>

#include "psikit/ir.hpp"

namespace psikit {

enum class Profile { Tiny, Small };
Profile parse_profile(std::string_view name);  // "tiny" or "small"
std::string_view profile_name(Profile p);

/// Non-SSA function with nested if/else and if-then regions, short counted
/// loops, guarded assignments and loads/stores at constant in-range
/// addresses. Every variable is initialized in the entry block. The same
/// seed and profile always give the same function.
Function gen_random_program(std::uint64_t seed, Profile profile);

}  // namespace psikit
