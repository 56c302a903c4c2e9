// Helpers shared by the unit tests and the acceptance binary, including
// the independent oracles (truth tables, plain liveness).
#pragma once

#include <bitset>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "psikit/ir.hpp"
#include "psikit/pipeline.hpp"
#include "psikit/predicates.hpp"

namespace testsupport {

using psikit::Function;

Function parse_one(const std::string& text);
std::string read_file(const std::string& path);

struct GoldenCase {
  std::string name;
  std::string input;     // file paths
  std::string expected;
  psikit::PipelineConfig config;
};

std::vector<GoldenCase> load_golden_cases(const std::string& dir);
/// nullopt when the pipeline output is alpha-equivalent to the expected file.
std::optional<std::string> run_golden(const GoldenCase& c);

// Boolean formulas kept apart from PredExpr: a formula is a vector of
// nodes, evaluated by brute force over all 2^n assignments.
struct Formula {
  enum Kind { T, F, Var, Not, And, Or };
  struct Node {
    Kind kind;
    int a = -1, b = -1;  // child nodes, or the variable index for Var
  };
  std::vector<Node> nodes;  // root is the last node
};

Formula random_formula(std::mt19937_64& rng, int symbols, int depth);
/// Bit i of the result is the value under assignment i.
std::bitset<256> truth_table(const Formula& f, int symbols);
psikit::PredExpr to_pred(const Formula& f);

// Plain liveness for code without psis: phi arguments are live out of the
// predecessor, phi results are born at the block head, any definition
// kills.
struct PlainLiveness {
  std::vector<std::set<std::string>> live_in;
  std::vector<std::set<std::string>> live_out;
  std::set<std::pair<std::string, std::string>> edges;  // ordered pairs a < b
};
PlainLiveness plain_liveness(const Function& f);

/// Straight-line or single-loop function whose psis are normalized and
/// every argument after the first is private to its psi.
Function random_psi_function(std::uint64_t seed);

/// Names of guard registers (params marked guard and guard-defining ops).
std::set<std::string> guard_names(const Function& f);

}  // namespace testsupport
