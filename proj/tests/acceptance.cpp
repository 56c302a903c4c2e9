// One line per acceptance criterion. Exit status is non-zero when any
// criterion fails.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "psikit/generator.hpp"
#include "psikit/ifconvert.hpp"
#include "psikit/interp.hpp"
#include "psikit/out_of_ssa.hpp"
#include "psikit/pipeline.hpp"
#include "psikit/ssa.hpp"
#include "psikit/text.hpp"
#include "psikit/validate.hpp"
#include "support.hpp"

using namespace psikit;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr double kGoldenSeconds = 1.0;
constexpr double kFuzzSeconds = 120.0;
constexpr int kFuzzSeeds = 1000;
constexpr int kVectors = 32;
constexpr int kFormulaPairs = 20000;
constexpr int kMaxSymbols = 8;
constexpr int kLivenessFunctions = 200;
constexpr int kCorpusSeeds = 150;

const std::string kDir = PSIKIT_TEST_DIR;

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %d: %s %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Function load(const std::string& path) { return testsupport::parse_one(testsupport::read_file(path)); }

PipelineConfig config(const std::string& passes, bool ssa_input) {
  PipelineConfig c;
  c.passes = parse_pass_list(passes);
  c.ssa_input = ssa_input;
  return c;
}

// Hand-written SSA functions with psis: the golden inputs (converted when
// needed) and the witnesses.
std::vector<Function> crafted_corpus() {
  std::vector<Function> out;
  for (const auto& c : testsupport::load_golden_cases(kDir + "/golden")) {
    Function f = load(c.input);
    if (!c.config.ssa_input) f = run_pipeline(f, config("ssa,ifconvert", false)).function;
    out.push_back(f);
  }
  for (const char* w : {"reorder_disjoint", "disjoint_interference", "left_only", "ignore_result"})
    out.push_back(load(kDir + "/witness/" + std::string(w) + ".pir"));
  return out;
}

// Generated programs after if-conversion, with and without promotion.
std::vector<Function> generated_corpus() {
  std::vector<Function> out;
  for (int seed = 0; seed < kCorpusSeeds; ++seed)
    for (Profile p : {Profile::Tiny, Profile::Small}) {
      Function g = gen_random_program(seed, p);
      out.push_back(run_pipeline(g, config("ssa,fold,ifconvert", false)).function);
      out.push_back(run_pipeline(g, config("ssa,fold,ifconvert,psi-promote", false)).function);
    }
  return out;
}

std::vector<Function> psi_corpus() {
  std::vector<Function> out = crafted_corpus();
  for (Function& f : generated_corpus()) out.push_back(std::move(f));
  return out;
}

void criterion1() {
  auto t0 = Clock::now();
  int pass = 0, total = 0;
  std::string failed;
  for (const auto& c : testsupport::load_golden_cases(kDir + "/golden")) {
    ++total;
    if (!testsupport::run_golden(c))
      ++pass;
    else
      failed += " " + c.name;
  }
  double s = seconds_since(t0);
  std::ostringstream d;
  d << "figure goldens " << pass << "/" << total << " alpha-equivalent in " << s << "s (limit " << kGoldenSeconds
    << "s)";
  if (!failed.empty()) d << "; differ:" << failed;
  report(1, pass == total && s < kGoldenSeconds, d.str());
}

void criterion2() {
  Function f = load(kDir + "/golden/interferences.in.pir");
  PipelineResult plain = run_pipeline(f, config("out-of-ssa", true));
  PipelineResult promo = run_pipeline(f, config("psi-promote,out-of-ssa", true));
  const auto& a = plain.stats;
  const auto& b = promo.stats;
  bool equiv = differential_check(f, plain.function, kVectors, 1).ok() &&
               differential_check(f, promo.function, kVectors, 1).ok();
  bool ok = a.copies_normalize == 1 && a.copies_psi_congruence == 0 && a.copies_phi_congruence == 1 &&
            b.inserted() == 0 && b.total_copies < a.total_copies && equiv;
  std::ostringstream d;
  d << "no promotion: normalize=" << a.copies_normalize << " psi=" << a.copies_psi_congruence
    << " phi=" << a.copies_phi_congruence << " total=" << a.total_copies << "; promotion: normalize=" << b.copies_normalize
    << " psi=" << b.copies_psi_congruence << " phi=" << b.copies_phi_congruence << " total=" << b.total_copies
    << "; equivalent=" << (equiv ? "yes" : "no");
  report(2, ok, d.str());
}

void criterion3() {
  auto t0 = Clock::now();
  PipelineConfig c = config("ssa,fold,ifconvert,psi-promote,out-of-ssa", false);
  int programs = 0, mismatches = 0, failures3 = 0;
  long excluded = 0;
  for (int seed = 0; seed < kFuzzSeeds; ++seed)
    for (Profile p : {Profile::Tiny, Profile::Small}) {
      ++programs;
      Function f = gen_random_program(seed, p);
      try {
        PipelineResult r = run_pipeline(f, c);
        if (has_errors(validate(r.function, ValidateMode::NonSsa))) {
          ++failures3;
          continue;
        }
        DiffReport rep = differential_check(f, r.function, kVectors, seed);
        excluded += rep.excluded;
        if (!rep.ok()) ++mismatches;
      } catch (const std::exception&) {
        ++failures3;
      }
    }
  double s = seconds_since(t0);
  std::ostringstream d;
  d << "programs=" << programs << " vectors=" << kVectors << " excluded=" << excluded << " mismatching programs="
    << mismatches << " pipeline failures=" << failures3 << " in " << s << "s (limit " << kFuzzSeconds << "s)";
  report(3, mismatches == 0 && failures3 == 0 && s < kFuzzSeconds, d.str());
}

void criterion4() {
  struct Witness {
    const char* file;
    bool OutOfSsaOptions::*flag;
  };
  const Witness witnesses[] = {{"reorder_disjoint", &OutOfSsaOptions::reorder_disjoint},
                               {"disjoint_interference", &OutOfSsaOptions::disjoint_interference},
                               {"left_only", &OutOfSsaOptions::left_only},
                               {"ignore_result", &OutOfSsaOptions::ignore_result}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& w : witnesses) {
    Function f = load(kDir + "/witness/" + std::string(w.file) + ".pir");
    PipelineConfig on = config("out-of-ssa", true), off = on;
    off.options.*w.flag = false;
    PipelineResult a = run_pipeline(f, on), b = run_pipeline(f, off);
    bool equiv = differential_check(f, a.function, kVectors, 1).ok() && differential_check(f, b.function, kVectors, 1).ok();
    bool good = a.stats.inserted() < b.stats.inserted() && equiv;
    ok = ok && good;
    d << w.file << " " << b.stats.inserted() << "->" << a.stats.inserted() << (good ? "" : " (FAIL)") << "; ";
  }
  // Runs (function, flag) where turning the flag on inserts more copies.
  auto count_worse = [&](const std::vector<Function>& corpus, int& compared, std::string& first) {
    int worse = 0;
    for (const Function& f : corpus)
      for (const auto& w : witnesses) {
        PipelineConfig on = config("out-of-ssa", true), off = on;
        off.options.*w.flag = false;
        ++compared;
        std::size_t a = run_pipeline(f, on).stats.inserted(), b = run_pipeline(f, off).stats.inserted();
        if (a > b) {
          ++worse;
          if (first.empty()) first = " first: @" + f.name + " " + w.file + " " + std::to_string(b) + "->" + std::to_string(a);
        }
      }
    return worse;
  };
  int crafted = 0, generated = 0;
  std::string first_crafted, first_generated;
  int worse = count_worse(crafted_corpus(), crafted, first_crafted);
  int worse_gen = count_worse(generated_corpus(), generated, first_generated);
  d << "crafted corpus runs where enabling an improvement added copies: " << worse << "/" << crafted << first_crafted
    << "; generated programs (informational, fallback repair): " << worse_gen << "/" << generated;
  report(4, ok && worse == 0, d.str());
}

void criterion5() {
  std::mt19937_64 rng(2024);
  GuardEnv env;
  int wrong = 0;
  for (int i = 0; i < kFormulaPairs; ++i) {
    int n = 1 + int(rng() % kMaxSymbols);
    auto a = testsupport::random_formula(rng, n, 4), b = testsupport::random_formula(rng, n, 4);
    auto ta = testsupport::truth_table(a, n), tb = testsupport::truth_table(b, n);
    PredExpr pa = testsupport::to_pred(a), pb = testsupport::to_pred(b);
    if (domain_subset(pa, pb, env) != (ta & ~tb).none()) ++wrong;
    if (domain_disjoint(pa, pb, env) != (ta & tb).none()) ++wrong;
  }

  int compared = 0, differ = 0;
  for (std::uint64_t seed = 0; compared < kLivenessFunctions && seed < 10 * kLivenessFunctions; ++seed) {
    Function f = testsupport::random_psi_function(seed);
    Function sel = f;
    psi_to_select(sel);
    if (contains_psi(sel)) continue;
    ++compared;
    auto guards = testsupport::guard_names(f);
    std::set<std::string> names;
    for (const auto& p : f.params) names.insert(p.name);
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        if (!in.def.empty() && !guards.count(in.def)) names.insert(in.def);
    auto keep = [&](const std::set<std::string>& s) {
      std::set<std::string> out;
      for (const auto& v : s)
        if (names.count(v)) out.insert(v);
      return out;
    };
    LivenessInfo live = liveness(f);
    auto plain = testsupport::plain_liveness(sel);
    InterferenceGraph ig = interference_graph(f, live, guard_env_for(f), false);
    bool same = true;
    for (std::size_t b = 0; b < f.blocks.size(); ++b)
      same = same && keep(live.live_in[b]) == keep(plain.live_in[b]) && keep(live.live_out[b]) == keep(plain.live_out[b]);
    for (const auto& a : names)
      for (const auto& c : names)
        if (a < c && ig.interferes(a, c) != (plain.edges.count({a, c}) != 0)) same = false;
    if (!same) ++differ;
  }
  std::ostringstream d;
  d << "predicate queries wrong " << wrong << "/" << 2 * kFormulaPairs << " (<= " << kMaxSymbols
    << " symbols); liveness differs from select form on " << differ << "/" << compared << " functions";
  report(5, wrong == 0 && differ == 0 && compared == kLivenessFunctions, d.str());
}

void criterion6() {
  int not_fixpoint = 0, invalid = 0, mismatch = 0, errors = 0, total = 0;
  for (const Function& f : psi_corpus()) {
    ++total;
    Function g = f;
    psi_normalize(g, true);
    if (psi_normalize(g, true) != 0 || !all_normalized(g)) ++not_fixpoint;
    Function h = f;
    try {
      run_out_of_ssa(h, OutOfSsaOptions{});
    } catch (const std::exception&) {
      ++errors;
      continue;
    }
    if (has_errors(validate(h, ValidateMode::NonSsa))) ++invalid;
    if (!differential_check(f, h, kVectors, 3).ok()) ++mismatch;
  }
  std::ostringstream d;
  d << "corpus=" << total << " normalize not a fixpoint=" << not_fixpoint << " invalid non-SSA=" << invalid
    << " mismatches=" << mismatch << " errors=" << errors;
  report(6, not_fixpoint == 0 && invalid == 0 && mismatch == 0 && errors == 0, d.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  return failures == 0 ? 0 : 1;
}
