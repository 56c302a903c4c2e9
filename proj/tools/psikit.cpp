// psikit: run pass pipelines over .pir files, print statistics, verify
// against the interpreter, and fuzz.
#include <CLI11.hpp>

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "psikit/analysis.hpp"
#include "psikit/generator.hpp"
#include "psikit/interp.hpp"
#include "psikit/pipeline.hpp"
#include "psikit/text.hpp"
#include "psikit/validate.hpp"

using namespace psikit;

namespace {

struct Options {
  std::vector<std::string> files;
  std::string passes;
  std::string machine = "full";
  std::string predicable;
  std::string speculatable;
  bool verify = false;
  int trials = 32;
  std::uint64_t seed = 0;
  bool stats = false;
  std::string stats_format = "text";
  std::vector<std::string> dump_after;
  bool dump_liveness = false;
  bool dump_interference = false;
  bool no_reorder = false, no_disjoint = false, no_left_only = false, no_ignore_result = false, phi_naive = false;
  bool ssa_input = false;
  std::string func;
  std::string args;
  std::string mem;
  // fuzz
  int programs = 1000;
  int vectors = 32;
  std::string profile = "both";
};

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
  std::vector<Function> inputs;
};

std::vector<std::int64_t> parse_ints(const std::string& s) {
  std::vector<std::int64_t> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) v.push_back(std::stoll(item));
  return v;
}

PipelineConfig make_config(const Options& o) {
  PipelineConfig c;
  c.passes = parse_pass_list(o.passes);
  if (o.machine == "full")
    c.machine = MachineModel::full();
  else if (o.machine == "partial")
    c.machine = MachineModel::partial();
  else
    throw PipelineError("unknown machine '" + o.machine + "'");
  if (!o.predicable.empty()) c.machine.predicable = parse_opcode_list(o.predicable);
  if (!o.speculatable.empty()) c.machine.speculatable = parse_opcode_list(o.speculatable);
  c.options.reorder_disjoint = !o.no_reorder;
  c.options.disjoint_interference = !o.no_disjoint;
  c.options.left_only = !o.no_left_only;
  c.options.ignore_result = !o.no_ignore_result;
  c.options.phi_naive = o.phi_naive;
  c.ssa_input = o.ssa_input;
  c.dump_after = o.dump_after;
  return c;
}

Outcome process_file(const std::string& path, const Options& o, const PipelineConfig& config) {
  Outcome r;
  std::ostringstream out, err;
  std::ifstream in(path);
  if (!in) {
    r.err = "error: cannot read " + path + "\n";
    r.code = 1;
    return r;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  Module m;
  try {
    m = parse_module(buf.str());
  } catch (const std::exception& e) {
    r.err = path + ": " + e.what() + "\n";
    r.code = 1;
    return r;
  }
  auto diags = validate(m, o.ssa_input ? ValidateMode::Ssa : ValidateMode::NonSsa);
  if (!diags.empty()) err << format_diagnostics(diags);
  if (has_errors(diags)) {
    r.err = err.str();
    r.code = 1;
    return r;
  }
  Module result;
  for (const auto& f : m.functions) {
    r.inputs.push_back(f);
    PipelineResult pr;
    try {
      pr = run_pipeline(f, config);
    } catch (const std::exception& e) {
      err << "error: @" << f.name << ": " << e.what() << '\n';
      r.code = 1;
      continue;
    }
    for (const auto& d : pr.dumps) out << "; after " << d.pass << '\n' << d.text << '\n';
    if (o.dump_liveness) out << dump_liveness(pr.function, liveness(pr.function));
    if (o.dump_interference) {
      LivenessInfo live = liveness(pr.function);
      out << "interference @" << pr.function.name << '\n'
          << dump_interference(interference_graph(pr.function, live, guard_env_for(pr.function),
                                                  config.options.disjoint_interference));
    }
    if (o.verify) {
      DiffReport rep = differential_check(f, pr.function, o.trials, o.seed);
      out << "verify @" << f.name << ": " << rep.str();
      if (!rep.ok() && r.code == 0) r.code = 2;
    }
    if (!o.func.empty() && (o.func == f.name || o.func == "@" + f.name)) {
      ExecResult e = eval(pr.function, parse_ints(o.args), parse_ints(o.mem));
      out << "@" << f.name << ": " << e.str() << '\n';
    }
    result.functions.push_back(std::move(pr.function));
  }
  if (!o.stats && !o.verify && o.func.empty() && !o.dump_liveness && !o.dump_interference) out << print_module(result);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int cmd_run(const Options& o) {
  PipelineConfig config;
  try {
    config = make_config(o);
    check_pipeline(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<std::future<Outcome>> jobs;
  for (const auto& path : o.files)
    jobs.push_back(std::async(std::launch::async, process_file, path, std::cref(o), std::cref(config)));
  int code = 0;
  std::vector<Function> all;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Outcome r = jobs[i].get();
    if (o.files.size() > 1) std::cout << "; " << o.files[i] << '\n';
    std::cout << r.out;
    std::cerr << r.err;
    code = std::max(code, r.code);
    for (auto& f : r.inputs) all.push_back(std::move(f));
  }
  if (o.stats && code != 1) {
    try {
      std::cout << format_stats(collect_stats(all, config), o.stats_format == "csv");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return code;
}

int cmd_fuzz(const Options& o) {
  PipelineConfig config;
  std::vector<Profile> profiles;
  try {
    config = make_config(o);
    check_pipeline(config);
    if (o.profile == "both")
      profiles = {Profile::Tiny, Profile::Small};
    else
      profiles = {parse_profile(o.profile)};
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::size_t programs = 0, compared = 0, excluded = 0, mismatches = 0, failures = 0;
  for (int i = 0; i < o.trials; ++i) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
    for (Profile p : profiles) {
      Function f = gen_random_program(seed, p);
      ++programs;
      try {
        PipelineResult pr = run_pipeline(f, config);
        auto diags = validate(pr.function, pr.is_ssa ? ValidateMode::Ssa : ValidateMode::NonSsa);
        if (has_errors(diags)) {
          ++failures;
          std::cout << "invalid output seed=" << seed << " profile=" << profile_name(p) << '\n'
                    << format_diagnostics(diags);
          continue;
        }
        DiffReport rep = differential_check(f, pr.function, o.vectors, seed);
        compared += rep.compared;
        excluded += rep.excluded;
        mismatches += rep.mismatches.size();
        if (!rep.ok())
          std::cout << "mismatch seed=" << seed << " profile=" << profile_name(p) << '\n' << rep.str();
      } catch (const std::exception& e) {
        ++failures;
        std::cout << "pipeline error seed=" << seed << " profile=" << profile_name(p) << ": " << e.what() << '\n';
      }
    }
  }
  std::cout << "programs=" << programs << " vectors=" << compared << " excluded=" << excluded
            << " mismatches=" << mismatches << " failures=" << failures << '\n';
  if (mismatches || failures) return 2;
  return 0;
}

void add_pipeline_flags(CLI::App* app, Options& o) {
  app->add_option("--passes", o.passes, "comma-separated pass list");
  app->add_option("--machine", o.machine, "full or partial")->check(CLI::IsMember({"full", "partial"}));
  app->add_option("--predicable", o.predicable, "predicable opcodes, comma-separated");
  app->add_option("--speculatable", o.speculatable, "speculatable opcodes, comma-separated");
  app->add_flag("--no-reorder-disjoint", o.no_reorder);
  app->add_flag("--no-disjoint-interference", o.no_disjoint);
  app->add_flag("--no-left-only", o.no_left_only);
  app->add_flag("--no-ignore-result", o.no_ignore_result);
  app->add_flag("--phi-naive", o.phi_naive);
  app->add_option("--seed", o.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psikit: psi-SSA toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "run a pass pipeline over .pir files");
  run->add_option("files", o.files, "input files")->required()->check(CLI::ExistingFile);
  add_pipeline_flags(run, o);
  run->add_flag("--verify", o.verify, "differential check of input against output");
  run->add_option("--trials", o.trials, "input vectors for --verify");
  run->add_flag("--stats", o.stats, "copy statistics for the standard pipeline variants");
  run->add_option("--stats-format", o.stats_format)->check(CLI::IsMember({"text", "csv"}));
  run->add_option("--dump-after", o.dump_after, "print IR after these passes (or 'all')")->delimiter(',');
  run->add_flag("--dump-liveness", o.dump_liveness);
  run->add_flag("--dump-interference", o.dump_interference);
  run->add_flag("--ssa-input", o.ssa_input, "input is already SSA");
  run->add_option("--func", o.func, "function to evaluate");
  run->add_option("--args", o.args, "arguments, comma-separated");
  run->add_option("--mem", o.mem, "initial memory words, comma-separated");

  auto* fuzz = app.add_subcommand("fuzz", "differential fuzzing over generated programs");
  add_pipeline_flags(fuzz, o);
  fuzz->add_option("--trials", o.trials, "number of seeds");
  fuzz->add_option("--vectors", o.vectors, "input vectors per program");
  fuzz->add_option("--profile", o.profile)->check(CLI::IsMember({"tiny", "small", "both"}));

  auto* gen = app.add_subcommand("gen", "print a generated program");
  gen->add_option("--seed", o.seed);
  gen->add_option("--profile", o.profile)->check(CLI::IsMember({"tiny", "small"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*run) return cmd_run(o);
  if (*gen) {
    Module m;
    m.functions.push_back(gen_random_program(o.seed, parse_profile(o.profile == "both" ? "tiny" : o.profile)));
    std::cout << print_module(m);
    return 0;
  }
  if (o.passes.empty()) o.passes = "ssa,fold,ifconvert,psi-promote,out-of-ssa";
  if (fuzz->count_all() && !fuzz->get_option("--trials")->count()) o.trials = 1000;
  return cmd_fuzz(o);
}
