#include "psikit/pipeline.hpp"

#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "psikit/ifconvert.hpp"
#include "psikit/predicates.hpp"
#include "psikit/ssa.hpp"
#include "psikit/text.hpp"

namespace psikit {

namespace {

struct State {
  Function f;
  PassStats stats;
  bool ssa = false;
};

struct PassInfo {
  bool needs_ssa;
  std::function<void(State&, const PipelineConfig&)> run;
};

const std::map<std::string, PassInfo>& registry() {
  static const std::map<std::string, PassInfo> r = {
      {"ssa",
       {false,
        [](State& s, const PipelineConfig&) {
          s.f = construct_ssa(s.f).function;
          s.ssa = true;
        }}},
      {"fold", {true, [](State& s, const PipelineConfig&) { copy_fold(s.f, guard_env_for(s.f)); }}},
      {"ifconvert", {true, [](State& s, const PipelineConfig& c) { if_convert_all(s.f, c.machine); }}},
      {"psi-inline", {true, [](State& s, const PipelineConfig&) { psi_inline_all(s.f); }}},
      {"psi-reduce", {true, [](State& s, const PipelineConfig&) { psi_reduce_all(s.f); }}},
      {"psi-promote", {true, [](State& s, const PipelineConfig& c) { psi_promote_all(s.f, c.machine); }}},
      {"select-form", {true, [](State& s, const PipelineConfig&) { psi_to_select(s.f); }}},
      {"normalize",
       {true,
        [](State& s, const PipelineConfig& c) {
          s.stats.copies_normalize += psi_normalize(s.f, c.options.reorder_disjoint);
          s.stats.total_copies = count_copies(s.f);
        }}},
      {"cssa",
       {true,
        [](State& s, const PipelineConfig& c) {
          CongruenceClasses classes;
          PassStats p = to_cssa(s.f, classes, c.options);
          s.stats.copies_normalize += p.copies_normalize;
          s.stats.copies_psi_congruence += p.copies_psi_congruence;
          s.stats.copies_phi_congruence += p.copies_phi_congruence;
          s.stats.naive_psis += p.naive_psis;
          s.stats.basic_psis += p.basic_psis;
          s.stats.naive_phis += p.naive_phis;
        }}},
      {"out-of-ssa",
       {true,
        [](State& s, const PipelineConfig& c) {
          PassStats p = run_out_of_ssa(s.f, c.options);
          s.stats.copies_normalize += p.copies_normalize;
          s.stats.copies_psi_congruence += p.copies_psi_congruence;
          s.stats.copies_phi_congruence += p.copies_phi_congruence;
          s.stats.naive_psis += p.naive_psis;
          s.stats.basic_psis += p.basic_psis;
          s.stats.naive_phis += p.naive_phis;
          s.stats.total_copies = p.total_copies;
          s.ssa = false;
        }}},
  };
  return r;
}

bool wants_dump(const PipelineConfig& c, const std::string& pass) {
  for (const auto& d : c.dump_after)
    if (d == "all" || d == pass) return true;
  return false;
}

}  // namespace

const std::vector<std::string>& registered_passes() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, info] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

std::vector<std::string> parse_pass_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (!registry().count(item)) throw PipelineError("unknown pass '" + item + "'");
    out.push_back(item);
  }
  return out;
}

void check_pipeline(const PipelineConfig& config) {
  bool ssa = config.ssa_input;
  for (const auto& p : config.passes) {
    auto it = registry().find(p);
    if (it == registry().end()) throw PipelineError("unknown pass '" + p + "'");
    if (p == "ssa" && ssa) throw PipelineError("pass 'ssa' needs non-SSA input");
    if (it->second.needs_ssa && !ssa) throw PipelineError("pass '" + p + "' needs SSA form; run 'ssa' first");
    if (p == "ssa") ssa = true;
    if (p == "out-of-ssa") ssa = false;
  }
}

PipelineResult run_pipeline(const Function& f, const PipelineConfig& config) {
  check_pipeline(config);
  State s{f, {}, config.ssa_input};
  s.stats.total_copies = count_copies(f);
  PipelineResult r;
  for (const auto& p : config.passes) {
    registry().at(p).run(s, config);
    if (wants_dump(config, p)) r.dumps.push_back({p, print_function(s.f)});
  }
  s.stats.total_copies = count_copies(s.f);
  r.function = std::move(s.f);
  r.stats = s.stats;
  r.is_ssa = s.ssa;
  return r;
}

std::vector<StatsColumn> stats_columns(bool ssa_input) {
  std::vector<StatsColumn> cols;
  for (bool promote : {false, true}) {
    const std::vector<std::pair<std::string, std::vector<std::string>>> variants = {
        {"no-ifconv", {}},
        {"ifconv", {"ifconvert"}},
        {"ifconv+fold", {"ifconvert", "fold"}},
    };
    for (const auto& [name, middle] : variants) {
      StatsColumn c{name, promote, {}};
      if (!ssa_input) c.passes.push_back("ssa");
      if (!middle.empty()) c.passes.push_back(middle[0]);
      if (promote) c.passes.push_back("psi-promote");
      for (std::size_t i = 1; i < middle.size(); ++i) c.passes.push_back(middle[i]);
      c.passes.push_back("out-of-ssa");
      cols.push_back(std::move(c));
    }
  }
  return cols;
}

StatsTable collect_stats(const std::vector<Function>& functions, const PipelineConfig& base) {
  StatsTable t;
  t.columns = stats_columns(base.ssa_input);
  for (const auto& col : t.columns) {
    PipelineConfig c = base;
    c.passes = col.passes;
    c.dump_after.clear();
    PassStats sum;
    for (const auto& f : functions) {
      PassStats s = run_pipeline(f, c).stats;
      sum += s;
    }
    t.totals.push_back(sum);
  }
  return t;
}

std::string format_stats(const StatsTable& t, bool csv) {
  const std::vector<std::pair<std::string, std::size_t PassStats::*>> rows = {
      {"psi-normalize", &PassStats::copies_normalize},
      {"psi-congruence", &PassStats::copies_psi_congruence},
      {"phi-congruence", &PassStats::copies_phi_congruence},
      {"total copies", &PassStats::total_copies},
  };
  std::ostringstream os;
  if (csv) {
    os << "promotion,pipeline,psi-normalize,psi-congruence,phi-congruence,total copies\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      os << (t.columns[i].promotion ? "yes" : "no") << ',' << t.columns[i].name;
      for (const auto& row : rows) os << ',' << t.totals[i].*(row.second);
      os << '\n';
    }
    return os.str();
  }
  for (bool promote : {false, true}) {
    os << (promote ? "out of psi-SSA with psi-predicate promotion\n" : "out of psi-SSA without psi-predicate promotion\n");
    os << std::left << std::setw(16) << "";
    for (const auto& c : t.columns)
      if (c.promotion == promote) os << std::right << std::setw(13) << c.name;
    os << '\n';
    for (const auto& row : rows) {
      os << std::left << std::setw(16) << row.first;
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i].promotion == promote) os << std::right << std::setw(13) << t.totals[i].*(row.second);
      os << '\n';
    }
    if (!promote) os << '\n';
  }
  return os.str();
}

}  // namespace psikit
