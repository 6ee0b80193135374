/*
Copyright 2026 The cgra-layout-explorer Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Command-line front end: exploration, mapping and analysis subcommands.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cgra.hpp"

namespace fs = std::filesystem;
using namespace cgra;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kInput = 3, kInfeasible = 4 };

// A malformed or inconsistent input file, whatever the underlying error type.
struct InputFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto read_input(F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw InputFailure(e.what());
  } catch (const ValidationError& e) {
    throw InputFailure(e.what());
  }
}

struct Options {
  int rows = 10;
  int cols = 10;
  std::string dfg_dir;
  std::vector<std::string> dfg_files;
  std::string out;
  std::string layout_file;

  std::size_t ltest = 0;
  std::size_t lfail = 3;
  bool no_gsg = false;
  int gsg_rounds = 2;
  std::size_t trim_streak = 50;
  double trim_fraction = 0.10;

  std::uint64_t seed = 1;
  int restarts = 3;
  int ripup = 30;
  double present_factor = 0.5;
  double present_growth = 1.8;
  double history_factor = 1.0;
  int threads = 1;

  std::string costs_file;
  std::string groups_file;
  double power_scale = 1.0;
  bool include_io_cost = false;
  bool prune_io = false;
  std::vector<double> op_latency = {1, 1, 1, 1, 1, 1};
  double hop_latency = 1.0;

  std::string sweep;
  int sweep_threads = 1;
};

struct Context {
  const Options& opt;
  bool ltest_given = false;

  OpcodeTable opcodes() const {
    if (opt.groups_file.empty()) return OpcodeTable::defaults();
    return read_input([&] { return OpcodeTable::load(opt.groups_file); });
  }
  CostTable costs() const {
    if (opt.costs_file.empty()) return CostTable::defaults(opt.power_scale);
    return read_input([&] { return CostTable::load(opt.costs_file); });
  }
  MapperConfig mapper_config() const {
    MapperConfig m;
    m.seed = opt.seed;
    m.max_restarts = opt.restarts;
    m.ripup_iterations = opt.ripup;
    m.present_factor = opt.present_factor;
    m.present_growth = opt.present_growth;
    m.history_factor = opt.history_factor;
    m.threads = opt.threads;
    return m;
  }
  SearchConfig search_config() const {
    SearchConfig c;
    if (ltest_given) c.l_test = opt.ltest;
    c.l_fail = opt.lfail;
    c.gsg_rounds = opt.gsg_rounds;
    c.trim_streak = opt.trim_streak;
    c.trim_fraction = opt.trim_fraction;
    c.run_gsg = !opt.no_gsg;
    c.threads = opt.threads;
    c.validate();
    return c;
  }
  ReportOptions report_options() const {
    ReportOptions r;
    r.include_io_cost = opt.include_io_cost;
    r.prune_io_fifos = opt.prune_io;
    if (opt.op_latency.size() != kNumGroups)
      throw ValidationError("--op-latency needs one value per group (Arith Div FP Mem Mult Other)");
    for (std::size_t i = 0; i < kNumGroups; ++i) r.latency.op_latency[i] = opt.op_latency[i];
    r.latency.hop_latency = opt.hop_latency;
    return r;
  }

  std::vector<Dfg> dfgs() const {
    const OpcodeTable table = opcodes();
    std::vector<Dfg> out;
    if (!opt.dfg_dir.empty()) out = read_input([&] { return load_dfg_dir(opt.dfg_dir, table); });
    for (const auto& f : opt.dfg_files) out.push_back(read_input([&] { return load_dfg(f, table); }));
    if (out.empty()) throw ValidationError("no DFGs given (use --dfg-dir or --dfg)");
    return out;
  }
  Layout layout() const {
    if (opt.layout_file.empty()) throw ValidationError("--layout is required");
    return read_input([&] { return load_layout(opt.layout_file); });
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Writes to --out when given, else stdout.
void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    write_file(opt.out, text);
  }
}

fs::path out_dir(const Options& opt) {
  if (opt.out.empty()) throw ValidationError("--out <directory> is required");
  fs::create_directories(opt.out);
  return opt.out;
}

std::vector<std::pair<int, int>> parse_sizes(const std::string& spec) {
  std::vector<std::pair<int, int>> sizes;
  std::string tok;
  std::istringstream in(spec);
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    const auto x = tok.find_first_of("xX");
    try {
      std::size_t used = 0;
      const int r = std::stoi(tok.substr(0, x), &used);
      const int c = x == std::string::npos ? r : std::stoi(tok.substr(x + 1));
      sizes.emplace_back(r, c);
    } catch (const std::logic_error&) {
      throw ValidationError("bad size '" + tok + "' (expected RxC or N)");
    }
  }
  if (sizes.empty()) throw ValidationError("--sweep needs at least one size");
  return sizes;
}

void write_exploration(const fs::path& dir, const ExplorerResult& res, const Report& rep) {
  fs::create_directories(dir);
  write_file(dir / "best.layout", serialize_layout(res.best));
  write_file(dir / "opsg.layout", serialize_layout(res.opsg_best));
  write_file(dir / "initial.layout", serialize_layout(res.initial.layout));
  write_file(dir / "heatmap.layout", serialize_layout(res.initial.heatmap.layout));
  write_file(dir / "heatmap_usage.csv", heatmap_usage_csv(res.initial.heatmap.layout, res.initial.heatmap.usage));
  write_file(dir / "pruned.layout", serialize_layout(rep.pruned_layout));
  write_file(dir / "report.csv", report_csv(rep));
  write_file(dir / "report.txt", report_text(rep));
  write_file(dir / "search.csv", search_csv(res.stats));
  write_file(dir / "timing.csv", timing_csv(res.stats));
}

int cmd_sweep(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const auto costs = ctx.costs();
  const ReferenceMapper mapper(ctx.mapper_config());
  const fs::path dir = out_dir(ctx.opt);
  SweepResult s = size_sweep(std::span<const Dfg>(dfgs), parse_sizes(ctx.opt.sweep), costs, ctx.search_config(),
                             mapper, ctx.report_options(), ctx.opt.sweep_threads);
  for (const auto& e : s.entries) {
    const std::string name = std::to_string(e.rows) + "x" + std::to_string(e.cols);
    if (e.feasible) {
      write_exploration(dir / name, *e.result, *e.report);
    } else {
      std::cerr << name << ": " << e.error << "\n";
    }
  }
  write_file(dir / "sweep.csv", sweep_csv(s));
  const auto& rec = s.entries[s.recommended];
  const auto& small = s.entries[s.smallest_feasible];
  std::cout << "recommended " << rec.rows << "x" << rec.cols << " (area " << rec.final_cost().str() << ")\n";
  std::cout << "smallest feasible " << small.rows << "x" << small.cols << " (area " << small.final_cost().str()
            << ")\n";
  return kOk;
}

int cmd_explore(const Context& ctx) {
  if (!ctx.opt.sweep.empty()) return cmd_sweep(ctx);
  const auto dfgs = ctx.dfgs();
  const auto costs = ctx.costs();
  const auto cfg = ctx.search_config();
  const auto ropt = ctx.report_options();
  const ReferenceMapper mapper(ctx.mapper_config());
  const fs::path dir = out_dir(ctx.opt);
  ExplorerResult res = run_explorer(std::span<const Dfg>(dfgs), ctx.opt.rows, ctx.opt.cols, costs, cfg, mapper);
  Report rep = build_report(res, std::span<const Dfg>(dfgs), costs, mapper, ropt);
  write_exploration(dir, res, rep);
  std::cout << report_text(rep);
  return kOk;
}

int cmd_map(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const Layout layout = ctx.layout();
  const ReferenceMapper mapper(ctx.mapper_config());
  std::string out;
  int status = kOk;
  for (const auto& d : dfgs) {
    MapResult r = mapper.map(d, layout);
    if (!r.ok()) {
      std::cerr << d.name() << ": " << status_name(r.status) << "\n";
      status = kInfeasible;
      continue;
    }
    if (dfgs.size() > 1) out += "# dfg " + d.name() + "\n";
    out += dump_mapping(d, r.mapping);
  }
  emit(ctx.opt, out);
  return status;
}

int cmd_heatmap(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const ReferenceMapper mapper(ctx.mapper_config());
  InitialLayout init = choose_initial_layout(std::span<const Dfg>(dfgs), ctx.opt.rows, ctx.opt.cols, mapper,
                                             ctx.opt.threads);
  const fs::path dir = out_dir(ctx.opt);
  write_file(dir / "heatmap.layout", serialize_layout(init.heatmap.layout));
  write_file(dir / "heatmap_usage.csv", heatmap_usage_csv(init.heatmap.layout, init.heatmap.usage));
  write_file(dir / "full.layout", serialize_layout(init.heatmap.full));
  const auto costs = ctx.costs();
  std::cout << "initial " << source_name(init.source) << "\n"
            << "full area " << layout_cost(init.heatmap.full, costs).str() << "\n"
            << "heatmap area " << layout_cost(init.heatmap.layout, costs).str() << "\n";
  return kOk;
}

int cmd_cost(const Context& ctx) {
  const Layout layout = ctx.layout();
  const auto costs = ctx.costs();
  const auto c = census(layout);
  std::string text = "area " + layout_cost(layout, costs, Metric::Area, ctx.opt.include_io_cost).str() + "\n" +
                     "power " + layout_cost(layout, costs, Metric::Power, ctx.opt.include_io_cost).str() + "\n" +
                     "compute_cells " + std::to_string(c.compute_cells) + "\n";
  for (OpGroup g : kComputeGroups) text += std::string(group_name(g)) + " " + std::to_string(c.counts[g]) + "\n";
  emit(ctx.opt, text);
  return kOk;
}

int cmd_prune_fifos(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const Layout layout = ctx.layout();
  const auto costs = ctx.costs();
  const ReferenceMapper mapper(ctx.mapper_config());
  FifoPruneResult r = prune_unused_fifos(layout, std::span<const Dfg>(dfgs), mapper, ctx.opt.prune_io);
  emit(ctx.opt, serialize_layout(r.layout));
  const Cost before = layout_cost(layout, costs, Metric::Area, ctx.opt.include_io_cost);
  const Cost after = layout_cost(r.layout, costs, Metric::Area, ctx.opt.include_io_cost);
  std::cerr << "removed " << r.removed_ports << "/" << r.total_ports << " FIFO ports, area " << before.str()
            << " -> " << after.str() << "\n";
  return kOk;
}

int cmd_latency(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const Layout layout = ctx.layout();
  const ReferenceMapper mapper(ctx.mapper_config());
  const auto model = ctx.report_options().latency;
  std::string out = "dfg,latency\n";
  int status = kOk;
  for (const auto& d : dfgs) {
    MapResult r = mapper.map(d, layout);
    if (!r.ok()) {
      std::cerr << d.name() << ": " << status_name(r.status) << "\n";
      status = kInfeasible;
      continue;
    }
    out += d.name() + "," + fixed(critical_path_latency(d, r.mapping, model), 2) + "\n";
  }
  emit(ctx.opt, out);
  return status;
}

int cmd_oracle(const Context& ctx) {
  const auto dfgs = ctx.dfgs();
  const auto costs = ctx.costs();
  const ReferenceMapper mapper(ctx.mapper_config());
  OracleResult r = oracle_enumerate(std::span<const Dfg>(dfgs), ctx.opt.rows, ctx.opt.cols, costs, mapper);
  std::cout << "layouts " << r.layouts << "\nfeasible " << r.feasible << "\n";
  if (!r.best) {
    std::cout << "optimum none\n";
    return kInfeasible;
  }
  std::cout << "optimum " << r.best_cost.str() << "\n";
  if (!ctx.opt.out.empty()) write_file(ctx.opt.out, serialize_layout(*r.best));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Heterogeneous CGRA functional-layout explorer"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file with any of the long options")->envname("CGRA_LEX_CONFIG");

  app.add_option("--rows", opt.rows, "Grid rows including the I/O border")->check(CLI::Range(3, 1000));
  app.add_option("--cols", opt.cols, "Grid columns including the I/O border")->check(CLI::Range(3, 1000));
  app.add_option("--dfg-dir", opt.dfg_dir, "Directory of *.dfg files");
  app.add_option("--dfg", opt.dfg_files, "DFG file (repeatable)");
  app.add_option("--out", opt.out, "Output directory (explore, heatmap, sweep) or file");
  app.add_option("--layout", opt.layout_file, "Layout file");

  auto* ltest = app.add_option("--ltest", opt.ltest, "Test budget across both phases (default 2000*N_t/64)");
  app.add_option("--lfail", opt.lfail, "Failures per (removal, cell) before it is skipped");
  app.add_flag("--no-gsg", opt.no_gsg, "Skip the general-subproblem phase");
  app.add_option("--gsg-rounds", opt.gsg_rounds, "General-subproblem passes");
  app.add_option("--trim-streak", opt.trim_streak, "Consecutive failures that trigger a queue trim");
  app.add_option("--trim-fraction", opt.trim_fraction, "Queue trim keeps costs within (1+f)*best");

  app.add_option("--seed", opt.seed, "Mapper seed");
  app.add_option("--map-restarts", opt.restarts, "Extra placement attempts per DFG");
  app.add_option("--ripup-iterations", opt.ripup, "Rip-up and re-route iterations per placement");
  app.add_option("--present-factor", opt.present_factor, "Initial present-congestion weight");
  app.add_option("--present-growth", opt.present_growth, "Present-congestion growth per iteration");
  app.add_option("--history-factor", opt.history_factor, "History-congestion increment");
  app.add_option("--threads", opt.threads, "Worker threads for per-DFG mapping")->check(CLI::PositiveNumber);

  app.add_option("--costs-file", opt.costs_file, "Cost table: <component> <area> <power>");
  app.add_option("--groups-file", opt.groups_file, "Opcode table: <OPCODE> <Group>");
  app.add_option("--power-scale", opt.power_scale, "Power weight = area weight * scale (no costs file)");
  app.add_flag("--include-io-cost", opt.include_io_cost, "Add I/O cells to reported costs");
  app.add_flag("--prune-io-fifos", opt.prune_io, "Also prune unused I/O-cell FIFO ports");
  app.add_option("--op-latency", opt.op_latency, "Op latency per group: Arith Div FP Mem Mult Other")
      ->expected(static_cast<int>(kNumGroups));
  app.add_option("--hop-latency", opt.hop_latency, "Latency per routed hop");

  app.add_option("--sweep", opt.sweep, "Comma-separated sizes, e.g. 6x6,7x8,8x8");
  app.add_option("--sweep-threads", opt.sweep_threads, "Sizes explored concurrently")->check(CLI::PositiveNumber);

  Context ctx{opt};
  using Handler = int (*)(const Context&);
  std::vector<std::pair<CLI::App*, Handler>> commands = {
      {app.add_subcommand("explore", "Search for a minimum-cost layout"), cmd_explore},
      {app.add_subcommand("map", "Map DFGs onto a layout and dump the mappings"), cmd_map},
      {app.add_subcommand("heatmap", "Build the heatmap initial layout"), cmd_heatmap},
      {app.add_subcommand("cost", "Area and power of a layout"), cmd_cost},
      {app.add_subcommand("prune-fifos", "Remove FIFO ports no DFG uses"), cmd_prune_fifos},
      {app.add_subcommand("latency", "Critical-path latency per DFG on a layout"), cmd_latency},
      {app.add_subcommand("sweep", "Explore several grid sizes"), cmd_sweep},
      {app.add_subcommand("oracle", "Exhaustive optimum for tiny grids"), cmd_oracle},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  ctx.ltest_given = ltest->count() > 0;

  try {
    for (auto& [sub, handler] : commands)
      if (sub->parsed()) return handler(ctx);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
