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

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cgra/bb_search.hpp"
#include "cgra/cost_model.hpp"
#include "cgra/dfg.hpp"
#include "cgra/layout.hpp"
#include "cgra/mapper.hpp"
#include "cgra/mapping.hpp"

namespace cgra {

// ---------------------------------------------------------------------------
// FIFO pruning

struct FifoPruneResult {
  Layout layout;
  // Mappings computed on the unpruned layout; the pruned layout admits them unchanged.
  std::vector<Mapping> mappings;
  std::size_t removed_ports = 0;
  std::size_t total_ports = 0;  // 4 per cell over the whole array
};

/// Drops every input port no DFG's routing ever delivers data into.
/// Compute cells only unless include_io is set. Throws InfeasibleError if
/// the layout does not map, and std::logic_error if a mapping would not
/// survive the pruning (never expected).
template <DfgMapper M>
FifoPruneResult prune_unused_fifos(const Layout& layout, std::span<const Dfg> dfgs, const M& mapper,
                                   bool include_io = false) {
  TestResult t = test_layout(layout, dfgs, mapper);
  if (!t.feasible) throw InfeasibleError("cannot prune FIFOs of a layout the DFGs do not map onto");

  FifoPruneResult out;
  out.layout = layout;
  out.mappings = std::move(t.mappings);
  out.total_ports = 4 * layout.num_cells();
  std::vector<std::uint8_t> used(layout.num_cells(), 0);
  for (const auto& m : out.mappings) {
    auto u = used_input_ports(layout, m);
    for (std::size_t i = 0; i < used.size(); ++i) used[i] |= u[i];
  }
  for (std::size_t i = 0; i < layout.num_cells(); ++i) {
    const CellPos p = layout.pos(i);
    if (layout.is_io(p) && !include_io) continue;
    const std::uint8_t kept = layout.fifo(p) & used[i];
    out.removed_ports += std::popcount(layout.fifo(p)) - std::popcount(kept);
    out.layout.set_fifo(p, kept);
  }
  for (std::size_t i = 0; i < dfgs.size(); ++i) {
    if (auto err = validate_mapping(dfgs[i], out.layout, out.mappings[i])) {
      throw std::logic_error("pruned layout rejects mapping of " + dfgs[i].name() + ": " + *err);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Latency

struct LatencyModel {
  std::array<double, kNumGroups> op_latency{1, 1, 1, 1, 1, 1};
  double hop_latency = 1.0;

  double op(OpGroup g) const { return op_latency[index_of(g)]; }
};

/// Longest path through the mapped DFG, weighting nodes by their op latency
/// and edges by their routed hop count.
inline double critical_path_latency(const Dfg& dfg, const Mapping& m, const LatencyModel& model = {}) {
  std::vector<double> finish(dfg.num_nodes(), 0.0);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> in(dfg.num_nodes());
  for (std::size_t e = 0; e < dfg.num_edges(); ++e) in[dfg.edges()[e].dst].push_back({dfg.edges()[e].src, e});
  double longest = 0.0;
  for (auto v : dfg.topo_order()) {
    double start = 0.0;
    for (auto [u, e] : in[v])
      start = std::max(start, finish[u] + model.hop_latency * static_cast<double>(hop_count(m.routes[e])));
    finish[v] = start + model.op(dfg.node(v).group);
    longest = std::max(longest, finish[v]);
  }
  return longest;
}

struct LatencyRatio {
  std::string dfg;
  double full = 0.0;
  double best = 0.0;
  double ratio() const { return full > 0 ? best / full : 0.0; }
};

// ---------------------------------------------------------------------------
// Distance to the theoretical minimum

struct TheoreticalGap {
  Cost final_cost;
  Cost minimum_cost;
  // Share of the final cost still removable if only MinGroups instances remained.
  double remaining_percent = 0.0;
};

/// Compares a layout against a hypothetical one with the same cells and FIFOs
/// but exactly MinGroups group instances.
inline TheoreticalGap theoretical_gap(const Layout& final_layout, const MinGroups& min_groups,
                                      const CostTable& costs, Metric m = Metric::Area,
                                      bool include_io = false) {
  TheoreticalGap gap;
  gap.final_cost = layout_cost(final_layout, costs, m, include_io);
  gap.minimum_cost = cost_with_instances(final_layout, min_groups, costs, m, include_io);
  gap.remaining_percent = percent_of(gap.final_cost - gap.minimum_cost, gap.final_cost);
  return gap;
}

// ---------------------------------------------------------------------------
// Report

struct ReportOptions {
  bool include_io_cost = false;
  bool prune_io_fifos = false;
  LatencyModel latency;
};

struct Report {
  int rows = 0;
  int cols = 0;
  InitialSource initial_source = InitialSource::Full;
  GroupSet present;
  MinGroups min_groups;
  std::size_t l_test = 0;

  // Indexed by Metric.
  struct Costs {
    Cost full, initial, opsg, best, pruned;
  };
  std::array<Costs, 2> cost{};
  std::array<TheoreticalGap, 2> gap{};

  GroupCounts full_instances, initial_instances, opsg_instances, best_instances;

  Layout pruned_layout;
  std::size_t fifo_removed = 0;
  std::size_t fifo_total = 0;

  std::vector<LatencyRatio> latency;
  SearchStats stats;

  const Costs& area() const { return cost[0]; }
  const Costs& power() const { return cost[1]; }

  double instance_reduction_percent() const {
    return 100.0 * static_cast<double>(full_instances.total() - best_instances.total()) /
           static_cast<double>(std::max<std::size_t>(1, full_instances.total()));
  }
  double group_reduction_percent(OpGroup g) const {
    return full_instances[g] == 0 ? 0.0
                                  : 100.0 * static_cast<double>(full_instances[g] - best_instances[g]) /
                                        static_cast<double>(full_instances[g]);
  }
  // Shares of the full instance count removed by each stage; they sum to
  // instance_reduction_percent().
  std::array<double, 3> attribution_percent() const {
    const double total = static_cast<double>(std::max<std::size_t>(1, full_instances.total()));
    auto pct = [&](std::size_t from, std::size_t to) { return 100.0 * static_cast<double>(from - to) / total; };
    return {pct(full_instances.total(), initial_instances.total()),
            pct(initial_instances.total(), opsg_instances.total()),
            pct(opsg_instances.total(), best_instances.total())};
  }
  double cost_reduction_percent(Metric m) const {
    const auto& c = cost[static_cast<std::size_t>(m)];
    return percent_of(c.full - c.best, c.full);
  }
  // FIFO pruning gain relative to the full layout.
  double fifo_improvement_percent(Metric m) const {
    const auto& c = cost[static_cast<std::size_t>(m)];
    return percent_of(c.best - c.pruned, c.full);
  }
  double mean_latency_ratio() const {
    if (latency.empty()) return 0.0;
    double s = 0.0;
    for (const auto& l : latency) s += l.ratio();
    return s / static_cast<double>(latency.size());
  }
};

template <DfgMapper M>
Report build_report(const ExplorerResult& res, std::span<const Dfg> dfgs, const CostTable& costs,
                    const M& mapper, const ReportOptions& opt = {}) {
  Report r;
  r.rows = res.best.rows();
  r.cols = res.best.cols();
  r.initial_source = res.initial.source;
  r.present = res.present;
  r.min_groups = res.min_groups;
  r.l_test = res.l_test;
  r.stats = res.stats;
  r.full_instances = census(res.full()).counts;
  r.initial_instances = census(res.initial.layout).counts;
  r.opsg_instances = census(res.opsg_best).counts;
  r.best_instances = census(res.best).counts;

  FifoPruneResult pruned = prune_unused_fifos(res.best, dfgs, mapper, opt.prune_io_fifos);
  r.fifo_removed = pruned.removed_ports;
  r.fifo_total = pruned.total_ports;
  r.pruned_layout = pruned.layout;

  for (Metric m : {Metric::Area, Metric::Power}) {
    auto& c = r.cost[static_cast<std::size_t>(m)];
    c.full = layout_cost(res.full(), costs, m, opt.include_io_cost);
    c.initial = layout_cost(res.initial.layout, costs, m, opt.include_io_cost);
    c.opsg = layout_cost(res.opsg_best, costs, m, opt.include_io_cost);
    c.best = layout_cost(res.best, costs, m, opt.include_io_cost);
    c.pruned = layout_cost(pruned.layout, costs, m, opt.include_io_cost);
    r.gap[static_cast<std::size_t>(m)] = theoretical_gap(res.best, res.min_groups, costs, m, opt.include_io_cost);
  }

  for (std::size_t i = 0; i < dfgs.size(); ++i) {
    r.latency.push_back({dfgs[i].name(),
                         critical_path_latency(dfgs[i], res.initial.heatmap.mappings[i], opt.latency),
                         critical_path_latency(dfgs[i], res.final_mappings[i], opt.latency)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Size sweep

struct SweepEntry {
  int rows = 0;
  int cols = 0;
  bool feasible = false;
  std::string error;
  std::optional<ExplorerResult> result;
  std::optional<Report> report;

  Cost final_cost() const { return report ? report->area().best : Cost{}; }
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t recommended = 0;
  std::size_t smallest_feasible = 0;
};

/// Runs the full exploration once per grid size and recommends the size
/// with the lowest final cost. Sizes run concurrently when threads > 1.
template <DfgMapper M>
SweepResult size_sweep(std::span<const Dfg> dfgs, const std::vector<std::pair<int, int>>& sizes,
                       const CostTable& costs, const SearchConfig& cfg, const M& mapper,
                       const ReportOptions& opt = {}, int threads = 1) {
  if (sizes.empty()) throw ValidationError("size sweep needs at least one size");
  auto run_one = [&](std::pair<int, int> rc) {
    SweepEntry e;
    e.rows = rc.first;
    e.cols = rc.second;
    try {
      e.result = run_explorer(dfgs, rc.first, rc.second, costs, cfg, mapper);
      e.report = build_report(*e.result, dfgs, costs, mapper, opt);
      e.feasible = true;
    } catch (const InfeasibleError& ex) {
      e.error = ex.what();
    } catch (const ValidationError& ex) {
      e.error = ex.what();
    }
    return e;
  };

  SweepResult out;
  if (threads > 1) {
    std::vector<std::future<SweepEntry>> jobs;
    for (auto rc : sizes) jobs.push_back(std::async(std::launch::async, run_one, rc));
    for (auto& j : jobs) out.entries.push_back(j.get());
  } else {
    for (auto rc : sizes) out.entries.push_back(run_one(rc));
  }

  std::optional<std::size_t> best, smallest;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    const auto& e = out.entries[i];
    if (!e.feasible) continue;
    if (!best || e.final_cost() < out.entries[*best].final_cost()) best = i;
    const auto area = [](const SweepEntry& x) { return x.rows * x.cols; };
    if (!smallest || area(e) < area(out.entries[*smallest])) smallest = i;
  }
  if (!best) throw InfeasibleError("no size in the sweep is feasible");
  out.recommended = *best;
  out.smallest_feasible = *smallest;
  return out;
}

}  // namespace cgra
