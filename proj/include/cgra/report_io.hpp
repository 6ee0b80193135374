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

#include <charconv>
#include <sstream>
#include <string>

#include "cgra/bb_search.hpp"
#include "cgra/post_opt.hpp"

namespace cgra {

inline std::string fixed(double v, int precision = 4) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

/// Deterministic long-format table: section,item,metric,value.
inline std::string report_csv(const Report& r) {
  std::ostringstream o;
  auto row = [&](std::string_view s, std::string_view i, std::string_view m, const std::string& v) {
    o << s << ',' << i << ',' << m << ',' << v << '\n';
  };
  o << "section,item,metric,value\n";
  row("grid", "size", "rows", std::to_string(r.rows));
  row("grid", "size", "cols", std::to_string(r.cols));
  row("grid", "initial", "source", source_name(r.initial_source));
  row("grid", "present", "groups", r.present.str('-'));

  for (OpGroup g : kAllGroups) {
    const std::string n(group_name(g));
    row("instances", n, "min", std::to_string(r.min_groups[g]));
    if (g == OpGroup::Mem) continue;
    row("instances", n, "full", std::to_string(r.full_instances[g]));
    row("instances", n, "initial", std::to_string(r.initial_instances[g]));
    row("instances", n, "opsg", std::to_string(r.opsg_instances[g]));
    row("instances", n, "best", std::to_string(r.best_instances[g]));
    row("instances", n, "reduction_pct", fixed(r.group_reduction_percent(g)));
  }
  row("instances", "total", "full", std::to_string(r.full_instances.total()));
  row("instances", "total", "best", std::to_string(r.best_instances.total()));
  row("instances", "total", "reduction_pct", fixed(r.instance_reduction_percent()));

  const auto attr = r.attribution_percent();
  row("attribution", "heatmap", "instances_pct", fixed(attr[0]));
  row("attribution", "opsg", "instances_pct", fixed(attr[1]));
  row("attribution", "gsg", "instances_pct", fixed(attr[2]));

  for (Metric m : {Metric::Area, Metric::Power}) {
    const std::string mn = metric_name(m);
    const auto& c = r.cost[static_cast<std::size_t>(m)];
    row("cost", mn, "full", c.full.str());
    row("cost", mn, "initial", c.initial.str());
    row("cost", mn, "opsg", c.opsg.str());
    row("cost", mn, "best", c.best.str());
    row("cost", mn, "pruned", c.pruned.str());
    row("cost", mn, "reduction_pct", fixed(r.cost_reduction_percent(m)));
    const auto& gap = r.gap[static_cast<std::size_t>(m)];
    row("gap", mn, "minimum", gap.minimum_cost.str());
    row("gap", mn, "remaining_pct", fixed(gap.remaining_percent));
    row("fifo", mn, "improvement_pct", fixed(r.fifo_improvement_percent(m)));
  }
  row("fifo", "ports", "removed", std::to_string(r.fifo_removed));
  row("fifo", "ports", "total", std::to_string(r.fifo_total));

  for (const auto& l : r.latency) {
    row("latency", l.dfg, "full", fixed(l.full, 2));
    row("latency", l.dfg, "best", fixed(l.best, 2));
    row("latency", l.dfg, "ratio", fixed(l.ratio()));
  }
  row("latency", "mean", "ratio", fixed(r.mean_latency_ratio()));

  row("search", "budget", "l_test", std::to_string(r.l_test));
  row("search", "subproblems", "expanded", std::to_string(r.stats.expanded));
  row("search", "subproblems", "tested", std::to_string(r.stats.tested));
  row("search", "subproblems", "capped", std::to_string(r.stats.capped));
  row("search", "mapper", "calls", std::to_string(r.stats.mapper_calls));
  row("search", "queue", "peak", std::to_string(r.stats.peak_queue));
  row("search", "gsg", "skipped", r.stats.gsg_skipped ? "1" : "0");
  std::string order;
  for (OpGroup g : r.stats.removal_order) order += (order.empty() ? "" : "-") + std::string(group_name(g));
  row("search", "opsg", "removal_order", order);
  return o.str();
}

/// One line per tested or fail-capped candidate. No wall-clock fields.
inline std::string search_csv(const SearchStats& s) {
  std::ostringstream o;
  o << "seq,phase,round,cost,removed,row,col,verdict,mapper_calls\n";
  for (const auto& e : s.log) {
    o << e.seq << ',' << phase_name(e.phase) << ',' << e.round << ',' << e.cost.str() << ','
      << e.removed.str('-') << ',' << e.cell.r << ',' << e.cell.c << ',' << verdict_name(e.verdict) << ','
      << e.mapper_calls << '\n';
  }
  return o.str();
}

/// Wall-clock view of the search log and the best-cost trace.
inline std::string timing_csv(const SearchStats& s) {
  std::ostringstream o;
  o << "kind,seq,phase,tested,cost,elapsed_ms\n";
  for (const auto& e : s.log)
    o << "test," << e.seq << ',' << phase_name(e.phase) << ",," << e.cost.str() << ',' << fixed(e.elapsed_ms, 3) << '\n';
  for (std::size_t i = 0; i < s.trace.size(); ++i) {
    const auto& t = s.trace[i];
    o << "best," << i << ',' << phase_name(t.phase) << ',' << t.tested << ',' << t.cost.str() << ','
      << fixed(t.elapsed_ms, 3) << '\n';
  }
  o << "phase,0,opsg,,," << fixed(s.opsg_seconds * 1000.0, 3) << '\n';
  o << "phase,1,gsg,,," << fixed(s.gsg_seconds * 1000.0, 3) << '\n';
  return o.str();
}

inline std::string report_text(const Report& r) {
  std::ostringstream o;
  const auto& a = r.area();
  const auto& p = r.power();
  o << "grid " << r.rows << "x" << r.cols << ", initial layout: " << source_name(r.initial_source) << "\n";
  o << "groups present: " << r.present.str() << "\n\n";
  o << "instances    min  full  init  opsg  best  reduction%\n";
  for (OpGroup g : kComputeGroups) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10.*s %5zu %5zu %5zu %5zu %5zu  %s\n", static_cast<int>(group_name(g).size()), group_name(g).data(), r.min_groups[g],
                  r.full_instances[g], r.initial_instances[g], r.opsg_instances[g], r.best_instances[g],
                  fixed(r.group_reduction_percent(g), 1).c_str());
    o << line;
  }
  const auto attr = r.attribution_percent();
  o << "total reduction " << fixed(r.instance_reduction_percent(), 1) << "% (heatmap " << fixed(attr[0], 1)
    << ", opsg " << fixed(attr[1], 1) << ", gsg " << fixed(attr[2], 1) << ")\n\n";
  o << "area  full " << a.full.str() << " -> best " << a.best.str() << " (" << fixed(r.cost_reduction_percent(Metric::Area), 1)
    << "% less), after FIFO pruning " << a.pruned.str() << "\n";
  o << "power full " << p.full.str() << " -> best " << p.best.str() << " (" << fixed(r.cost_reduction_percent(Metric::Power), 1)
    << "% less), after FIFO pruning " << p.pruned.str() << "\n";
  o << "remaining to group minimum: area " << fixed(r.gap[0].remaining_percent, 1) << "%, power "
    << fixed(r.gap[1].remaining_percent, 1) << "%\n";
  o << "unused FIFO ports removed: " << r.fifo_removed << "/" << r.fifo_total << " (area "
    << fixed(r.fifo_improvement_percent(Metric::Area), 2) << "%)\n\n";
  o << "latency (best/full):\n";
  for (const auto& l : r.latency) o << "  " << l.dfg << " " << fixed(l.ratio(), 3) << "\n";
  o << "  mean " << fixed(r.mean_latency_ratio(), 3) << "\n\n";
  o << "search: L_test " << r.l_test << ", expanded " << r.stats.expanded << ", tested " << r.stats.tested
    << ", mapper calls " << r.stats.mapper_calls << ", peak queue " << r.stats.peak_queue << "\n";
  o << "time: opsg " << fixed(r.stats.opsg_seconds, 3) << " s, gsg " << fixed(r.stats.gsg_seconds, 3) << " s"
    << (r.stats.gsg_skipped ? " (skipped)" : "") << "\n";
  return o.str();
}

/// Area and power by grid size.
inline std::string sweep_csv(const SweepResult& s) {
  std::ostringstream o;
  o << "rows,cols,feasible,area_full,area_best,power_full,power_best,instances_best,recommended,smallest_feasible\n";
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    o << e.rows << ',' << e.cols << ',' << (e.feasible ? 1 : 0) << ',';
    if (e.report) {
      o << e.report->area().full.str() << ',' << e.report->area().best.str() << ',' << e.report->power().full.str()
        << ',' << e.report->power().best.str() << ',' << e.report->best_instances.total();
    } else {
      o << ",,,,";
    }
    o << ',' << (i == s.recommended ? 1 : 0) << ',' << (i == s.smallest_feasible ? 1 : 0) << '\n';
  }
  return o.str();
}

}  // namespace cgra
