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

#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/error.hpp"
#include "cgra/layout.hpp"
#include "cgra/mapper.hpp"

namespace cgra {

struct Heatmap {
  Layout full;
  Layout layout;
  // Mappings of each DFG on the full layout.
  std::vector<Mapping> mappings;
  // Per cell (row-major), how many DFGs place a node there.
  std::vector<std::size_t> usage;
  std::size_t mapper_calls = 0;
};

/// Maps every DFG onto the full layout and overlays the node placements:
/// each compute cell keeps the union of the groups placed on it. Cells used
/// only for routing end up empty; I/O cells are left untouched.
///
/// Throws InfeasibleError if any DFG fails to map onto the full layout.
template <DfgMapper M>
Heatmap create_heatmap_layout(std::span<const Dfg> dfgs, int rows, int cols, const M& mapper,
                              int threads = 1) {
  Heatmap h;
  h.full = create_full_layout(rows, cols, present_groups(dfgs));
  TestResult full = test_layout(h.full, dfgs, mapper, threads);
  h.mapper_calls = full.mapper_calls;
  if (!full.feasible) {
    std::string which;
    for (const auto& d : dfgs) {
      if (!mapper.map(d, h.full).ok()) {
        which = d.name();
        break;
      }
    }
    throw InfeasibleError("DFG '" + which + "' does not map onto the full " + std::to_string(rows) +
                          "x" + std::to_string(cols) + " layout");
  }
  h.mappings = std::move(full.mappings);
  h.layout = Layout(rows, cols);
  h.usage.assign(h.layout.num_cells(), 0);
  for (std::size_t i = 0; i < dfgs.size(); ++i) {
    const Dfg& d = dfgs[i];
    for (std::size_t v = 0; v < d.num_nodes(); ++v) {
      const CellPos p = h.mappings[i].placement[v];
      ++h.usage[h.layout.index(p)];
      if (!h.layout.is_io(p)) h.layout.set_groups(p, h.layout.groups(p) | GroupSet{d.node(v).group});
    }
  }
  return h;
}

enum class InitialSource { Heatmap, Full };

inline const char* source_name(InitialSource s) { return s == InitialSource::Heatmap ? "heatmap" : "full"; }

struct InitialLayout {
  Layout layout;
  InitialSource source = InitialSource::Full;
  Heatmap heatmap;
  std::size_t mapper_calls = 0;
};

/// Starts from the heatmap if every DFG re-maps onto it, else from the full
/// layout. Throws InfeasibleError when the full layout itself is infeasible.
template <DfgMapper M>
InitialLayout choose_initial_layout(std::span<const Dfg> dfgs, int rows, int cols, const M& mapper,
                                    int threads = 1) {
  InitialLayout out;
  out.heatmap = create_heatmap_layout(dfgs, rows, cols, mapper, threads);
  TestResult remap = test_layout(out.heatmap.layout, dfgs, mapper, threads);
  out.mapper_calls = out.heatmap.mapper_calls + remap.mapper_calls;
  if (remap.feasible) {
    out.layout = out.heatmap.layout;
    out.source = InitialSource::Heatmap;
  } else {
    out.layout = out.heatmap.full;
    out.source = InitialSource::Full;
  }
  return out;
}

// `r,c,count` rows for plotting the overlay.
inline std::string heatmap_usage_csv(const Layout& layout, const std::vector<std::size_t>& usage) {
  std::ostringstream os;
  os << "r,c,count\n";
  for (std::size_t i = 0; i < usage.size(); ++i) {
    CellPos p = layout.pos(i);
    os << p.r << ',' << p.c << ',' << usage[i] << '\n';
  }
  return os.str();
}

}  // namespace cgra
