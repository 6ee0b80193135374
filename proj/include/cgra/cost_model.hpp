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

#include <array>
#include <bit>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "cgra/cost.hpp"
#include "cgra/dfg.hpp"
#include "cgra/error.hpp"
#include "cgra/layout.hpp"

namespace cgra {

enum class Component : std::uint8_t { Arith, FP, Mult, Div, Other, Fifo, Empty, IO };
inline constexpr std::size_t kNumComponents = 8;

inline constexpr std::array<std::string_view, kNumComponents> kComponentNames = {
    "Arith", "FP", "Mult", "Div", "Other", "FIFO", "Empty", "IO"};

enum class Metric : std::uint8_t { Area, Power };

inline const char* metric_name(Metric m) { return m == Metric::Area ? "area" : "power"; }

constexpr Component component_for(OpGroup g) {
  switch (g) {
    case OpGroup::Arith: return Component::Arith;
    case OpGroup::Div: return Component::Div;
    case OpGroup::FP: return Component::FP;
    case OpGroup::Mult: return Component::Mult;
    case OpGroup::Other: return Component::Other;
    case OpGroup::Mem: break;
  }
  throw ValidationError("Mem has no compute-cell component");
}

/// Normalized per-component area and power weights.
///
/// The FIFO entry prices a whole bank of four input FIFOs; each retained
/// port is charged a quarter of it. Area defaults are the synthesized
/// component costs normalized to the integer ALU. There is no published
/// per-component power table, so power defaults to area times a scale.
struct CostTable {
  std::array<Cost, kNumComponents> area{};
  std::array<Cost, kNumComponents> power{};

  static CostTable defaults(double power_scale = 1.0) {
    CostTable t;
    t.area = {Cost::parse("1.0"),  Cost::parse("4.4"),  Cost::parse("6.2"), Cost::parse("17.0"),
              Cost::parse("12.3"), Cost::parse("4.9"),  Cost::parse("4.6"), Cost::parse("11.9")};
    for (std::size_t i = 0; i < kNumComponents; ++i) {
      t.power[i] = Cost::from_double(t.area[i].to_double() * power_scale);
    }
    return t;
  }

  Cost get(Component c, Metric m) const {
    const auto& arr = m == Metric::Area ? area : power;
    return arr[static_cast<std::size_t>(c)];
  }
  Cost group_cost(OpGroup g, Metric m = Metric::Area) const { return get(component_for(g), m); }
  Cost fifo_port_cost(Metric m = Metric::Area) const {
    return Cost::from_ticks(get(Component::Fifo, m).ticks() / 4);
  }

  // Lines of `<component> <area> <power>`; components not listed keep defaults.
  static CostTable parse(std::istream& in) {
    CostTable t = defaults();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string name, a, p, extra;
      if (!(ls >> name)) continue;
      if (!(ls >> a >> p) || (ls >> extra)) throw ParseError("expected '<component> <area> <power>'", lineno);
      std::size_t idx = kNumComponents;
      for (std::size_t i = 0; i < kNumComponents; ++i)
        if (kComponentNames[i] == name) idx = i;
      if (idx == kNumComponents) throw ParseError("unknown component '" + name + "'", lineno);
      try {
        t.area[idx] = Cost::parse(a);
        t.power[idx] = Cost::parse(p);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      }
      if (t.area[idx] < Cost{} || t.power[idx] < Cost{}) throw ParseError("negative weight", lineno);
    }
    return t;
  }

  static CostTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open cost table " + path);
    try {
      return parse(in);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
};

// Empty cell plus retained FIFO ports plus supported groups.
inline Cost compute_cell_cost(GroupSet groups, std::uint8_t fifo, const CostTable& costs,
                              Metric m = Metric::Area) {
  Cost c = costs.get(Component::Empty, m) + std::popcount(fifo) * costs.fifo_port_cost(m);
  for (OpGroup g : groups.members()) c += costs.group_cost(g, m);
  return c;
}

// A complete I/O cell, minus the share of any pruned input ports.
inline Cost io_cell_cost(std::uint8_t fifo, const CostTable& costs, Metric m = Metric::Area) {
  return costs.get(Component::IO, m) - (4 - std::popcount(fifo)) * costs.fifo_port_cost(m);
}

/// Layout cost over compute cells:
///   N_t * (empty + FIFO) + sum_g N_g * cost(g)
/// with FIFO charged per retained port. include_io adds the I/O ring for
/// whole-array totals.
inline Cost layout_cost(const Layout& layout, const CostTable& costs, Metric m = Metric::Area,
                        bool include_io = false) {
  Cost total;
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      CellPos p{r, c};
      if (layout.is_io(p)) {
        if (include_io) total += io_cell_cost(layout.fifo(p), costs, m);
      } else {
        total += compute_cell_cost(layout.groups(p), layout.fifo(p), costs, m);
      }
    }
  }
  return total;
}

// Cost of a layout holding exactly `instances` group instances while keeping
// every cell and FIFO of `layout`. Placement-free.
inline Cost cost_with_instances(const Layout& layout, const GroupCounts& instances,
                                const CostTable& costs, Metric m = Metric::Area,
                                bool include_io = false) {
  Cost total;
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      CellPos p{r, c};
      if (layout.is_io(p)) {
        if (include_io) total += io_cell_cost(layout.fifo(p), costs, m);
      } else {
        total += compute_cell_cost(GroupSet{}, layout.fifo(p), costs, m);
      }
    }
  }
  for (OpGroup g : kComputeGroups) total += static_cast<std::int64_t>(instances[g]) * costs.group_cost(g, m);
  return total;
}

}  // namespace cgra
