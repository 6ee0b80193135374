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

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/error.hpp"
#include "cgra/layout.hpp"

namespace cgra {

/// Result of spatially mapping one DFG: a cell per node and a cell path per
/// edge (source cell first, destination cell last).
struct Mapping {
  std::vector<CellPos> placement;
  std::vector<std::vector<CellPos>> routes;

  friend bool operator==(const Mapping&, const Mapping&) = default;
};

// Per-cell mask of input ports that receive data along any route.
inline std::vector<std::uint8_t> used_input_ports(const Layout& layout, const Mapping& m) {
  std::vector<std::uint8_t> used(layout.num_cells(), 0);
  for (const auto& path : m.routes) {
    for (std::size_t i = 1; i < path.size(); ++i) {
      used[layout.index(path[i])] |= dir_bit(direction_between(path[i], path[i - 1]));
    }
  }
  return used;
}

inline std::size_t hop_count(const std::vector<CellPos>& path) {
  return path.empty() ? 0 : path.size() - 1;
}

/// Independent checker for a mapping; shares no code with the mapper.
/// Returns the first violated invariant, or nullopt when the mapping is legal.
inline std::optional<std::string> validate_mapping(const Dfg& dfg, const Layout& layout,
                                                   const Mapping& m) {
  if (m.placement.size() != dfg.num_nodes()) return "placement size does not match node count";
  if (m.routes.size() != dfg.num_edges()) return "route count does not match edge count";

  std::map<CellPos, std::size_t> occupant;
  for (std::size_t v = 0; v < dfg.num_nodes(); ++v) {
    const CellPos p = m.placement[v];
    const auto& node = dfg.node(v);
    if (!layout.in_bounds(p)) return "node " + node.id + " placed outside the grid";
    if (!occupant.emplace(p, v).second) return "two nodes share a cell at node " + node.id;
    if (node.group == OpGroup::Mem) {
      if (!layout.is_io(p)) return "memory node " + node.id + " not on an I/O cell";
    } else {
      if (layout.is_io(p)) return "compute node " + node.id + " on an I/O cell";
      if (!layout.groups(p).contains(node.group)) {
        return "cell does not support group " + std::string(group_name(node.group)) + " of node " + node.id;
      }
    }
  }

  // (from, to) link -> signal (source node) carried.
  std::map<std::pair<CellPos, CellPos>, std::size_t> carried;
  for (std::size_t e = 0; e < dfg.num_edges(); ++e) {
    const auto& edge = dfg.edges()[e];
    const auto& path = m.routes[e];
    const std::string label = dfg.node(edge.src).id + "->" + dfg.node(edge.dst).id;
    if (path.size() < 2) return "route " + label + " too short";
    if (path.front() != m.placement[edge.src]) return "route " + label + " does not start at its source";
    if (path.back() != m.placement[edge.dst]) return "route " + label + " does not end at its sink";
    std::set<CellPos> visited;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!layout.in_bounds(path[i])) return "route " + label + " leaves the grid";
      if (!visited.insert(path[i]).second) return "route " + label + " revisits a cell";
      if (i == 0) continue;
      const CellPos a = path[i - 1], b = path[i];
      if (manhattan(a, b) != 1) return "route " + label + " has a non-adjacent hop";
      // Receiving FIFO of b on the side facing a.
      const int dr = a.r - b.r, dc = a.c - b.c;
      const Dir side = dr == -1 ? Dir::N : dr == 1 ? Dir::S : dc == 1 ? Dir::E : Dir::W;
      if (!(layout.fifo(b) & dir_bit(side))) return "route " + label + " enters a pruned FIFO port";
      auto [it, inserted] = carried.emplace(std::make_pair(a, b), edge.src);
      if (!inserted && it->second != edge.src) return "link over capacity on route " + label;
    }
  }
  return std::nullopt;
}

// `place <node> <r> <c>` and `route <src> <dst> <r,c;r,c;...>` lines.
inline std::string dump_mapping(const Dfg& dfg, const Mapping& m) {
  std::ostringstream os;
  for (std::size_t v = 0; v < dfg.num_nodes(); ++v) {
    os << "place " << dfg.node(v).id << ' ' << m.placement[v].r << ' ' << m.placement[v].c << '\n';
  }
  for (std::size_t e = 0; e < dfg.num_edges(); ++e) {
    const auto& edge = dfg.edges()[e];
    os << "route " << dfg.node(edge.src).id << ' ' << dfg.node(edge.dst).id << ' ';
    const auto& path = m.routes[e];
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) os << ';';
      os << path[i].r << ',' << path[i].c;
    }
    os << '\n';
  }
  return os.str();
}

inline Mapping parse_mapping(std::istream& in, const Dfg& dfg) {
  std::map<std::string, std::size_t, std::less<>> ids;
  for (std::size_t v = 0; v < dfg.num_nodes(); ++v) ids.emplace(dfg.node(v).id, v);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
  for (std::size_t e = 0; e < dfg.num_edges(); ++e)
    edge_index.emplace(std::make_pair(dfg.edges()[e].src, dfg.edges()[e].dst), e);

  Mapping m;
  m.placement.assign(dfg.num_nodes(), CellPos{-1, -1});
  m.routes.assign(dfg.num_edges(), {});
  auto lookup = [&](const std::string& id, std::size_t lineno) {
    auto it = ids.find(id);
    if (it == ids.end()) throw ParseError("unknown node '" + id + "'", lineno);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw, a, b, extra;
    if (!(ls >> kw)) continue;
    if (kw == "place") {
      int r = 0, c = 0;
      if (!(ls >> a >> r >> c) || (ls >> extra)) throw ParseError("expected 'place <node> <r> <c>'", lineno);
      m.placement[lookup(a, lineno)] = {r, c};
    } else if (kw == "route") {
      std::string cells;
      if (!(ls >> a >> b >> cells) || (ls >> extra)) throw ParseError("expected 'route <src> <dst> <cells>'", lineno);
      auto it = edge_index.find({lookup(a, lineno), lookup(b, lineno)});
      if (it == edge_index.end()) throw ParseError("route for a non-existent edge", lineno);
      std::vector<CellPos> path;
      std::istringstream cs(cells);
      std::string tok;
      while (std::getline(cs, tok, ';')) {
        CellPos p;
        char comma = 0;
        std::istringstream ts(tok);
        if (!(ts >> p.r >> comma >> p.c) || comma != ',') throw ParseError("bad cell '" + tok + "'", lineno);
        path.push_back(p);
      }
      m.routes[it->second] = std::move(path);
    } else {
      throw ParseError("unknown directive '" + kw + "'", lineno);
    }
  }
  return m;
}

}  // namespace cgra
