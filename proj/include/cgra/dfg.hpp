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
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgra/error.hpp"
#include "cgra/op_group.hpp"

namespace cgra {

/// Per-group instance counts, indexed by OpGroup.
struct GroupCounts {
  std::array<std::size_t, kNumGroups> n{};

  std::size_t& operator[](OpGroup g) { return n[index_of(g)]; }
  std::size_t operator[](OpGroup g) const { return n[index_of(g)]; }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto v : n) t += v;
    return t;
  }
  // Groups with a nonzero count.
  GroupSet present() const {
    GroupSet s;
    for (OpGroup g : kAllGroups)
      if (n[index_of(g)] > 0) s.insert(g);
    return s;
  }
  friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

// Nodes of one DFG requiring each group.
using GroupDemand = GroupCounts;
// Per-group max of GroupDemand over a DFG set: the instance lower bound.
using MinGroups = GroupCounts;

struct DfgNode {
  std::string id;
  std::string opcode;
  OpGroup group;

  friend bool operator==(const DfgNode&, const DfgNode&) = default;
};

struct DfgEdge {
  std::size_t src;
  std::size_t dst;

  friend bool operator==(const DfgEdge&, const DfgEdge&) = default;
};

/// Validated dataflow graph. Immutable once built; node and edge order are
/// preserved as given.
class Dfg {
 public:
  Dfg() = default;

  // Throws ValidationError on duplicate ids, duplicate edges, out-of-range
  // endpoints or cycles.
  Dfg(std::string name, std::vector<DfgNode> nodes, std::vector<DfgEdge> edges)
      : name_(std::move(name)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::map<std::string_view, std::size_t> ids;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!ids.emplace(nodes_[i].id, i).second) {
        throw ValidationError("duplicate node id '" + nodes_[i].id + "'");
      }
    }
    preds_.resize(nodes_.size());
    succs_.resize(nodes_.size());
    for (const auto& e : edges_) {
      if (e.src >= nodes_.size() || e.dst >= nodes_.size()) {
        throw ValidationError("edge endpoint out of range");
      }
      if (e.src == e.dst) throw ValidationError("cycle detected at node '" + nodes_[e.src].id + "'");
      auto& s = succs_[e.src];
      if (std::find(s.begin(), s.end(), e.dst) != s.end()) {
        throw ValidationError("duplicate edge " + nodes_[e.src].id + " -> " + nodes_[e.dst].id);
      }
      s.push_back(e.dst);
      preds_[e.dst].push_back(e.src);
    }
    compute_order();
  }

  const std::string& name() const { return name_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<DfgNode>& nodes() const { return nodes_; }
  const std::vector<DfgEdge>& edges() const { return edges_; }
  const DfgNode& node(std::size_t i) const { return nodes_[i]; }
  std::span<const std::size_t> preds(std::size_t i) const { return preds_[i]; }
  std::span<const std::size_t> succs(std::size_t i) const { return succs_[i]; }
  const std::vector<std::size_t>& topo_order() const { return topo_; }
  // Longest path (in nodes) from any source to i, sources at level 0.
  std::size_t level(std::size_t i) const { return level_[i]; }
  // Longest path (in nodes) from i to any sink, sinks at height 0.
  std::size_t height(std::size_t i) const { return height_[i]; }

  GroupDemand demand() const {
    GroupDemand d;
    for (const auto& n : nodes_) ++d[n.group];
    return d;
  }
  GroupSet used_groups() const { return demand().present(); }

  friend bool operator==(const Dfg& a, const Dfg& b) {
    return a.name_ == b.name_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void compute_order() {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> indeg(n);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = preds_[i].size();
    // Kahn with a min-heap so the order is the lowest-index-first topological order.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.push(i);
    while (!ready.empty()) {
      auto v = ready.top();
      ready.pop();
      topo_.push_back(v);
      for (auto s : succs_[v])
        if (--indeg[s] == 0) ready.push(s);
    }
    if (topo_.size() != n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (indeg[i] > 0) throw ValidationError("cycle detected through node '" + nodes_[i].id + "'");
      }
    }
    level_.assign(n, 0);
    for (auto v : topo_)
      for (auto s : succs_[v]) level_[s] = std::max(level_[s], level_[v] + 1);
    height_.assign(n, 0);
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it)
      for (auto s : succs_[*it]) height_[*it] = std::max(height_[*it], height_[s] + 1);
  }

  std::string name_;
  std::vector<DfgNode> nodes_;
  std::vector<DfgEdge> edges_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::vector<std::size_t>> succs_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> level_;
  std::vector<std::size_t> height_;
};

/// Parses the line-oriented DFG format:
///
///     # comment
///     dfg <name>
///     node <id> <OPCODE>
///     edge <src> <dst>
///
/// Nodes must be declared before edges that reference them.
inline Dfg parse_dfg(std::istream& in, const OpcodeTable& table = OpcodeTable::defaults()) {
  std::string name;
  std::vector<DfgNode> nodes;
  std::vector<DfgEdge> edges;
  std::map<std::string, std::size_t, std::less<>> ids;
  bool have_header = false;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::string a, b, extra;
    if (kw == "dfg") {
      if (have_header) throw ParseError("duplicate 'dfg' header", lineno);
      if (!(ls >> a) || (ls >> extra)) throw ParseError("expected 'dfg <name>'", lineno);
      name = a;
      have_header = true;
    } else if (kw == "node") {
      if (!have_header) throw ParseError("'node' before 'dfg' header", lineno);
      if (!(ls >> a >> b) || (ls >> extra)) throw ParseError("expected 'node <id> <OPCODE>'", lineno);
      if (!table.contains(b)) throw ParseError("unknown opcode '" + b + "'", lineno);
      if (!ids.emplace(a, nodes.size()).second) {
        throw ParseError("duplicate node id '" + a + "'", lineno);
      }
      nodes.push_back({a, b, table.classify(b)});
    } else if (kw == "edge") {
      if (!have_header) throw ParseError("'edge' before 'dfg' header", lineno);
      if (!(ls >> a >> b) || (ls >> extra)) throw ParseError("expected 'edge <src> <dst>'", lineno);
      auto sa = ids.find(a);
      if (sa == ids.end()) throw ParseError("dangling edge endpoint '" + a + "'", lineno);
      auto sb = ids.find(b);
      if (sb == ids.end()) throw ParseError("dangling edge endpoint '" + b + "'", lineno);
      edges.push_back({sa->second, sb->second});
    } else {
      throw ParseError("unknown directive '" + kw + "'", lineno);
    }
  }
  if (!have_header) throw ParseError("missing 'dfg <name>' header");
  return Dfg(std::move(name), std::move(nodes), std::move(edges));
}

inline Dfg parse_dfg(std::string_view text, const OpcodeTable& table = OpcodeTable::defaults()) {
  std::istringstream in{std::string(text)};
  return parse_dfg(in, table);
}

inline Dfg load_dfg(const std::filesystem::path& path,
                    const OpcodeTable& table = OpcodeTable::defaults()) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open DFG file " + path.string());
  try {
    return parse_dfg(in, table);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// Every *.dfg file in dir, in filename order.
inline std::vector<Dfg> load_dfg_dir(const std::filesystem::path& dir,
                                     const OpcodeTable& table = OpcodeTable::defaults()) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw ParseError("cannot open DFG directory " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dfg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Dfg> out;
  for (const auto& f : files) out.push_back(load_dfg(f, table));
  return out;
}

inline std::string serialize_dfg(const Dfg& dfg) {
  std::ostringstream os;
  os << "dfg " << dfg.name() << '\n';
  for (const auto& n : dfg.nodes()) os << "node " << n.id << ' ' << n.opcode << '\n';
  for (const auto& e : dfg.edges())
    os << "edge " << dfg.node(e.src).id << ' ' << dfg.node(e.dst).id << '\n';
  return os.str();
}

inline GroupDemand group_demand(const Dfg& dfg) { return dfg.demand(); }

inline MinGroups find_min_groups(std::span<const Dfg> dfgs) {
  if (dfgs.empty()) throw ValidationError("find_min_groups: empty DFG set");
  MinGroups m;
  for (const auto& d : dfgs) {
    auto dem = d.demand();
    for (OpGroup g : kAllGroups) m[g] = std::max(m[g], dem[g]);
  }
  return m;
}

// Union of the groups used by any DFG in the set.
inline GroupSet present_groups(std::span<const Dfg> dfgs) {
  GroupSet s;
  for (const auto& d : dfgs) s = s | d.used_groups();
  return s;
}

/// Knobs for the seeded random DFG generator used by property tests.
struct RandomDfgParams {
  std::size_t num_compute = 4;
  std::size_t num_loads = 2;
  std::size_t num_stores = 1;
  std::size_t max_fanin = 2;
  // Opcodes drawn uniformly for compute nodes.
  std::vector<std::string> compute_opcodes = {"ADD", "MUL", "FADD"};
};

/// Layered random DAG: loads feed compute nodes, every compute node takes
/// 1..max_fanin operands from earlier nodes, stores consume compute outputs.
inline Dfg generate_random_dfg(std::uint64_t seed, const RandomDfgParams& p,
                               const OpcodeTable& table = OpcodeTable::defaults(),
                               std::string name = "rand") {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::vector<DfgNode> nodes;
  std::vector<DfgEdge> edges;
  for (std::size_t i = 0; i < p.num_loads; ++i)
    nodes.push_back({"ld" + std::to_string(i), "LOAD", table.classify("LOAD")});
  for (std::size_t i = 0; i < p.num_compute; ++i) {
    const auto& op = p.compute_opcodes[pick(0, p.compute_opcodes.size() - 1)];
    const std::size_t self = nodes.size();
    nodes.push_back({"n" + std::to_string(i), op, table.classify(op)});
    if (self == 0) continue;
    std::size_t fanin = std::min(pick(1, std::max<std::size_t>(1, p.max_fanin)), self);
    std::vector<std::size_t> srcs;
    while (srcs.size() < fanin) {
      auto s = pick(0, self - 1);
      if (std::find(srcs.begin(), srcs.end(), s) == srcs.end()) srcs.push_back(s);
    }
    std::sort(srcs.begin(), srcs.end());
    for (auto s : srcs) edges.push_back({s, self});
  }
  const std::size_t first_compute = p.num_loads;
  for (std::size_t i = 0; i < p.num_stores; ++i) {
    const std::size_t self = nodes.size();
    nodes.push_back({"st" + std::to_string(i), "STORE", table.classify("STORE")});
    if (p.num_compute > 0) edges.push_back({pick(first_compute, first_compute + p.num_compute - 1), self});
    else if (p.num_loads > 0) edges.push_back({pick(0, p.num_loads - 1), self});
  }
  return Dfg(std::move(name), std::move(nodes), std::move(edges));
}

}  // namespace cgra
