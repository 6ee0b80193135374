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
#include <atomic>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <future>
#include <limits>
#include <memory>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/layout.hpp"
#include "cgra/mapping.hpp"

namespace cgra {

struct MapperConfig {
  std::uint64_t seed = 1;
  // Placement attempts after the first; each reshuffles candidate scores.
  int max_restarts = 3;
  // Negotiated-congestion rip-up/re-route iterations per placement.
  int ripup_iterations = 30;
  double present_factor = 0.5;
  double present_growth = 1.8;
  double history_factor = 1.0;
  // Worker threads for test_layout; 1 maps DFGs sequentially.
  int threads = 1;
};

enum class MapStatus { Success, PlacementInfeasible, RoutingInfeasible };

struct MapResult {
  MapStatus status = MapStatus::PlacementInfeasible;
  Mapping mapping;

  bool ok() const { return status == MapStatus::Success; }
};

inline const char* status_name(MapStatus s) {
  switch (s) {
    case MapStatus::Success: return "success";
    case MapStatus::PlacementInfeasible: return "placement-infeasible";
    case MapStatus::RoutingInfeasible: return "routing-infeasible";
  }
  return "?";
}

/// Anything that can spatially map a DFG onto a layout. The search only
/// depends on this contract, so other mappers can be dropped in.
template <class M>
concept DfgMapper = requires(const M& m, const Dfg& d, const Layout& l) {
  { m.map(d, l) } -> std::same_as<MapResult>;
};

namespace detail {

// Hall's condition for assigning typed nodes to cells, where a cell may
// serve any group in its mask. Nodes of one group are interchangeable, so
// checking all unions of the (at most 5) compute groups is exact.
class GroupMatching {
 public:
  void add_cell(std::uint8_t mask, int delta) { free_[mask] += delta; }
  void add_need(int g, int delta) { need_[g] += delta; }

  bool satisfiable() const {
    for (unsigned s = 1; s < 32; ++s) {
      int need = 0;
      for (int g = 0; g < 5; ++g)
        if (s & (1u << g)) need += need_[g];
      if (need == 0) continue;
      int avail = 0;
      for (unsigned m = 1; m < 32; ++m)
        if (m & s) avail += free_[m];
      if (need > avail) return false;
    }
    return true;
  }

 private:
  std::array<int, 32> free_{};
  std::array<int, 5> need_{};
};

// Compute groups in the 5-bit local order used by GroupMatching.
inline int compute_slot(OpGroup g) {
  switch (g) {
    case OpGroup::Arith: return 0;
    case OpGroup::Div: return 1;
    case OpGroup::FP: return 2;
    case OpGroup::Mult: return 3;
    case OpGroup::Other: return 4;
    case OpGroup::Mem: break;
  }
  return -1;
}

inline std::uint8_t compute_mask(GroupSet s) {
  std::uint8_t m = 0;
  for (OpGroup g : kComputeGroups)
    if (s.contains(g)) m |= static_cast<std::uint8_t>(1u << compute_slot(g));
  return m;
}

// Uniform double in [0, 1) from the raw engine output, so results do not
// depend on the standard library's distribution implementations.
inline double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Reference mapper: connectivity-driven greedy placement guarded by an
/// exact group-matching check, then negotiated-congestion routing with
/// rip-up and re-route. Deterministic for a fixed config.
///
/// Only the groups a DFG actually uses are visible to it, so removing a
/// group the DFG does not use never changes its mapping.
class ReferenceMapper {
 public:
  ReferenceMapper() = default;
  explicit ReferenceMapper(MapperConfig cfg) : cfg_(cfg) {}

  const MapperConfig& config() const { return cfg_; }

  MapResult map(const Dfg& dfg, const Layout& layout) const {
    Context ctx(dfg, layout);
    if (!ctx.precheck()) return {MapStatus::PlacementInfeasible, {}};
    MapStatus last = MapStatus::PlacementInfeasible;
    for (int attempt = 0; attempt <= cfg_.max_restarts; ++attempt) {
      std::mt19937_64 rng(cfg_.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(attempt));
      std::vector<int> place;
      if (!ctx.place(attempt, rng, place)) {
        last = MapStatus::PlacementInfeasible;
        continue;
      }
      Mapping m;
      if (ctx.route(place, cfg_, m)) return {MapStatus::Success, std::move(m)};
      last = MapStatus::RoutingInfeasible;
    }
    return {last, {}};
  }

 private:
  struct Context {
    const Dfg& dfg;
    const Layout& layout;
    const int ncells;
    std::vector<std::uint8_t> cell_mask;  // compute groups visible to this DFG
    std::vector<int> in_links;            // usable incoming links per cell
    std::vector<int> out_links;
    std::vector<std::vector<std::size_t>> nbrs;
    std::vector<int> slot;  // compute slot per node, -1 for Mem

    Context(const Dfg& d, const Layout& l)
        : dfg(d), layout(l), ncells(static_cast<int>(l.num_cells())) {
      const std::uint8_t visible = detail::compute_mask(d.used_groups());
      cell_mask.assign(ncells, 0);
      in_links.assign(ncells, 0);
      out_links.assign(ncells, 0);
      for (int i = 0; i < ncells; ++i) {
        CellPos p = l.pos(i);
        if (!l.is_io(p)) cell_mask[i] = detail::compute_mask(l.groups(p)) & visible;
        for (Dir dir : kDirs) {
          CellPos q = step(p, dir);
          if (l.link_usable(q, p)) ++in_links[i];
          if (l.link_usable(p, q)) ++out_links[i];
        }
      }
      nbrs.resize(d.num_nodes());
      slot.resize(d.num_nodes());
      for (std::size_t v = 0; v < d.num_nodes(); ++v) {
        for (auto u : d.preds(v)) nbrs[v].push_back(u);
        for (auto u : d.succs(v)) nbrs[v].push_back(u);
        slot[v] = d.node(v).group == OpGroup::Mem ? -1 : detail::compute_slot(d.node(v).group);
      }
    }

    bool suits(std::size_t v, int cell) const {
      CellPos p = layout.pos(cell);
      if (slot[v] < 0) {
        if (!layout.is_io(p)) return false;
      } else if (layout.is_io(p) || !(cell_mask[cell] & (1u << slot[v]))) {
        return false;
      }
      if (static_cast<int>(dfg.preds(v).size()) > in_links[cell]) return false;
      if (!dfg.succs(v).empty() && out_links[cell] == 0) return false;
      return true;
    }

    bool precheck() const {
      detail::GroupMatching hall;
      int io_free = 0;
      for (int i = 0; i < ncells; ++i) {
        if (layout.is_io(layout.pos(i))) ++io_free;
        else hall.add_cell(cell_mask[i], 1);
      }
      int mem = 0;
      for (std::size_t v = 0; v < dfg.num_nodes(); ++v) {
        if (slot[v] < 0) ++mem;
        else hall.add_need(slot[v], 1);
        bool any = false;
        for (int i = 0; i < ncells && !any; ++i) any = suits(v, i);
        if (!any) return false;
      }
      return mem <= io_free && hall.satisfiable();
    }

    bool place(int attempt, std::mt19937_64& rng, std::vector<int>& cell_of) const {
      const std::size_t n = dfg.num_nodes();
      cell_of.assign(n, -1);
      std::vector<char> taken(ncells, 0);
      detail::GroupMatching hall;
      for (int i = 0; i < ncells; ++i)
        if (!layout.is_io(layout.pos(i))) hall.add_cell(cell_mask[i], 1);
      for (std::size_t v = 0; v < n; ++v)
        if (slot[v] >= 0) hall.add_need(slot[v], 1);

      const double cr = (layout.rows() - 1) / 2.0, cc = (layout.cols() - 1) / 2.0;
      // Criticality: longer downstream chains first, then higher degree.
      auto more_critical = [&](std::size_t a, std::size_t b) {
        if (dfg.height(a) != dfg.height(b)) return dfg.height(a) > dfg.height(b);
        if (nbrs[a].size() != nbrs[b].size()) return nbrs[a].size() > nbrs[b].size();
        return a < b;
      };
      std::vector<int> placed_nbrs(n, 0);
      const double jitter = attempt == 0 ? 0.0 : 1.5 * attempt;

      for (std::size_t round = 0; round < n; ++round) {
        std::size_t best_v = n;
        for (std::size_t v = 0; v < n; ++v) {
          if (cell_of[v] >= 0) continue;
          if (best_v == n) { best_v = v; continue; }
          const int a = placed_nbrs[v], b = placed_nbrs[best_v];
          if (a != b) {
            if (a > b) best_v = v;
            continue;
          }
          // With no placed neighbours, grow from compute nodes before memory.
          if (a == 0 && (slot[v] < 0) != (slot[best_v] < 0)) {
            if (slot[v] >= 0) best_v = v;
            continue;
          }
          if (more_critical(v, best_v)) best_v = v;
        }
        const std::size_t v = best_v;

        int best_cell = -1;
        double best_score = std::numeric_limits<double>::infinity();
        for (int i = 0; i < ncells; ++i) {
          if (taken[i] || !suits(v, i)) continue;
          CellPos p = layout.pos(i);
          double score = 0.0;
          if (placed_nbrs[v] > 0) {
            for (auto u : nbrs[v])
              if (cell_of[u] >= 0) score += 4.0 * manhattan(p, layout.pos(cell_of[u]));
          } else {
            score += std::abs(p.r - cr) + std::abs(p.c - cc);
          }
          if (slot[v] >= 0) {
            // Keep versatile cells for nodes that need them.
            score += 0.25 * std::popcount(static_cast<unsigned>(cell_mask[i]));
            // Neighbouring occupied cells crowd the switch fabric.
            for (Dir d : kDirs) {
              CellPos q = step(p, d);
              if (layout.in_bounds(q) && taken[layout.index(q)]) score += 0.5;
            }
          }
          if (jitter > 0) score += jitter * detail::unit_real(rng);
          if (score >= best_score) continue;
          if (slot[v] >= 0) {
            hall.add_cell(cell_mask[i], -1);
            hall.add_need(slot[v], -1);
            const bool ok = hall.satisfiable();
            hall.add_cell(cell_mask[i], 1);
            hall.add_need(slot[v], 1);
            if (!ok) continue;
          }
          best_score = score;
          best_cell = i;
        }
        if (best_cell < 0) return false;
        cell_of[v] = best_cell;
        taken[best_cell] = 1;
        if (slot[v] >= 0) {
          hall.add_cell(cell_mask[best_cell], -1);
          hall.add_need(slot[v], -1);
        }
        for (auto u : nbrs[v]) ++placed_nbrs[u];
      }
      return true;
    }

    // Link id: cell index * 4 + direction of travel out of that cell.
    bool route(const std::vector<int>& cell_of, const MapperConfig& cfg, Mapping& out) const {
      struct Net {
        int src = -1;
        std::vector<int> sinks;
        std::vector<int> parent;  // per cell, -2 = not in tree
        std::vector<int> links;
      };
      const int nlinks = ncells * 4;
      std::vector<char> usable(nlinks, 0);
      std::vector<int> link_to(nlinks, -1);
      for (int i = 0; i < ncells; ++i) {
        CellPos p = layout.pos(i);
        for (Dir d : kDirs) {
          CellPos q = step(p, d);
          if (layout.link_usable(p, q)) {
            usable[i * 4 + static_cast<int>(d)] = 1;
            link_to[i * 4 + static_cast<int>(d)] = static_cast<int>(layout.index(q));
          }
        }
      }

      std::vector<Net> nets;
      std::vector<int> net_of_node(dfg.num_nodes(), -1);
      for (std::size_t v = 0; v < dfg.num_nodes(); ++v) {
        if (dfg.succs(v).empty()) continue;
        Net net;
        net.src = cell_of[v];
        for (auto s : dfg.succs(v)) net.sinks.push_back(cell_of[s]);
        CellPos sp = layout.pos(net.src);
        std::stable_sort(net.sinks.begin(), net.sinks.end(), [&](int a, int b) {
          return manhattan(sp, layout.pos(a)) < manhattan(sp, layout.pos(b));
        });
        net.parent.assign(ncells, -2);
        net_of_node[v] = static_cast<int>(nets.size());
        nets.push_back(std::move(net));
      }
      // Large fan-out nets first.
      std::vector<int> order(nets.size());
      for (std::size_t i = 0; i < nets.size(); ++i) order[i] = static_cast<int>(i);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return nets[a].sinks.size() > nets[b].sinks.size();
      });

      std::vector<int> occ(nlinks, 0);
      std::vector<double> hist(nlinks, 0.0);
      std::vector<double> dist(ncells);
      std::vector<int> via(ncells);  // link used to reach a cell
      double pres = cfg.present_factor;

      auto rip_up = [&](Net& net) {
        for (int l : net.links) --occ[l];
        net.links.clear();
        std::fill(net.parent.begin(), net.parent.end(), -2);
      };

      auto route_net = [&](Net& net) -> bool {
        net.parent[net.src] = -1;
        for (int sink : net.sinks) {
          if (net.parent[sink] != -2) continue;
          std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
          std::fill(via.begin(), via.end(), -1);
          using Item = std::pair<double, int>;
          std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
          for (int i = 0; i < ncells; ++i) {
            if (net.parent[i] != -2) {
              dist[i] = 0.0;
              pq.push({0.0, i});
            }
          }
          while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            if (u == sink) break;
            for (int k = 0; k < 4; ++k) {
              const int l = u * 4 + k;
              if (!usable[l]) continue;
              const int w = link_to[l];
              const double c = (1.0 + hist[l]) * (1.0 + pres * occ[l]);
              if (d + c < dist[w]) {
                dist[w] = d + c;
                via[w] = l;
                pq.push({dist[w], w});
              }
            }
          }
          if (!std::isfinite(dist[sink])) return false;
          for (int w = sink; net.parent[w] == -2;) {
            const int l = via[w];
            const int u = l / 4;
            net.parent[w] = u;
            net.links.push_back(l);
            ++occ[l];
            w = u;
          }
        }
        return true;
      };

      std::vector<char> dirty(nets.size(), 1);
      for (int it = 0; it < cfg.ripup_iterations; ++it) {
        for (int ni : order) {
          if (!dirty[ni]) continue;
          rip_up(nets[ni]);
          if (!route_net(nets[ni])) return false;
        }
        bool congested = false;
        for (int l = 0; l < nlinks; ++l) {
          if (occ[l] > 1) {
            congested = true;
            hist[l] += cfg.history_factor * (occ[l] - 1);
          }
        }
        if (!congested) {
          out.placement.resize(dfg.num_nodes());
          for (std::size_t v = 0; v < dfg.num_nodes(); ++v) out.placement[v] = layout.pos(cell_of[v]);
          out.routes.clear();
          for (const auto& e : dfg.edges()) {
            const Net& net = nets[net_of_node[e.src]];
            std::vector<CellPos> path;
            for (int w = cell_of[e.dst]; w != -1; w = net.parent[w]) path.push_back(layout.pos(w));
            std::reverse(path.begin(), path.end());
            out.routes.push_back(std::move(path));
          }
          return true;
        }
        for (std::size_t ni = 0; ni < nets.size(); ++ni) {
          dirty[ni] = 0;
          for (int l : nets[ni].links) {
            if (occ[l] > 1) {
              dirty[ni] = 1;
              break;
            }
          }
        }
        pres *= cfg.present_growth;
      }
      return false;
    }
  };

  MapperConfig cfg_;
};

static_assert(DfgMapper<ReferenceMapper>);

inline MapResult map_dfg(const Dfg& dfg, const Layout& layout, const MapperConfig& cfg = {}) {
  return ReferenceMapper(cfg).map(dfg, layout);
}

/// Wraps a mapper and counts calls to map(); copies share the counter.
template <DfgMapper M>
class CountingMapper {
 public:
  explicit CountingMapper(M inner) : inner_(std::move(inner)) {}

  MapResult map(const Dfg& d, const Layout& l) const {
    calls_->fetch_add(1, std::memory_order_relaxed);
    return inner_.map(d, l);
  }
  std::size_t calls() const { return calls_->load(); }
  void reset() const { calls_->store(0); }

 private:
  M inner_;
  std::shared_ptr<std::atomic<std::size_t>> calls_ = std::make_shared<std::atomic<std::size_t>>(0);
};

struct TestResult {
  bool feasible = false;
  // One per tested DFG, in input order; complete only when feasible.
  std::vector<Mapping> mappings;
  std::size_t mapper_calls = 0;
};

namespace detail {

template <DfgMapper M>
TestResult test_each(const Layout& layout, const std::vector<const Dfg*>& dfgs, const M& mapper,
                     int threads) {
  TestResult res;
  if (threads > 1 && dfgs.size() > 1) {
    std::vector<std::future<MapResult>> jobs;
    for (const Dfg* d : dfgs)
      jobs.push_back(std::async(std::launch::async, [&mapper, d, &layout] { return mapper.map(*d, layout); }));
    res.feasible = true;
    for (auto& j : jobs) {
      MapResult r = j.get();
      ++res.mapper_calls;
      res.feasible = res.feasible && r.ok();
      res.mappings.push_back(std::move(r.mapping));
    }
    if (!res.feasible) res.mappings.clear();
    return res;
  }
  for (const Dfg* d : dfgs) {
    MapResult r = mapper.map(*d, layout);
    ++res.mapper_calls;
    if (!r.ok()) {
      res.mappings.clear();
      return res;
    }
    res.mappings.push_back(std::move(r.mapping));
  }
  res.feasible = true;
  return res;
}

}  // namespace detail

/// Maps every DFG onto the layout one by one; feasible iff all map.
/// Stops at the first failure when running sequentially.
template <DfgMapper M>
TestResult test_layout(const Layout& layout, std::span<const Dfg> dfgs, const M& mapper,
                       int threads = 1) {
  std::vector<const Dfg*> all;
  for (const auto& d : dfgs) all.push_back(&d);
  return detail::test_each(layout, all, mapper, threads);
}

inline TestResult test_layout(const Layout& layout, std::span<const Dfg> dfgs,
                              const MapperConfig& cfg = {}) {
  return test_layout(layout, dfgs, ReferenceMapper(cfg), cfg.threads);
}

/// Re-maps only the DFGs that use a removed group. Valid when `layout`
/// differs from a known-feasible layout only by `removed`: the other DFGs
/// cannot observe the change.
template <DfgMapper M>
TestResult selective_test(const Layout& layout, GroupSet removed, std::span<const Dfg> dfgs,
                          const M& mapper, int threads = 1) {
  std::vector<const Dfg*> affected;
  for (const auto& d : dfgs)
    if (d.used_groups().intersects(removed)) affected.push_back(&d);
  TestResult res = detail::test_each(layout, affected, mapper, threads);
  res.mappings.clear();
  return res;
}

inline TestResult selective_test(const Layout& layout, GroupSet removed, std::span<const Dfg> dfgs,
                                 const MapperConfig& cfg = {}) {
  return selective_test(layout, removed, dfgs, ReferenceMapper(cfg), cfg.threads);
}

}  // namespace cgra
