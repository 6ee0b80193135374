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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cgra/cost.hpp"
#include "cgra/cost_model.hpp"
#include "cgra/dfg.hpp"
#include "cgra/heatmap.hpp"
#include "cgra/layout.hpp"
#include "cgra/mapper.hpp"

namespace cgra {

struct SearchConfig {
  // Mapper-validated subproblems across both phases. Unset means
  // default_test_budget(N_t).
  std::optional<std::size_t> l_test;
  // A (removed groups, cell) pair that failed this often is no longer tested.
  std::size_t l_fail = 3;
  int gsg_rounds = 2;
  // After this many consecutive failed GSG tests, drop queued subproblems
  // costing more than (1 + trim_fraction) * best.
  std::size_t trim_streak = 50;
  double trim_fraction = 0.10;
  bool run_gsg = true;
  int threads = 1;

  void validate() const {
    if (l_test && *l_test == 0) throw ValidationError("L_test must be positive");
    if (l_fail < 1) throw ValidationError("L_fail must be at least 1");
    if (gsg_rounds < 0) throw ValidationError("gsg_rounds must be non-negative");
    if (trim_fraction < 0) throw ValidationError("trim fraction must be non-negative");
  }
};

// 2000 tests for an 8x8 interior, scaled linearly with the compute-cell count.
inline std::size_t default_test_budget(std::size_t compute_cells) {
  return std::max<std::size_t>(1, (2000 * compute_cells + 63) / 64);
}

enum class Phase { Opsg, Gsg };
enum class Verdict { Pass, Fail, Capped };

inline const char* phase_name(Phase p) { return p == Phase::Opsg ? "opsg" : "gsg"; }
inline const char* verdict_name(Verdict v) {
  return v == Verdict::Pass ? "pass" : v == Verdict::Fail ? "fail" : "capped";
}

// One popped candidate that was tested (or skipped by the fail cap).
struct SearchRecord {
  std::size_t seq = 0;
  Phase phase = Phase::Opsg;
  int round = 0;
  Cost cost;
  GroupSet removed;
  CellPos cell;
  Verdict verdict = Verdict::Fail;
  std::size_t mapper_calls = 0;  // cumulative, after this record
  double elapsed_ms = 0.0;
};

struct TracePoint {
  std::size_t tested = 0;
  double elapsed_ms = 0.0;
  Cost cost;
  Phase phase = Phase::Opsg;
};

struct OpsgRound {
  OpGroup group = OpGroup::Arith;
  std::size_t enqueued = 0;
  Cost min_cost;
  Cost max_cost;
  bool improved = false;
};

/// S_exp counts enqueued subproblems, S_tst counts mapper-validated ones.
struct SearchStats {
  std::size_t expanded = 0;
  std::size_t tested = 0;
  // Candidates skipped because their (removed, cell) pair hit L_fail.
  std::size_t capped = 0;
  std::size_t mapper_calls = 0;
  std::size_t peak_queue = 0;
  double opsg_seconds = 0.0;
  double gsg_seconds = 0.0;
  bool gsg_skipped = false;
  std::vector<OpGroup> removal_order;
  std::vector<OpsgRound> opsg_rounds;
  std::vector<TracePoint> trace;
  std::vector<SearchRecord> log;
};

/// Counts failed removals keyed by (removed group set, cell).
class FailChart {
 public:
  std::size_t get(GroupSet removed, std::size_t cell) const {
    auto it = counts_.find({removed.bits(), cell});
    return it == counts_.end() ? 0 : it->second;
  }
  void increment(GroupSet removed, std::size_t cell) { ++counts_[{removed.bits(), cell}]; }
  void clear() { counts_.clear(); }
  std::size_t size() const { return counts_.size(); }

 private:
  std::map<std::pair<std::uint8_t, std::size_t>, std::size_t> counts_;
};

/// A candidate layout as the per-compute-cell group grid (row-major over the
/// interior), its cached area cost and how it was derived from its parent.
struct Subproblem {
  std::vector<GroupSet> groups;
  Cost cost;
  GroupSet removed;
  std::size_t origin = 0;  // compute-cell index
};

inline bool satisfies_min_groups(const GroupCounts& counts, const MinGroups& min_groups) {
  for (OpGroup g : kComputeGroups)
    if (counts[g] < min_groups[g]) return false;
  return true;
}

inline bool is_valid_candidate(const Layout& layout, const MinGroups& min_groups) {
  return satisfies_min_groups(census(layout).counts, min_groups);
}

// Compute groups in descending cost order; ties keep enum order.
inline std::vector<OpGroup> removal_order(GroupSet groups, const CostTable& costs) {
  std::vector<OpGroup> order;
  for (OpGroup g : kComputeGroups)
    if (groups.contains(g)) order.push_back(g);
  std::stable_sort(order.begin(), order.end(), [&](OpGroup a, OpGroup b) {
    return costs.group_cost(a) > costs.group_cost(b);
  });
  return order;
}

namespace detail {

// Base layout plus conversions between Layout and interior group grids.
class SearchSpace {
 public:
  SearchSpace(const Layout& base, const CostTable& costs) : base_(base), costs_(costs) {
    cells_ = base.compute_cells();
  }

  std::size_t size() const { return cells_.size(); }
  CellPos cell(std::size_t i) const { return cells_[i]; }
  const CostTable& costs() const { return costs_; }

  Subproblem from_layout(const Layout& l) const {
    Subproblem s;
    for (CellPos p : cells_) s.groups.push_back(l.groups(p));
    s.cost = layout_cost(l, costs_);
    return s;
  }

  Layout materialize(const std::vector<GroupSet>& groups) const {
    Layout l = base_;
    for (std::size_t i = 0; i < cells_.size(); ++i) l.set_groups(cells_[i], groups[i]);
    return l;
  }

  static GroupCounts counts(const std::vector<GroupSet>& groups) {
    GroupCounts c;
    for (GroupSet s : groups)
      for (OpGroup g : s.members()) ++c[g];
    return c;
  }

  Cost removal_cost(GroupSet removed) const {
    Cost c;
    for (OpGroup g : removed.members()) c += costs_.group_cost(g);
    return c;
  }

 private:
  Layout base_;
  const CostTable& costs_;
  std::vector<CellPos> cells_;
};

// Min-heap on (cost, origin cell, removed bits, insertion order).
class SubproblemQueue {
 public:
  void push(Subproblem s) {
    heap_.push_back({std::move(s), next_seq_++});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
  }
  Subproblem pop() {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Subproblem s = std::move(heap_.back().sub);
    heap_.pop_back();
    return s;
  }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  template <class Pred>
  void remove_if(Pred pred) {
    std::erase_if(heap_, [&](const Entry& e) { return pred(e.sub); });
    std::make_heap(heap_.begin(), heap_.end(), Later{});
  }

 private:
  struct Entry {
    Subproblem sub;
    std::size_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.sub.cost != b.sub.cost) return a.sub.cost > b.sub.cost;
      if (a.sub.origin != b.sub.origin) return a.sub.origin > b.sub.origin;
      if (a.sub.removed.bits() != b.sub.removed.bits()) return a.sub.removed.bits() > b.sub.removed.bits();
      return a.seq > b.seq;
    }
  };
  std::vector<Entry> heap_;
  std::size_t next_seq_ = 0;
};

inline std::string grid_key(const std::vector<GroupSet>& groups) {
  std::string key(groups.size(), '\0');
  for (std::size_t i = 0; i < groups.size(); ++i) key[i] = static_cast<char>(groups[i].bits());
  return key;
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace detail

struct OpsgResult {
  Layout best;
  std::size_t num_tested = 0;
};

/// Operation-based phase. For each group, costliest first, repeatedly
/// enqueue every single-instance removal of that group from the current
/// best (row-major), selectively test in best-first order and restart the
/// round on the first success. A group is done when a round yields no
/// improvement; the whole phase stops once `l_test` tests have been spent.
template <DfgMapper M>
OpsgResult run_opsg(const Layout& initial, std::span<const Dfg> dfgs, const MinGroups& min_groups,
                    const CostTable& costs, const SearchConfig& cfg, const M& mapper,
                    std::size_t l_test, SearchStats& stats) {
  detail::Clock clock;
  detail::SearchSpace space(initial, costs);
  Subproblem best = space.from_layout(initial);
  std::size_t tested = stats.tested;
  if (stats.trace.empty()) stats.trace.push_back({tested, 0.0, best.cost, Phase::Opsg});

  // Persists across rounds: a removal that keeps failing is not retried.
  FailChart fails;
  stats.removal_order = removal_order(present_groups(dfgs), costs);
  int round = 0;
  for (OpGroup g : stats.removal_order) {
    const GroupSet removed{g};
    const Cost delta = costs.group_cost(g);
    while (tested < l_test) {
      ++round;
      detail::SubproblemQueue pq;
      GroupCounts counts = detail::SearchSpace::counts(best.groups);
      OpsgRound info{g, 0, best.cost - delta, best.cost - delta, false};
      if (counts[g] > min_groups[g]) {
        for (std::size_t i = 0; i < space.size(); ++i) {
          if (!best.groups[i].contains(g)) continue;
          if (fails.get(removed, i) >= cfg.l_fail) {
            ++stats.capped;
            continue;
          }
          Subproblem child{best.groups, best.cost - delta, removed, i};
          child.groups[i].erase(g);
          info.min_cost = std::min(info.min_cost, child.cost);
          info.max_cost = std::max(info.max_cost, child.cost);
          pq.push(std::move(child));
          ++info.enqueued;
          ++stats.expanded;
        }
      }
      stats.peak_queue = std::max(stats.peak_queue, pq.size());
      bool improved = false;
      while (!pq.empty() && tested < l_test && !improved) {
        Subproblem cur = pq.pop();
        if (!(cur.cost < best.cost)) continue;
        ++tested;
        TestResult r = selective_test(space.materialize(cur.groups), removed, dfgs, mapper, cfg.threads);
        stats.mapper_calls += r.mapper_calls;
        stats.log.push_back({stats.log.size(), Phase::Opsg, round, cur.cost, removed, space.cell(cur.origin),
                             r.feasible ? Verdict::Pass : Verdict::Fail, stats.mapper_calls, clock.ms()});
        if (r.feasible) {
          best = std::move(cur);
          improved = true;
          stats.trace.push_back({tested, clock.ms(), best.cost, Phase::Opsg});
        } else {
          fails.increment(removed, cur.origin);
        }
      }
      info.improved = improved;
      stats.opsg_rounds.push_back(info);
      if (!improved) break;
    }
  }
  stats.tested = tested;
  stats.opsg_seconds += clock.ms() / 1000.0;
  return {space.materialize(best.groups), tested};
}

/// General phase. Subproblems remove any non-empty subset of one cell's
/// groups; everything cheaper than the bound is tested against all DFGs,
/// unless its (removed, cell) pair has already failed `l_fail` times. A
/// success becomes the new bound and clears the fail chart; a failure is
/// not expanded. Popped nodes at or above the bound are expanded untested,
/// enqueueing only children below it. Runs `gsg_rounds` times, each seeded
/// with the running best.
template <DfgMapper M>
Layout run_gsg(const Layout& initial, std::span<const Dfg> dfgs, const MinGroups& min_groups,
               const CostTable& costs, const SearchConfig& cfg, const M& mapper, std::size_t l_test,
               SearchStats& stats) {
  detail::Clock clock;
  detail::SearchSpace space(initial, costs);
  Subproblem best = space.from_layout(initial);
  std::size_t tested = stats.tested;
  if (stats.trace.empty()) stats.trace.push_back({tested, 0.0, best.cost, Phase::Gsg});

  for (int round = 1; round <= cfg.gsg_rounds && tested < l_test; ++round) {
    FailChart fails;
    std::unordered_set<std::string> seen;
    detail::SubproblemQueue pq;
    seen.insert(detail::grid_key(best.groups));

    auto expand = [&](const Subproblem& node) {
      const GroupCounts counts = detail::SearchSpace::counts(node.groups);
      for (std::size_t i = 0; i < space.size(); ++i) {
        const std::uint8_t have = node.groups[i].bits();
        // Non-empty submasks of the cell's groups, ascending.
        for (unsigned sub = 1; sub <= have; ++sub) {
          if ((sub & have) != sub) continue;
          const GroupSet removed = GroupSet::from_bits(static_cast<std::uint8_t>(sub));
          bool valid = true;
          for (OpGroup g : removed.members()) valid = valid && counts[g] > min_groups[g];
          if (!valid) continue;
          if (fails.get(removed, i) >= cfg.l_fail) {
            ++stats.capped;
            continue;
          }
          const Cost child_cost = node.cost - space.removal_cost(removed);
          // Children at or above the bound would only ever be expanded, never tested.
          if (!(child_cost < best.cost)) continue;
          Subproblem child{node.groups, child_cost, removed, i};
          child.groups[i] = child.groups[i] - removed;
          if (!seen.insert(detail::grid_key(child.groups)).second) continue;
          pq.push(std::move(child));
          ++stats.expanded;
        }
      }
      stats.peak_queue = std::max(stats.peak_queue, pq.size());
    };

    expand(best);
    std::size_t streak = 0;
    while (!pq.empty() && tested < l_test) {
      Subproblem cur = pq.pop();
      if (cur.cost < best.cost) {
        bool ok = false;
        if (fails.get(cur.removed, cur.origin) < cfg.l_fail) {
          TestResult r = test_layout(space.materialize(cur.groups), dfgs, mapper, cfg.threads);
          ++tested;
          stats.mapper_calls += r.mapper_calls;
          ok = r.feasible;
          stats.log.push_back({stats.log.size(), Phase::Gsg, round, cur.cost, cur.removed,
                               space.cell(cur.origin), ok ? Verdict::Pass : Verdict::Fail,
                               stats.mapper_calls, clock.ms()});
        } else {
          ++stats.capped;
          stats.log.push_back({stats.log.size(), Phase::Gsg, round, cur.cost, cur.removed,
                               space.cell(cur.origin), Verdict::Capped, stats.mapper_calls, clock.ms()});
        }
        if (ok) {
          fails.clear();
          best = cur;
          streak = 0;
          stats.trace.push_back({tested, clock.ms(), best.cost, Phase::Gsg});
        } else {
          fails.increment(cur.removed, cur.origin);
          if (++streak >= cfg.trim_streak) {
            const double limit = static_cast<double>(best.cost.ticks()) * (1.0 + cfg.trim_fraction);
            pq.remove_if([&](const Subproblem& s) { return static_cast<double>(s.cost.ticks()) > limit; });
            streak = 0;
          }
          continue;
        }
      }
      expand(cur);
    }
  }
  stats.tested = tested;
  stats.gsg_seconds += clock.ms() / 1000.0;
  return space.materialize(best.groups);
}

struct ExplorerResult {
  GroupSet present;
  MinGroups min_groups;
  InitialLayout initial;
  Layout opsg_best;
  Layout best;
  std::size_t l_test = 0;
  SearchStats stats;
  // Mappings of every DFG on `best`, from the final verification run.
  std::vector<Mapping> final_mappings;

  const Layout& full() const { return initial.heatmap.full; }
};

/// Whole pipeline: lower bounds, initial layout, OPSG, optional GSG, and a
/// fresh feasibility check of the result.
template <DfgMapper M>
ExplorerResult run_explorer(std::span<const Dfg> dfgs, int rows, int cols, const CostTable& costs,
                      const SearchConfig& cfg, const M& mapper) {
  ExplorerResult out;
  out.present = present_groups(dfgs);
  out.min_groups = find_min_groups(dfgs);
  out.initial = choose_initial_layout(dfgs, rows, cols, mapper, cfg.threads);
  out.stats.mapper_calls = out.initial.mapper_calls;
  if (!is_valid_candidate(out.full(), out.min_groups)) {
    throw std::logic_error("full layout violates the group lower bound although it maps");
  }
  out.l_test = cfg.l_test.value_or(default_test_budget(out.full().num_compute()));

  auto [opsg_best, tested] =
      run_opsg(out.initial.layout, dfgs, out.min_groups, costs, cfg, mapper, out.l_test, out.stats);
  out.opsg_best = opsg_best;
  if (cfg.run_gsg) {
    out.best = run_gsg(out.opsg_best, dfgs, out.min_groups, costs, cfg, mapper, out.l_test, out.stats);
  } else {
    out.best = out.opsg_best;
    out.stats.gsg_skipped = true;
  }

  TestResult verify = test_layout(out.best, dfgs, mapper, cfg.threads);
  out.stats.mapper_calls += verify.mapper_calls;
  if (!verify.feasible) throw std::logic_error("final layout failed re-verification");
  out.final_mappings = std::move(verify.mappings);
  return out;
}

inline ExplorerResult run_explorer(std::span<const Dfg> dfgs, int rows, int cols, const CostTable& costs,
                             const SearchConfig& cfg, const MapperConfig& mcfg = {}) {
  return run_explorer(dfgs, rows, cols, costs, cfg, ReferenceMapper(mcfg));
}

struct OracleResult {
  std::optional<Layout> best;
  Cost best_cost;
  std::size_t layouts = 0;
  std::size_t feasible = 0;
};

/// Exhaustively tests every assignment of group subsets to compute cells
/// and returns the cheapest feasible layout under the given mapper. Only
/// for tiny instances: at most 4 compute cells and 3 groups.
template <DfgMapper M, class Visitor>
OracleResult oracle_enumerate(std::span<const Dfg> dfgs, int rows, int cols, const CostTable& costs,
                              const M& mapper, Visitor&& visit) {
  const Layout base(rows, cols);
  const GroupSet present = present_groups(dfgs) - GroupSet{OpGroup::Mem};
  const auto cells = base.compute_cells();
  if (cells.size() > 4 || present.size() > 3) {
    throw ValidationError("oracle state space too large (needs <= 4 compute cells and <= 3 groups)");
  }
  std::vector<std::uint8_t> subsets;
  for (unsigned m = 0; m <= present.bits(); ++m)
    if ((m & present.bits()) == m) subsets.push_back(static_cast<std::uint8_t>(m));

  OracleResult out;
  std::vector<std::size_t> digit(cells.size(), 0);
  while (true) {
    Layout l = base;
    for (std::size_t i = 0; i < cells.size(); ++i) l.set_groups(cells[i], GroupSet::from_bits(subsets[digit[i]]));
    const bool ok = test_layout(l, dfgs, mapper).feasible;
    ++out.layouts;
    visit(static_cast<const Layout&>(l), ok);
    if (ok) {
      ++out.feasible;
      const Cost c = layout_cost(l, costs);
      if (!out.best || c < out.best_cost) {
        out.best = l;
        out.best_cost = c;
      }
    }
    std::size_t k = 0;
    while (k < digit.size() && ++digit[k] == subsets.size()) digit[k++] = 0;
    if (k == digit.size()) break;
  }
  return out;
}

template <DfgMapper M>
OracleResult oracle_enumerate(std::span<const Dfg> dfgs, int rows, int cols, const CostTable& costs,
                              const M& mapper) {
  return oracle_enumerate(dfgs, rows, cols, costs, mapper, [](const Layout&, bool) {});
}

}  // namespace cgra
