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

#include <gtest/gtest.h>

#include <atomic>
#include <memory>

#include "test_util.hpp"

namespace cgra {
namespace {

const CostTable kCosts = CostTable::defaults();
const ReferenceMapper kMapper{MapperConfig{}};

// Wraps the reference mapper and records every layout that violates the
// group lower bound it was asked to map.
struct BoundCheckingMapper {
  MinGroups min;
  std::shared_ptr<std::atomic<int>> violations = std::make_shared<std::atomic<int>>(0);

  MapResult map(const Dfg& d, const Layout& l) const {
    if (!is_valid_candidate(l, min)) ++*violations;
    return kMapper.map(d, l);
  }
};

// Feasible iff cell `needed` still supports `group`.
struct CellGuardMapper {
  CellPos needed;
  OpGroup group;

  MapResult map(const Dfg&, const Layout& l) const {
    MapResult r;
    r.status = l.groups(needed).contains(group) ? MapStatus::Success : MapStatus::PlacementInfeasible;
    return r;
  }
};

TEST(RemovalOrder, DefaultCostsDescending) {
  EXPECT_EQ(removal_order(GroupSet::compute_groups(), kCosts),
            (std::vector<OpGroup>{OpGroup::Div, OpGroup::Other, OpGroup::Mult, OpGroup::FP, OpGroup::Arith}));
  EXPECT_EQ(removal_order(GroupSet{OpGroup::Arith, OpGroup::FP, OpGroup::Mem}, kCosts),
            (std::vector<OpGroup>{OpGroup::FP, OpGroup::Arith}));
}

TEST(RemovalOrder, TiesKeepGroupOrder) {
  CostTable flat = kCosts;
  for (auto& c : flat.area) c = Cost::parse("1");
  EXPECT_EQ(removal_order(GroupSet::compute_groups(), flat),
            (std::vector<OpGroup>{OpGroup::Arith, OpGroup::Div, OpGroup::FP, OpGroup::Mult, OpGroup::Other}));
}

TEST(ValidCandidate, Boundaries) {
  Layout l = create_full_layout(4, 4, GroupSet{OpGroup::Arith, OpGroup::Mult});
  MinGroups m;
  m[OpGroup::Arith] = 4;
  m[OpGroup::Mult] = 4;
  m[OpGroup::Mem] = 9;  // I/O demand never constrains compute cells
  EXPECT_TRUE(is_valid_candidate(l, m));
  l.set_groups({1, 1}, GroupSet{OpGroup::Arith});
  EXPECT_FALSE(is_valid_candidate(l, m));
  const auto& corpus = test::corpus();
  EXPECT_TRUE(is_valid_candidate(create_full_layout(10, 10, present_groups(corpus)), find_min_groups(corpus)));
}

TEST(FailChartType, CountsPerKey) {
  FailChart f;
  f.increment(GroupSet{OpGroup::Mult}, 3);
  f.increment(GroupSet{OpGroup::Mult}, 3);
  f.increment(GroupSet{OpGroup::Mult, OpGroup::FP}, 3);
  EXPECT_EQ(f.get(GroupSet{OpGroup::Mult}, 3), 2u);
  EXPECT_EQ(f.get(GroupSet{OpGroup::Mult}, 4), 0u);
  EXPECT_EQ(f.get(GroupSet{OpGroup::Mult, OpGroup::FP}, 3), 1u);
  f.clear();
  EXPECT_EQ(f.size(), 0u);
}

TEST(Queue, PopsBestFirstWithRowMajorTies) {
  detail::SubproblemQueue q;
  auto sub = [](int cost, std::size_t origin, GroupSet removed) {
    return Subproblem{{}, Cost::parse(std::to_string(cost)), removed, origin};
  };
  q.push(sub(5, 0, GroupSet{OpGroup::Arith}));
  q.push(sub(3, 2, GroupSet{OpGroup::FP}));
  q.push(sub(3, 1, GroupSet{OpGroup::FP}));
  q.push(sub(3, 1, GroupSet{OpGroup::Arith}));
  q.push(sub(9, 0, GroupSet{}));
  Subproblem a = q.pop(), b = q.pop(), c = q.pop();
  EXPECT_EQ(a.origin, 1u);
  EXPECT_EQ(a.removed, GroupSet{OpGroup::Arith});
  EXPECT_EQ(b.origin, 1u);
  EXPECT_EQ(b.removed, GroupSet{OpGroup::FP});
  EXPECT_EQ(c.origin, 2u);
  q.remove_if([](const Subproblem& s) { return s.cost > Cost::parse("6"); });
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q.pop().cost, Cost::parse("5"));
  EXPECT_TRUE(q.empty());
}

TEST(Opsg, SaturatedInitialEnqueuesNothing) {
  std::vector<Dfg> dfgs{parse_dfg("dfg x\nnode a ADD\nnode b ADD\nnode c ADD\nnode d ADD\n")};
  const Layout initial = create_full_layout(4, 4, GroupSet{OpGroup::Arith});
  SearchStats stats;
  SearchConfig cfg;
  auto [best, tested] = run_opsg(initial, dfgs, find_min_groups(dfgs), kCosts, cfg, kMapper, 100, stats);
  EXPECT_EQ(best, initial);
  EXPECT_EQ(tested, 0u);
  EXPECT_EQ(stats.expanded, 0u);
}

TEST(Opsg, RoundQueuesShareOneCost) {
  const auto dfgs = load_dfg_dir(test::fixture_dir("heatmap_fallback"));
  SearchConfig cfg;
  const ExplorerResult r = run_explorer(dfgs, 6, 6, kCosts, cfg, kMapper);
  ASSERT_FALSE(r.stats.opsg_rounds.empty());
  for (const auto& round : r.stats.opsg_rounds) {
    if (round.enqueued == 0) continue;
    EXPECT_EQ(round.min_cost, round.max_cost);
  }
}

TEST(Opsg, FailCapSkipsFourthAttemptWithoutMapperCall) {
  // Mult on (2,3), (2,4) and row 3; only (2,3) is essential.
  std::vector<Dfg> dfgs{parse_dfg("dfg m\nnode a MUL\n")};
  Layout initial(5, 6);
  for (CellPos p : {CellPos{2, 3}, CellPos{2, 4}, CellPos{3, 1}, CellPos{3, 2}, CellPos{3, 3}, CellPos{3, 4}})
    initial.set_groups(p, GroupSet{OpGroup::Mult});
  CountingMapper counter(CellGuardMapper{{2, 3}, OpGroup::Mult});
  SearchConfig cfg;
  cfg.l_fail = 3;
  SearchStats stats;
  auto [best, tested] = run_opsg(initial, dfgs, find_min_groups(dfgs), kCosts, cfg, counter, 100, stats);

  // Three rounds fail on (2,3) before succeeding elsewhere; later rounds skip it.
  std::size_t fails_at_23 = 0;
  for (const auto& rec : stats.log) {
    if (rec.cell == CellPos{2, 3}) {
      EXPECT_EQ(rec.verdict, Verdict::Fail);
      ++fails_at_23;
    }
  }
  EXPECT_EQ(fails_at_23, 3u);
  EXPECT_EQ(stats.capped, 2u);
  EXPECT_EQ(tested, 8u);
  EXPECT_EQ(counter.calls(), 8u);
  EXPECT_EQ(stats.mapper_calls, 8u);
  EXPECT_EQ(census(best).counts[OpGroup::Mult], 1u);
  EXPECT_TRUE(best.groups({2, 3}).contains(OpGroup::Mult));
}

TEST(Gsg, SubsetEnumerationPerCell) {
  std::vector<Dfg> dfgs{parse_dfg("dfg io\nnode l LOAD\nnode s STORE\nedge l s\n")};
  Layout initial(3, 3);
  initial.set_groups({1, 1}, GroupSet{OpGroup::Arith, OpGroup::FP});
  SearchConfig cfg;
  cfg.gsg_rounds = 1;
  SearchStats stats;
  const Layout best = run_gsg(initial, dfgs, find_min_groups(dfgs), kCosts, cfg, kMapper, 100, stats);
  EXPECT_EQ(stats.expanded, 3u);  // {Arith}, {FP}, {Arith,FP}
  EXPECT_EQ(stats.tested, 1u);    // the cheapest succeeds and nothing cheaper remains
  EXPECT_TRUE(best.groups({1, 1}).empty());
}

TEST(Gsg, NeverWorseThanOpsgNeverBetterThanOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto dfgs = test::random_dfgs(seed, 2, 3);
    SearchConfig cfg;
    ExplorerResult r;
    try {
      r = run_explorer(dfgs, 4, 4, kCosts, cfg, kMapper);
    } catch (const InfeasibleError&) {
      continue;
    }
    const OracleResult o = oracle_enumerate(dfgs, 4, 4, kCosts, kMapper);
    ASSERT_TRUE(o.best);
    EXPECT_LE(layout_cost(r.best, kCosts), layout_cost(r.opsg_best, kCosts));
    EXPECT_GE(layout_cost(r.best, kCosts), o.best_cost);
  }
}

TEST(Explorer, BoundDisciplineOnCorpus) {
  const auto& corpus = test::corpus();
  BoundCheckingMapper checker{find_min_groups(corpus)};
  CountingMapper counter(checker);
  SearchConfig cfg;
  cfg.l_test = 120;
  const ExplorerResult r = run_explorer(corpus, 10, 10, kCosts, cfg, counter);
  EXPECT_EQ(*checker.violations, 0);
  EXPECT_LE(r.stats.tested, 120u);
  EXPECT_EQ(counter.calls(), r.stats.mapper_calls);
  for (std::size_t i = 1; i < r.stats.trace.size(); ++i) EXPECT_LT(r.stats.trace[i].cost, r.stats.trace[i - 1].cost);
  std::size_t calls = 0;
  for (const auto& rec : r.stats.log) {
    if (rec.verdict == Verdict::Capped) {
      EXPECT_EQ(rec.mapper_calls, calls);
    }
    calls = rec.mapper_calls;
  }
  EXPECT_TRUE(test_layout(r.best, corpus).feasible);
}

TEST(Explorer, NoGsgReturnsOpsgBest) {
  const auto dfgs = load_dfg_dir(test::fixture_dir("heatmap_fallback"));
  SearchConfig cfg;
  cfg.run_gsg = false;
  const ExplorerResult r = run_explorer(dfgs, 6, 6, kCosts, cfg, kMapper);
  EXPECT_EQ(r.best, r.opsg_best);
  EXPECT_TRUE(r.stats.gsg_skipped);
  EXPECT_EQ(r.stats.gsg_seconds, 0.0);
}

TEST(Explorer, ZeroBudgetKeepsInitial) {
  const auto dfgs = load_dfg_dir(test::fixture_dir("heatmap_fallback"));
  SearchConfig cfg;
  cfg.l_test = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  const ExplorerResult r = run_explorer(dfgs, 6, 6, kCosts, cfg, kMapper);
  EXPECT_EQ(r.best, r.initial.layout);
  EXPECT_EQ(r.stats.tested, 0u);
}

TEST(Explorer, DefaultBudgetScalesWithComputeCells) {
  EXPECT_EQ(default_test_budget(64), 2000u);
  EXPECT_EQ(default_test_budget(128), 4000u);
  EXPECT_EQ(default_test_budget(1), 32u);
}

TEST(Explorer, Deterministic) {
  const auto dfgs = load_dfg_dir(test::fixture_dir("heatmap_fallback"));
  SearchConfig cfg;
  const ExplorerResult a = run_explorer(dfgs, 6, 6, kCosts, cfg, kMapper);
  const ExplorerResult b = run_explorer(dfgs, 6, 6, kCosts, cfg, kMapper);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(search_csv(a.stats), search_csv(b.stats));
}

TEST(Oracle, SingleAddKeepsOneArith) {
  std::vector<Dfg> dfgs{parse_dfg("dfg one\nnode a ADD\n")};
  const OracleResult o = oracle_enumerate(dfgs, 4, 4, kCosts, kMapper);
  ASSERT_TRUE(o.best);
  EXPECT_EQ(census(*o.best).counts[OpGroup::Arith], 1u);
  EXPECT_EQ(o.best_cost.str(), "39");
  EXPECT_EQ(o.layouts, 16u);
  EXPECT_EQ(o.feasible, 15u);
}

TEST(Oracle, InfeasibleDemand) {
  std::vector<Dfg> dfgs{parse_dfg("dfg five\nnode a ADD\nnode b ADD\nnode c ADD\nnode d ADD\nnode e ADD\n")};
  const OracleResult o = oracle_enumerate(dfgs, 4, 4, kCosts, kMapper);
  EXPECT_FALSE(o.best);
  EXPECT_EQ(o.feasible, 0u);
}

TEST(Oracle, GuardsStateSpace) {
  std::vector<Dfg> dfgs{parse_dfg("dfg one\nnode a ADD\n")};
  EXPECT_THROW(oracle_enumerate(dfgs, 5, 5, kCosts, kMapper), ValidationError);
  std::vector<Dfg> wide{parse_dfg("dfg w\nnode a ADD\nnode b MUL\nnode c FADD\nnode d FDIV\n")};
  EXPECT_THROW(oracle_enumerate(wide, 4, 4, kCosts, kMapper), ValidationError);
}

// Nothing pruned by the lower bound is feasible, checked exhaustively.
TEST(Oracle, MinGroupsPruningIsSound) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto dfgs = test::random_dfgs(seed, 2, 3);
    const MinGroups min = find_min_groups(dfgs);
    oracle_enumerate(dfgs, 4, 4, kCosts, kMapper, [&](const Layout& l, bool feasible) {
      if (!is_valid_candidate(l, min)) {
        EXPECT_FALSE(feasible);
      }
    });
  }
}

}  // namespace
}  // namespace cgra
