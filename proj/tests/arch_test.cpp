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

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

namespace cgra {
namespace {

const CostTable kCosts = CostTable::defaults();

TEST(FullLayout, SmallestInterior) {
  Layout l = create_full_layout(4, 4, GroupSet{OpGroup::Arith});
  EXPECT_EQ(l.num_compute(), 4u);
  EXPECT_EQ(l.num_io(), 12u);
  for (CellPos p : l.compute_cells()) EXPECT_EQ(l.groups(p), GroupSet{OpGroup::Arith});
  const auto c = census(l);
  EXPECT_EQ(c.compute_cells, 4u);
  EXPECT_EQ(c.counts[OpGroup::Arith], 4u);
  EXPECT_EQ(c.instances(), 4u);
}

TEST(FullLayout, TenByTen) {
  Layout l = create_full_layout(10, 10, GroupSet::compute_groups());
  EXPECT_EQ(l.num_compute(), 64u);
  EXPECT_EQ(l.num_io(), 36u);
  for (std::size_t i = 0; i < l.num_cells(); ++i) {
    const CellPos p = l.pos(i);
    EXPECT_EQ(l.kind(p), (p.r == 0 || p.c == 0 || p.r == 9 || p.c == 9) ? CellKind::IO : CellKind::Compute);
    EXPECT_EQ(l.fifo(p), kFullFifo);
  }
}

TEST(FullLayout, AbsentGroupsAreAbsent) {
  Layout l = create_full_layout(6, 6, GroupSet{OpGroup::Arith, OpGroup::Mem, OpGroup::FP});
  EXPECT_EQ(census(l).counts[OpGroup::Div], 0u);
  for (CellPos p : l.compute_cells()) EXPECT_FALSE(l.groups(p).contains(OpGroup::Mem));
}

TEST(FullLayout, TooSmallRejected) {
  EXPECT_THROW(create_full_layout(2, 5, GroupSet{OpGroup::Arith}), ValidationError);
  EXPECT_THROW(Layout(5, 2), ValidationError);
  EXPECT_NO_THROW(Layout(3, 3));
}

TEST(LayoutInvariants, IoCarriesNoGroupsComputeNoMem) {
  Layout l(4, 4);
  EXPECT_THROW(l.set_groups({0, 1}, GroupSet{OpGroup::Arith}), ValidationError);
  EXPECT_THROW(l.set_groups({1, 1}, GroupSet{OpGroup::Mem}), ValidationError);
  EXPECT_NO_THROW(l.set_groups({0, 1}, GroupSet{}));
}

TEST(LayoutCost, WorkedExample) {
  Layout l(4, 4);
  const auto cells = l.compute_cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    l.set_groups(cells[i], i < 2 ? GroupSet{OpGroup::Arith, OpGroup::FP} : GroupSet{OpGroup::Arith});
  EXPECT_EQ(layout_cost(l, kCosts), Cost::parse("50.8"));
  EXPECT_EQ(layout_cost(l, kCosts).str(), "50.8");
}

TEST(LayoutCost, EmptyCellsOnly) {
  for (int n : {3, 4, 7, 10}) {
    Layout l(n, n);
    EXPECT_EQ(layout_cost(l, kCosts), static_cast<std::int64_t>(l.num_compute()) * Cost::parse("9.5"));
  }
}

TEST(LayoutCost, FullEightByEightInterior) {
  Layout l = create_full_layout(10, 10, GroupSet::compute_groups());
  EXPECT_EQ(layout_cost(l, kCosts).str(), "3225.6");
  EXPECT_EQ(layout_cost(l, kCosts, Metric::Power).str(), "3225.6");
  // 36 I/O cells at 11.9 each.
  EXPECT_EQ(layout_cost(l, kCosts, Metric::Area, true).str(), "3654");
}

TEST(LayoutCost, IoCostDropsWithPrunedPorts) {
  Layout l(3, 3);
  const Cost before = layout_cost(l, kCosts, Metric::Area, true);
  l.set_fifo({0, 0}, 0b0011);
  EXPECT_EQ(before - layout_cost(l, kCosts, Metric::Area, true), 2 * kCosts.fifo_port_cost());
  EXPECT_EQ(layout_cost(l, kCosts), Cost::parse("9.5"));
}

TEST(LayoutCost, MatchesRecountOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    Layout l = test::random_layout(rng, 3 + static_cast<int>(rng() % 8), 3 + static_cast<int>(rng() % 8));
    const std::string text = serialize_layout(l);
    for (bool io : {false, true}) {
      const auto oracle = oracle::recount_layout(text, io);
      EXPECT_EQ(layout_cost(l, kCosts, Metric::Area, io).ticks(), oracle.cost_ticks);
    }
  }
}

TEST(LayoutCost, RemovalIsLinear) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    Layout l = test::random_layout(rng, 6, 7);
    for (CellPos p : l.compute_cells()) {
      for (OpGroup g : l.groups(p).members()) {
        Layout k = l;
        k.set_groups(p, l.groups(p) - GroupSet{g});
        EXPECT_EQ(layout_cost(l, kCosts) - layout_cost(k, kCosts), kCosts.group_cost(g));
        EXPECT_LT(layout_cost(k, kCosts), layout_cost(l, kCosts));
      }
    }
  }
}

TEST(LayoutCost, FullIsMaximalAmongReachable) {
  const Layout full = create_full_layout(6, 6, GroupSet::compute_groups());
  std::mt19937_64 rng(13);
  for (int i = 0; i < 40; ++i) {
    Layout l = test::random_layout(rng, 6, 6, GroupSet::compute_groups(), false);
    ASSERT_TRUE(groups_subset_of(l, full));
    EXPECT_LE(layout_cost(l, kCosts), layout_cost(full, kCosts));
    EXPECT_EQ(layout_cost(l, kCosts) == layout_cost(full, kCosts), l == full);
  }
}

TEST(Census, SingleRemovalDecrements) {
  Layout l = create_full_layout(4, 4, GroupSet{OpGroup::Arith});
  l.set_groups({1, 2}, GroupSet{});
  EXPECT_EQ(census(l).counts[OpGroup::Arith], 3u);
}

TEST(Census, MatchesRecountOracle) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 50; ++i) {
    Layout l = test::random_layout(rng, 3 + static_cast<int>(rng() % 8), 3 + static_cast<int>(rng() % 8));
    const auto c = census(l);
    const auto oracle = oracle::recount_layout(serialize_layout(l));
    EXPECT_EQ(c.compute_cells, oracle.compute_cells);
    for (OpGroup g : kComputeGroups) {
      auto it = oracle.instances.find(std::string(group_name(g)));
      EXPECT_EQ(c.counts[g], it == oracle.instances.end() ? 0u : it->second);
      EXPECT_LE(c.counts[g], c.compute_cells);
    }
  }
}

TEST(LayoutFile, RoundTrips) {
  const Layout full = create_full_layout(10, 10, GroupSet::compute_groups());
  EXPECT_EQ(parse_layout(serialize_layout(full)), full);
  std::mt19937_64 rng(15);
  for (int i = 0; i < 50; ++i) {
    Layout l = test::random_layout(rng, 3 + static_cast<int>(rng() % 6), 3 + static_cast<int>(rng() % 6));
    const std::string text = serialize_layout(l);
    const Layout back = parse_layout(text);
    EXPECT_EQ(back, l);
    EXPECT_EQ(serialize_layout(back), text);
  }
}

TEST(LayoutFile, DimensionMismatch) {
  // A valid 3x3 file plus a tenth record.
  std::string text = serialize_layout(Layout(3, 3)) + "cell 1 1 COMPUTE groups=- fifo=1111\n";
  try {
    parse_layout(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos) << e.what();
  }
  std::string four = serialize_layout(Layout(4, 4));
  four.replace(four.find("layout 4 4"), 10, "layout 3 3");
  try {
    parse_layout(four);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos);
  }
  std::string few = serialize_layout(Layout(3, 3));
  few.erase(few.rfind("cell"));
  EXPECT_THROW(parse_layout(few), ParseError);
}

TEST(LayoutFile, Malformed) {
  EXPECT_THROW(parse_layout("cell 0 0 IO groups=- fifo=1111\n"), ParseError);
  EXPECT_THROW(parse_layout("layout 2 2\n"), ParseError);
  std::string t = serialize_layout(Layout(3, 3));
  std::string bad = t;
  bad.replace(bad.find("cell 1 1 COMPUTE"), 16, "cell 1 1 IO");
  EXPECT_THROW(parse_layout(bad), ParseError);
  bad = t;
  bad.replace(bad.find("cell 1 1 COMPUTE groups=-"), 25, "cell 1 1 COMPUTE groups=Mem");
  EXPECT_THROW(parse_layout(bad), ParseError);
  bad = t;
  bad.replace(bad.find("fifo=1111"), 9, "fifo=11x1");
  EXPECT_THROW(parse_layout(bad), ParseError);
}

TEST(CostTableDefaults, MatchComponentTable) {
  const char* expect[] = {"1", "4.4", "6.2", "17", "12.3", "4.9", "4.6", "11.9"};
  for (std::size_t i = 0; i < kNumComponents; ++i) {
    EXPECT_EQ(kCosts.area[i].str(), expect[i]) << kComponentNames[i];
    EXPECT_EQ(kCosts.power[i], kCosts.area[i]);
  }
  EXPECT_EQ(kCosts.fifo_port_cost().str(), "1.225");
}

TEST(CostTableDefaults, PowerScale) {
  const CostTable t = CostTable::defaults(0.5);
  EXPECT_EQ(t.get(Component::Div, Metric::Power).str(), "8.5");
  EXPECT_EQ(t.get(Component::Div, Metric::Area).str(), "17");
}

TEST(CostTableFile, ShippedFileEqualsDefaults) {
  const CostTable t = CostTable::load((test::source_dir() / "config" / "costs.txt").string());
  EXPECT_EQ(t.area, kCosts.area);
  EXPECT_EQ(t.power, kCosts.power);
}

TEST(CostTableFile, Errors) {
  EXPECT_THROW(CostTable::parse(*std::make_unique<std::istringstream>("Bogus 1 1\n")), ParseError);
  EXPECT_THROW(CostTable::parse(*std::make_unique<std::istringstream>("Arith -1 1\n")), ParseError);
  EXPECT_THROW(CostTable::parse(*std::make_unique<std::istringstream>("Arith 1\n")), ParseError);
  EXPECT_THROW(CostTable::load("/nonexistent/costs.txt"), ParseError);
  std::istringstream in("Arith 2.5 3\n");
  const CostTable t = CostTable::parse(in);
  EXPECT_EQ(t.get(Component::Arith, Metric::Power).str(), "3");
  EXPECT_EQ(t.get(Component::Div, Metric::Area).str(), "17");
}

TEST(CostValue, ExactDecimal) {
  EXPECT_EQ((64 * Cost::parse("50.4")).str(), "3225.6");
  EXPECT_EQ((Cost::parse("0.1") + Cost::parse("0.2")).str(), "0.3");
  EXPECT_EQ((Cost::parse("1") - Cost::parse("1.225")).str(), "-0.225");
  EXPECT_THROW(Cost::parse("abc"), ParseError);
  EXPECT_DOUBLE_EQ(percent_of(Cost::parse("1"), Cost::parse("4")), 25.0);
  EXPECT_DOUBLE_EQ(percent_of(Cost::parse("1"), Cost{}), 0.0);
}

}  // namespace
}  // namespace cgra
