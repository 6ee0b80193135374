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

#include <algorithm>
#include <map>
#include <random>

#include "test_util.hpp"

namespace cgra {
namespace {

TEST(DfgParse, ChainHasThreeNodesTwoEdges) {
  Dfg d = test::chain_dfg();
  EXPECT_EQ(d.name(), "chain");
  EXPECT_EQ(d.num_nodes(), 3u);
  EXPECT_EQ(d.num_edges(), 2u);
  EXPECT_EQ(d.node(0).id, "a");
  EXPECT_EQ(d.node(1).group, OpGroup::Arith);
  EXPECT_EQ(d.node(2).group, OpGroup::Mem);
  EXPECT_EQ(d.edges()[1], (DfgEdge{1, 2}));
}

TEST(DfgParse, CommentsAndBlankLinesIgnored) {
  Dfg d = parse_dfg("# header\n\ndfg x  # trailing\nnode a ADD\n   \n");
  EXPECT_EQ(d.num_nodes(), 1u);
}

TEST(DfgParse, DanglingEndpointReportsLine) {
  try {
    parse_dfg("dfg x\nnode a ADD\nedge a n9\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("n9"), std::string::npos);
  }
}

TEST(DfgParse, UnknownOpcodeReportsLine) {
  try {
    parse_dfg("dfg x\nnode a ADD\nnode b FROB\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(DfgParse, SyntaxErrors) {
  EXPECT_THROW(parse_dfg("node a ADD\n"), ParseError);
  EXPECT_THROW(parse_dfg("dfg x\nnode a\n"), ParseError);
  EXPECT_THROW(parse_dfg("dfg x\nnode a ADD extra\n"), ParseError);
  EXPECT_THROW(parse_dfg("dfg x\nvertex a ADD\n"), ParseError);
  EXPECT_THROW(parse_dfg("dfg x\ndfg y\n"), ParseError);
  EXPECT_THROW(parse_dfg(""), ParseError);
  EXPECT_THROW(parse_dfg("dfg x\nnode a ADD\nnode a SUB\n"), ParseError);
}

TEST(DfgParse, CycleRejected) {
  EXPECT_THROW(parse_dfg("dfg x\nnode a ADD\nnode b ADD\nedge a b\nedge b a\n"), ValidationError);
  EXPECT_THROW(parse_dfg("dfg x\nnode a ADD\nedge a a\n"), ValidationError);
}

TEST(DfgParse, DuplicateEdgeRejected) {
  EXPECT_THROW(parse_dfg("dfg x\nnode a ADD\nnode b ADD\nedge a b\nedge a b\n"), ValidationError);
}

TEST(DfgParse, SobelKernelMatchesCounts) {
  Dfg d = load_dfg(test::corpus_dir() / "sob.dfg");
  EXPECT_EQ(d.num_nodes(), 9u);
  EXPECT_EQ(d.num_edges(), 8u);
}

TEST(DfgParse, CorpusCountsAreFrozen) {
  const std::map<std::string, std::pair<std::size_t, std::size_t>> expected = {
      {"bil", {26, 29}}, {"box", {19, 18}}, {"fft", {54, 68}}, {"gar", {21, 24}},
      {"gb", {16, 12}},  {"md", {55, 74}},  {"nb", {30, 37}},  {"nms", {29, 36}},
      {"rgb", {27, 30}}, {"roi", {45, 56}}, {"sad", {80, 79}}, {"sob", {9, 8}}};
  ASSERT_EQ(test::corpus().size(), expected.size());
  for (const auto& d : test::corpus()) {
    auto it = expected.find(d.name());
    ASSERT_NE(it, expected.end()) << d.name();
    EXPECT_EQ(d.num_nodes(), it->second.first) << d.name();
    EXPECT_EQ(d.num_edges(), it->second.second) << d.name();
  }
}

TEST(DfgParse, SerializeRoundTrip) {
  for (const auto& d : test::corpus()) {
    Dfg back = parse_dfg(serialize_dfg(d));
    EXPECT_EQ(back.name(), d.name());
    EXPECT_EQ(back.nodes(), d.nodes());
    EXPECT_EQ(back.edges(), d.edges());
  }
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    RandomDfgParams p;
    p.num_compute = 3 + seed % 9;
    p.max_fanin = 3;
    p.compute_opcodes = {"ADD", "FDIV", "SQRT", "FMUL", "FSUB"};
    Dfg d = generate_random_dfg(seed, p);
    Dfg back = parse_dfg(serialize_dfg(d));
    EXPECT_EQ(back.nodes(), d.nodes());
    EXPECT_EQ(back.edges(), d.edges());
  }
}

TEST(DfgStructure, TopoOrderRespectsEdges) {
  for (const auto& d : test::corpus()) {
    std::vector<std::size_t> pos(d.num_nodes());
    for (std::size_t i = 0; i < d.topo_order().size(); ++i) pos[d.topo_order()[i]] = i;
    for (const auto& e : d.edges()) {
      EXPECT_LT(pos[e.src], pos[e.dst]);
      EXPECT_LT(d.level(e.src), d.level(e.dst));
      EXPECT_GT(d.height(e.src), d.height(e.dst));
    }
  }
}

TEST(Classify, TableExamples) {
  const auto& t = OpcodeTable::defaults();
  EXPECT_EQ(classify("ADD", t), OpGroup::Arith);
  EXPECT_EQ(classify("FDIV", t), OpGroup::Div);
  EXPECT_EQ(classify("SQRT", t), OpGroup::Other);
  EXPECT_EQ(classify("FMUL", t), OpGroup::Mult);
  EXPECT_EQ(classify("LOAD", t), OpGroup::Mem);
  EXPECT_EQ(classify("FADD", t), OpGroup::FP);
  EXPECT_THROW(classify("FROB", t), ValidationError);
}

TEST(Classify, TableFileRules) {
  EXPECT_THROW(OpcodeTable::parse("ADD Arith\nADD FP\n"), ParseError);
  EXPECT_THROW(OpcodeTable::parse("ADD Integer\n"), ParseError);
  EXPECT_THROW(OpcodeTable::parse("ADD\n"), ParseError);
  OpcodeTable t = OpcodeTable::parse("# alt grouping\nADD Mult\n");
  EXPECT_EQ(t.classify("ADD"), OpGroup::Mult);
}

TEST(Classify, ShippedTableEqualsBuiltin) {
  OpcodeTable file = OpcodeTable::load((test::source_dir() / "config" / "opcodes.txt").string());
  EXPECT_EQ(file.entries(), OpcodeTable::defaults().entries());
}

TEST(Classify, TotalOverCorpus) {
  for (const auto& d : test::corpus())
    for (const auto& n : d.nodes()) EXPECT_TRUE(OpcodeTable::defaults().contains(n.opcode));
}

TEST(GroupDemand, SumsToNodeCount) {
  for (const auto& d : test::corpus()) EXPECT_EQ(d.demand().total(), d.num_nodes());
}

TEST(MinGroups, ElementwiseMax) {
  Dfg a = parse_dfg("dfg a\nnode m1 MUL\nnode m2 MUL\nnode x ADD\n");
  Dfg b = parse_dfg("dfg b\nnode m1 MUL\nnode m2 MUL\nnode m3 MUL\n");
  std::vector<Dfg> set{a, b};
  MinGroups m = find_min_groups(set);
  EXPECT_EQ(m[OpGroup::Mult], 3u);
  EXPECT_EQ(m[OpGroup::Arith], 1u);
  EXPECT_EQ(m[OpGroup::Div], 0u);
  EXPECT_EQ(m[OpGroup::FP], 0u);
  EXPECT_EQ(m[OpGroup::Other], 0u);
  EXPECT_EQ(m[OpGroup::Mem], 0u);
}

TEST(MinGroups, SingleDfgIsItsDemand) {
  for (const auto& d : test::corpus()) {
    std::vector<Dfg> one{d};
    EXPECT_EQ(find_min_groups(one), d.demand());
  }
}

TEST(MinGroups, EmptyInputRejected) { EXPECT_THROW(find_min_groups({}), ValidationError); }

// Frozen from tools/tally_corpus.py, which tallies opcodes without this library.
TEST(MinGroups, CorpusMatchesIndependentTally) {
  MinGroups m = find_min_groups(test::corpus());
  EXPECT_EQ(m[OpGroup::Arith], 54u);
  EXPECT_EQ(m[OpGroup::Div], 3u);
  EXPECT_EQ(m[OpGroup::FP], 21u);
  EXPECT_EQ(m[OpGroup::Mem], 26u);
  EXPECT_EQ(m[OpGroup::Mult], 14u);
  EXPECT_EQ(m[OpGroup::Other], 3u);
}

TEST(MinGroups, MonotoneUnderSubsets) {
  const auto& all = test::corpus();
  const MinGroups full = find_min_groups(all);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Dfg> subset;
    for (const auto& d : all)
      if (rng() & 1) subset.push_back(d);
    if (subset.empty()) continue;
    const MinGroups part = find_min_groups(subset);
    for (OpGroup g : kAllGroups) EXPECT_LE(part[g], full[g]);
  }
}

TEST(GroupSetType, StringRoundTrip) {
  GroupSet s{OpGroup::Arith, OpGroup::FP};
  EXPECT_EQ(s.str(), "Arith,FP");
  EXPECT_EQ(GroupSet::parse("Arith,FP"), s);
  EXPECT_EQ(GroupSet{}.str(), "-");
  EXPECT_EQ(GroupSet::parse("-"), GroupSet{});
  EXPECT_THROW(GroupSet::parse("Arith,Float"), ParseError);
  EXPECT_EQ(kAllGroups.size(), 6u);
}

}  // namespace
}  // namespace cgra
