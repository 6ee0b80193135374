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
#include <fstream>
#include <bit>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgra/error.hpp"

namespace cgra {

// Hardware-motivated operation groups. Removal granularity of the search.
enum class OpGroup : std::uint8_t { Arith = 0, Div, FP, Mem, Mult, Other };

inline constexpr std::size_t kNumGroups = 6;

inline constexpr std::array<OpGroup, kNumGroups> kAllGroups = {
    OpGroup::Arith, OpGroup::Div, OpGroup::FP, OpGroup::Mem, OpGroup::Mult, OpGroup::Other};

// Groups a compute cell may carry (Mem lives on I/O cells only).
inline constexpr std::array<OpGroup, 5> kComputeGroups = {
    OpGroup::Arith, OpGroup::Div, OpGroup::FP, OpGroup::Mult, OpGroup::Other};

constexpr std::size_t index_of(OpGroup g) { return static_cast<std::size_t>(g); }

constexpr std::string_view group_name(OpGroup g) {
  constexpr std::array<std::string_view, kNumGroups> names = {"Arith", "Div", "FP",
                                                               "Mem",   "Mult", "Other"};
  return names[index_of(g)];
}

inline std::optional<OpGroup> parse_group(std::string_view name) {
  for (OpGroup g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

/// Small value-type set of OpGroups backed by a bitmask.
class GroupSet {
 public:
  constexpr GroupSet() = default;
  constexpr GroupSet(std::initializer_list<OpGroup> groups) {
    for (OpGroup g : groups) insert(g);
  }
  static constexpr GroupSet from_bits(std::uint8_t bits) {
    GroupSet s;
    s.bits_ = bits & kAllBits;
    return s;
  }
  static constexpr GroupSet compute_groups() {
    return {OpGroup::Arith, OpGroup::Div, OpGroup::FP, OpGroup::Mult, OpGroup::Other};
  }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool contains(OpGroup g) const { return bits_ & bit(g); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr void insert(OpGroup g) { bits_ |= bit(g); }
  constexpr void erase(OpGroup g) { bits_ &= static_cast<std::uint8_t>(~bit(g)); }

  constexpr bool intersects(GroupSet o) const { return (bits_ & o.bits_) != 0; }
  constexpr bool is_subset_of(GroupSet o) const { return (bits_ & ~o.bits_) == 0; }

  friend constexpr GroupSet operator|(GroupSet a, GroupSet b) { return from_bits(a.bits_ | b.bits_); }
  friend constexpr GroupSet operator&(GroupSet a, GroupSet b) { return from_bits(a.bits_ & b.bits_); }
  // Set difference.
  friend constexpr GroupSet operator-(GroupSet a, GroupSet b) {
    return from_bits(a.bits_ & static_cast<std::uint8_t>(~b.bits_));
  }
  friend constexpr bool operator==(GroupSet, GroupSet) = default;

  std::vector<OpGroup> members() const {
    std::vector<OpGroup> out;
    for (OpGroup g : kAllGroups)
      if (contains(g)) out.push_back(g);
    return out;
  }

  // "Arith,FP" or "-" for the empty set.
  std::string str(char sep = ',') const {
    if (empty()) return "-";
    std::string out;
    for (OpGroup g : members()) {
      if (!out.empty()) out += sep;
      out += group_name(g);
    }
    return out;
  }

  static GroupSet parse(std::string_view text, char sep = ',') {
    GroupSet s;
    if (text == "-") return s;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t next = text.find(sep, pos);
      if (next == std::string_view::npos) next = text.size();
      auto token = text.substr(pos, next - pos);
      auto g = parse_group(token);
      if (!g) throw ParseError("unknown operation group '" + std::string(token) + "'");
      s.insert(*g);
      pos = next + 1;
    }
    return s;
  }

 private:
  static constexpr std::uint8_t kAllBits = (1u << kNumGroups) - 1;
  static constexpr std::uint8_t bit(OpGroup g) {
    return static_cast<std::uint8_t>(1u << index_of(g));
  }
  std::uint8_t bits_ = 0;
};

/// Opcode name -> operation group. Grouping is data so alternative
/// groupings can be swapped in from a file.
class OpcodeTable {
 public:
  OpcodeTable() = default;

  void add(const std::string& opcode, OpGroup g) {
    if (!entries_.emplace(opcode, g).second) {
      throw ValidationError("duplicate opcode '" + opcode + "'");
    }
  }

  bool contains(std::string_view opcode) const { return entries_.find(opcode) != entries_.end(); }

  OpGroup classify(std::string_view opcode) const {
    auto it = entries_.find(opcode);
    if (it == entries_.end()) throw ValidationError("unknown opcode '" + std::string(opcode) + "'");
    return it->second;
  }

  const std::map<std::string, OpGroup, std::less<>>& entries() const { return entries_; }

  // Lines of `<OPCODE> <Group>`; '#' starts a comment.
  static OpcodeTable parse(std::istream& in) {
    OpcodeTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string opcode, group, extra;
      if (!(ls >> opcode)) continue;
      if (!(ls >> group) || (ls >> extra)) {
        throw ParseError("expected '<OPCODE> <Group>'", lineno);
      }
      auto g = parse_group(group);
      if (!g) throw ParseError("unknown group name '" + group + "'", lineno);
      if (table.contains(opcode)) throw ParseError("duplicate opcode '" + opcode + "'", lineno);
      table.add(opcode, *g);
    }
    return table;
  }

  static OpcodeTable parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

  static OpcodeTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open opcode table " + path);
    try {
      return parse(in);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }

  // Superset guess over common kernel opcodes; see config/opcodes.txt.
  static const OpcodeTable& defaults() {
    static const OpcodeTable table = [] {
      OpcodeTable t;
      for (auto op : {"ADD", "SUB", "AND", "OR", "XOR", "NOT", "SHL", "SHR", "ASHR", "CMP",
                      "ICMP", "SELECT", "ABS", "MIN", "MAX", "NEG", "MOV", "CONST"})
        t.add(op, OpGroup::Arith);
      for (auto op : {"DIV", "UDIV", "REM", "FDIV"}) t.add(op, OpGroup::Div);
      for (auto op : {"FADD", "FSUB", "FCMP", "FABS", "FMIN", "FMAX", "FNEG", "ITOF", "FTOI"})
        t.add(op, OpGroup::FP);
      for (auto op : {"LOAD", "STORE"}) t.add(op, OpGroup::Mem);
      for (auto op : {"MUL", "FMUL"}) t.add(op, OpGroup::Mult);
      for (auto op : {"EXP", "LOG", "SQRT", "FSQRT", "SIN", "COS", "POW", "RSQRT"})
        t.add(op, OpGroup::Other);
      return t;
    }();
    return table;
  }

 private:
  std::map<std::string, OpGroup, std::less<>> entries_;
};

inline OpGroup classify(std::string_view opcode, const OpcodeTable& table) {
  return table.classify(opcode);
}

}  // namespace cgra
