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
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/error.hpp"
#include "cgra/op_group.hpp"

namespace cgra {

struct CellPos {
  int r = 0;
  int c = 0;

  friend constexpr auto operator<=>(const CellPos&, const CellPos&) = default;
};

enum class CellKind : std::uint8_t { IO, Compute };

// 4NN directions. Bit i of a FIFO mask is the input port facing direction i.
enum class Dir : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr std::array<Dir, 4> kDirs = {Dir::N, Dir::E, Dir::S, Dir::W};
inline constexpr std::uint8_t kFullFifo = 0b1111;

constexpr CellPos step(CellPos p, Dir d) {
  switch (d) {
    case Dir::N: return {p.r - 1, p.c};
    case Dir::E: return {p.r, p.c + 1};
    case Dir::S: return {p.r + 1, p.c};
    case Dir::W: return {p.r, p.c - 1};
  }
  return p;
}

constexpr Dir opposite(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 2) % 4); }

constexpr std::uint8_t dir_bit(Dir d) { return static_cast<std::uint8_t>(1u << static_cast<int>(d)); }

// Direction from a to an adjacent b, as seen from a.
inline Dir direction_between(CellPos a, CellPos b) {
  if (b.r == a.r - 1 && b.c == a.c) return Dir::N;
  if (b.r == a.r + 1 && b.c == a.c) return Dir::S;
  if (b.c == a.c + 1 && b.r == a.r) return Dir::E;
  if (b.c == a.c - 1 && b.r == a.r) return Dir::W;
  throw ValidationError("cells are not 4NN-adjacent");
}

inline int manhattan(CellPos a, CellPos b) { return std::abs(a.r - b.r) + std::abs(a.c - b.c); }

// FIFO mask as four '0'/'1' characters in N,E,S,W order.
inline std::string fifo_str(std::uint8_t mask) {
  std::string s;
  for (Dir d : kDirs) s += (mask & dir_bit(d)) ? '1' : '0';
  return s;
}

inline std::uint8_t parse_fifo(std::string_view s) {
  if (s.size() != 4) throw ParseError("fifo mask must have 4 digits: '" + std::string(s) + "'");
  std::uint8_t mask = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (s[i] == '1') mask |= dir_bit(kDirs[i]);
    else if (s[i] != '0') throw ParseError("fifo mask must be binary: '" + std::string(s) + "'");
  }
  return mask;
}

struct CellConfig {
  CellKind kind = CellKind::Compute;
  GroupSet groups;
  std::uint8_t fifo_ports = kFullFifo;

  friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

/// R x C functional layout. Border cells are I/O, interior cells are
/// compute; the kind is a function of position and is never stored.
class Layout {
 public:
  Layout() = default;

  Layout(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 3 || cols < 3) {
      throw ValidationError("grid must be at least 3x3 (got " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ")");
    }
    groups_.assign(static_cast<std::size_t>(rows * cols), GroupSet{});
    fifo_.assign(static_cast<std::size_t>(rows * cols), kFullFifo);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t num_cells() const { return groups_.size(); }
  std::size_t num_compute() const { return static_cast<std::size_t>((rows_ - 2) * (cols_ - 2)); }
  std::size_t num_io() const { return num_cells() - num_compute(); }

  bool in_bounds(CellPos p) const { return p.r >= 0 && p.c >= 0 && p.r < rows_ && p.c < cols_; }
  bool is_io(CellPos p) const {
    return p.r == 0 || p.c == 0 || p.r == rows_ - 1 || p.c == cols_ - 1;
  }
  CellKind kind(CellPos p) const { return is_io(p) ? CellKind::IO : CellKind::Compute; }

  std::size_t index(CellPos p) const { return static_cast<std::size_t>(p.r * cols_ + p.c); }
  CellPos pos(std::size_t index) const {
    return {static_cast<int>(index) / cols_, static_cast<int>(index) % cols_};
  }

  GroupSet groups(CellPos p) const { return groups_[index(p)]; }
  std::uint8_t fifo(CellPos p) const { return fifo_[index(p)]; }
  CellConfig cell(CellPos p) const { return {kind(p), groups(p), fifo(p)}; }

  void set_groups(CellPos p, GroupSet g) {
    if (is_io(p) && !g.empty()) throw ValidationError("I/O cells carry no operation groups");
    if (g.contains(OpGroup::Mem)) throw ValidationError("compute cells never support Mem");
    groups_[index(p)] = g;
  }
  void set_fifo(CellPos p, std::uint8_t mask) { fifo_[index(p)] = mask & kFullFifo; }

  // Interior cells in row-major order.
  std::vector<CellPos> compute_cells() const {
    std::vector<CellPos> out;
    out.reserve(num_compute());
    for (int r = 1; r + 1 < rows_; ++r)
      for (int c = 1; c + 1 < cols_; ++c) out.push_back({r, c});
    return out;
  }

  // Whether the directed link from -> to exists and the receiving port is kept.
  bool link_usable(CellPos from, CellPos to) const {
    if (!in_bounds(from) || !in_bounds(to)) return false;
    return fifo(to) & dir_bit(direction_between(to, from));
  }

  const std::vector<GroupSet>& group_grid() const { return groups_; }
  const std::vector<std::uint8_t>& fifo_grid() const { return fifo_; }

  friend bool operator==(const Layout&, const Layout&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<GroupSet> groups_;
  std::vector<std::uint8_t> fifo_;
};

/// N_t and per-group N_g over compute cells.
struct GroupCensus {
  std::size_t compute_cells = 0;
  GroupCounts counts;

  std::size_t instances() const { return counts.total(); }
  friend bool operator==(const GroupCensus&, const GroupCensus&) = default;
};

inline GroupCensus census(const Layout& layout) {
  GroupCensus out;
  out.compute_cells = layout.num_compute();
  for (CellPos p : layout.compute_cells()) {
    for (OpGroup g : layout.groups(p).members()) ++out.counts[g];
  }
  return out;
}

// Every compute cell supports present ∖ {Mem}; all FIFO ports retained.
inline Layout create_full_layout(int rows, int cols, GroupSet present) {
  Layout layout(rows, cols);
  GroupSet compute = present - GroupSet{OpGroup::Mem};
  for (CellPos p : layout.compute_cells()) layout.set_groups(p, compute);
  return layout;
}

inline std::string serialize_layout(const Layout& layout) {
  std::ostringstream os;
  os << "layout " << layout.rows() << ' ' << layout.cols() << '\n';
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      CellPos p{r, c};
      os << "cell " << r << ' ' << c << ' ' << (layout.is_io(p) ? "IO" : "COMPUTE")
         << " groups=" << layout.groups(p).str() << " fifo=" << fifo_str(layout.fifo(p)) << '\n';
    }
  }
  return os.str();
}

inline Layout parse_layout(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  Layout layout;
  bool have_header = false;
  std::vector<bool> seen;
  std::size_t records = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "layout") {
      int rows = 0, cols = 0;
      std::string extra;
      if (have_header) throw ParseError("duplicate 'layout' header", lineno);
      if (!(ls >> rows >> cols) || (ls >> extra)) throw ParseError("expected 'layout <R> <C>'", lineno);
      try {
        layout = Layout(rows, cols);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), lineno);
      }
      seen.assign(layout.num_cells(), false);
      have_header = true;
    } else if (kw == "cell") {
      if (!have_header) throw ParseError("'cell' before 'layout' header", lineno);
      int r = -1, c = -1;
      std::string kind, groups_tok, fifo_tok, extra;
      if (!(ls >> r >> c >> kind >> groups_tok >> fifo_tok) || (ls >> extra)) {
        throw ParseError("expected 'cell <r> <c> <IO|COMPUTE> groups=<list> fifo=<mask>'", lineno);
      }
      ++records;
      if (records > layout.num_cells()) {
        throw ParseError("dimension mismatch: more cell records than " +
                             std::to_string(layout.rows()) + "x" + std::to_string(layout.cols()),
                         lineno);
      }
      CellPos p{r, c};
      if (!layout.in_bounds(p)) {
        throw ParseError("dimension mismatch: cell " + std::to_string(r) + "," + std::to_string(c) +
                             " outside the declared " + std::to_string(layout.rows()) + "x" +
                             std::to_string(layout.cols()) + " grid",
                         lineno);
      }
      if (seen[layout.index(p)]) throw ParseError("duplicate cell record", lineno);
      seen[layout.index(p)] = true;
      if ((kind == "IO") != layout.is_io(p) || (kind != "IO" && kind != "COMPUTE")) {
        throw ParseError("cell kind '" + kind + "' does not match its position", lineno);
      }
      if (groups_tok.rfind("groups=", 0) != 0 || fifo_tok.rfind("fifo=", 0) != 0) {
        throw ParseError("expected groups=... fifo=...", lineno);
      }
      try {
        layout.set_groups(p, GroupSet::parse(std::string_view(groups_tok).substr(7)));
        layout.set_fifo(p, parse_fifo(std::string_view(fifo_tok).substr(5)));
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), lineno);
      }
    } else {
      throw ParseError("unknown directive '" + kw + "'", lineno);
    }
  }
  if (!have_header) throw ParseError("missing 'layout <R> <C>' header");
  if (records != layout.num_cells()) {
    throw ParseError("dimension mismatch: " + std::to_string(records) + " cell records for a " +
                     std::to_string(layout.rows()) + "x" + std::to_string(layout.cols()) + " grid");
  }
  return layout;
}

inline Layout parse_layout(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_layout(in);
}

inline Layout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open layout file " + path);
  try {
    return parse_layout(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Pointwise subset on group sets; grids must have equal dimensions.
inline bool groups_subset_of(const Layout& inner, const Layout& outer) {
  if (inner.rows() != outer.rows() || inner.cols() != outer.cols()) return false;
  for (std::size_t i = 0; i < inner.num_cells(); ++i) {
    if (!inner.group_grid()[i].is_subset_of(outer.group_grid()[i])) return false;
  }
  return true;
}

}  // namespace cgra
