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

// Reference computations that work from serialized text and hard-coded
// weights, sharing no code with the library beyond the file formats.

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>

namespace cgra::oracle {

// Default weights in 1e-4 units.
inline const std::map<std::string, std::int64_t>& group_ticks() {
  static const std::map<std::string, std::int64_t> t = {
      {"Arith", 10000}, {"FP", 44000}, {"Mult", 62000}, {"Div", 170000}, {"Other", 123000}};
  return t;
}
inline constexpr std::int64_t kEmptyTicks = 46000;
inline constexpr std::int64_t kFifoPortTicks = 12250;  // 4.9 / 4
inline constexpr std::int64_t kIoTicks = 119000;

struct Recount {
  std::int64_t cost_ticks = 0;
  std::map<std::string, std::size_t> instances;
  std::size_t compute_cells = 0;
  std::size_t fifo_ports = 0;
};

/// Eq.-1 style total straight from a layout file's text.
inline Recount recount_layout(const std::string& text, bool include_io = false) {
  Recount out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw, r, c, kind, groups, fifo;
    if (!(ls >> kw) || kw != "cell") continue;
    ls >> r >> c >> kind >> groups >> fifo;
    groups = groups.substr(groups.find('=') + 1);
    fifo = fifo.substr(fifo.find('=') + 1);
    std::int64_t ports = 0;
    for (char ch : fifo) ports += ch == '1';
    if (kind == "IO") {
      if (include_io) out.cost_ticks += kIoTicks - (4 - ports) * kFifoPortTicks;
      continue;
    }
    ++out.compute_cells;
    out.fifo_ports += static_cast<std::size_t>(ports);
    out.cost_ticks += kEmptyTicks + ports * kFifoPortTicks;
    if (groups == "-") continue;
    std::istringstream gs(groups);
    std::string g;
    while (std::getline(gs, g, ',')) {
      out.cost_ticks += group_ticks().at(g);
      ++out.instances[g];
    }
  }
  return out;
}

}  // namespace cgra::oracle
