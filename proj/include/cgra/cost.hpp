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

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>

#include "cgra/error.hpp"

namespace cgra {

/// Fixed-point cost value in units of 1e-4.
///
/// Every constant in the default cost table has at most one decimal and the
/// per-port FIFO share (bank / 4) has at most four, so sums over any layout
/// are exact and cost comparisons in the search never see rounding noise.
class Cost {
 public:
  static constexpr std::int64_t kScale = 10000;

  constexpr Cost() = default;

  static constexpr Cost from_ticks(std::int64_t ticks) {
    Cost c;
    c.ticks_ = ticks;
    return c;
  }

  static Cost from_double(double v) {
    return from_ticks(std::llround(v * static_cast<double>(kScale)));
  }

  // Accepts plain decimal notation ("4.9", "17", "-0.25").
  static Cost parse(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError("invalid cost value '" + std::string(text) + "'");
    }
    return from_double(v);
  }

  constexpr std::int64_t ticks() const { return ticks_; }
  double to_double() const { return static_cast<double>(ticks_) / kScale; }

  // Shortest exact decimal form: 3225.6, 1.225, 0, -2.5
  std::string str() const {
    std::int64_t t = ticks_;
    std::string out;
    if (t < 0) {
      out.push_back('-');
      t = -t;
    }
    out += std::to_string(t / kScale);
    std::int64_t frac = t % kScale;
    if (frac != 0) {
      std::string digits = std::to_string(frac);
      digits.insert(0, 4 - digits.size(), '0');
      while (digits.back() == '0') digits.pop_back();
      out += '.' + digits;
    }
    return out;
  }

  constexpr Cost& operator+=(Cost o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr Cost& operator-=(Cost o) {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr Cost operator+(Cost a, Cost b) { return a += b; }
  friend constexpr Cost operator-(Cost a, Cost b) { return a -= b; }
  friend constexpr Cost operator*(std::int64_t n, Cost c) { return from_ticks(n * c.ticks_); }
  friend constexpr Cost operator*(Cost c, std::int64_t n) { return from_ticks(n * c.ticks_); }
  friend constexpr auto operator<=>(Cost, Cost) = default;

  friend std::ostream& operator<<(std::ostream& os, Cost c) { return os << c.str(); }

 private:
  std::int64_t ticks_ = 0;
};

// 100 * part / whole, or 0 when whole is zero.
inline double percent_of(Cost part, Cost whole) {
  return whole.ticks() == 0 ? 0.0
                            : 100.0 * static_cast<double>(part.ticks()) /
                                  static_cast<double>(whole.ticks());
}

}  // namespace cgra
