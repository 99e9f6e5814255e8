#pragma once

#include <compare>
#include <cstdlib>
#include <ostream>
#include <string>

#include "vortex/errors.hpp"

namespace vortex {

/// Angular-momentum quantum number stored as twice its value, so that
/// 1/2, 3/2, ... are exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int value) : twice_(2 * value) {}  // NOLINT: implicit from integers

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  /// Parses a real number that must be an exact multiple of 1/2.
  static HalfInt from_double(double value) {
    const double twice = 2.0 * value;
    const long rounded = std::lround(twice);
    if (std::abs(twice - static_cast<double>(rounded)) > 1e-9) {
      throw DomainError("value " + std::to_string(value) + " is not a multiple of 1/2");
    }
    return from_twice(static_cast<int>(rounded));
  }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// Integer value; only meaningful when is_integer().
  constexpr int as_int() const { return twice_ / 2; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const {
    if (is_integer()) return std::to_string(as_int());
    return std::to_string(twice_) + "/2";
  }

 private:
  int twice_ = 0;
};

inline constexpr HalfInt kHalf = HalfInt::from_twice(1);

constexpr HalfInt abs(HalfInt h) { return h.twice() < 0 ? -h : h; }

/// |m| <= j and j - m integer.
constexpr bool valid_projection(HalfInt j, HalfInt m) {
  return j.twice() >= 0 && abs(m) <= j && (j - m).is_integer();
}

inline std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

}  // namespace vortex
