#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dbb84/estimation.hpp"

// Outward-rounded interval arithmetic for the condition certificates. Every
// operation widens its result by one ulp per side, so a certified sign or
// ratio bound holds for every point of the input box regardless of rounding.

namespace dbb84::iv {

inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

inline Iv make(double lo, double hi) { return {lo, hi}; }
inline Iv point(double x) { return {x, x}; }

inline Iv add(Iv a, Iv b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
inline Iv sub(Iv a, Iv b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }

inline Iv mul(Iv a, Iv b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {down(std::min({c[0], c[1], c[2], c[3]})), up(std::max({c[0], c[1], c[2], c[3]}))};
}

inline bool contains_zero(Iv a) { return a.lo <= 0.0 && a.hi >= 0.0; }

// division requires a denominator of definite sign
inline Iv div(Iv a, Iv b) {
  if (contains_zero(b)) throw std::domain_error("interval division by a zero-spanning interval");
  const double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {down(std::min({c[0], c[1], c[2], c[3]})), up(std::max({c[0], c[1], c[2], c[3]}))};
}

inline Iv scale(Iv a, double k) { return mul(a, point(k)); }
inline Iv clamp_nonneg(Iv a) { return {std::max(a.lo, 0.0), std::max(a.hi, 0.0)}; }

}  // namespace dbb84::iv
