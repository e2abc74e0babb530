#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace umbrella {

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

inline constexpr double kZ95 = 1.959963984540054;

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  std::size_t points = 0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

double quantile(std::vector<double> v, double q);

}  // namespace umbrella
