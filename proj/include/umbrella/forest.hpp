#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "umbrella/field.hpp"
#include "umbrella/lattice.hpp"

namespace umbrella {

struct LambdaValue {
  double value = 1.0;
  bool exact = true;
};

struct LambdaVector {
  std::vector<double> value;
  std::vector<bool> exact;
};

struct AxisChoice {
  int axis = 0;
  bool tie = false;
};

// Supremum of L(y) over vertices y with x in y + zeta*U_{i,L(y)} and |x-y|_inf <= R.
// exact is false when part of that radius-R region lies outside the field box.
LambdaValue lambda(const Site& x, int i, const LField& field, std::int64_t R, int zeta = +1);
LambdaVector lambda_vector(const Site& x, const LField& field, std::int64_t R, int zeta = +1);
AxisChoice choose_direction(std::span<const double> lambdas);

// Per-axis bound on P[truncated lambda_i != lambda_i]; roughly theta*(d-1)/R.
double lambda_miss_bound(const ModelParams& p, std::int64_t R);

class Forest {
 public:
  static constexpr std::uint8_t kUncertain = 0x80;

  Forest() = default;
  Forest(Box window, int zeta, std::vector<std::uint8_t> codes);

  const Box& window() const { return window_; }
  int dim() const { return window_.dim(); }
  int zeta() const { return zeta_; }
  int axis(std::size_t idx) const { return codes_[idx] & 0x7f; }
  int axis(const Site& x) const { return axis(window_.index(x)); }
  bool uncertain(std::size_t idx) const { return (codes_[idx] & kUncertain) != 0; }
  Site parent(const Site& x) const {
    Site p = x;
    p[axis(x)] += zeta_;
    return p;
  }
  // flat index of the parent, or npos when it leaves the window
  std::size_t parent_index(std::size_t idx) const;
  const std::vector<std::uint8_t>& codes() const { return codes_; }
  std::size_t uncertain_count() const;

  void write(std::ostream& os) const;
  static Forest read(std::istream& is);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Box window_;
  int zeta_ = 1;
  std::vector<std::uint8_t> codes_;
};

struct MarginError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requires the field box to extend R beyond the window on the inflow side.
Forest build_forest(const LField& field, const Box& window, int zeta, std::int64_t R);
// Same construction drawing L(y) = sample_L(y, p, key) on the fly, so no field box is stored
// and R is limited only by time.
Forest build_forest(const ModelParams& p, std::uint64_t key, const Box& window, int zeta, std::int64_t R);
Forest example1_forest(std::uint64_t seed, const Box& window, int zeta = +1);

}  // namespace umbrella
