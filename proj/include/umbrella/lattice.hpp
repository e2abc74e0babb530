#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace umbrella {

inline constexpr int kMaxDim = 6;

class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<std::int64_t> coords);

  int dim() const { return dim_; }
  std::int64_t& operator[](int j) { return c_[j]; }
  std::int64_t operator[](int j) const { return c_[j]; }

  Site& operator+=(const Site& o);
  Site& operator-=(const Site& o);
  friend Site operator+(Site a, const Site& b) { return a += b; }
  friend Site operator-(Site a, const Site& b) { return a -= b; }
  Site operator-() const;

  friend bool operator==(const Site&, const Site&) = default;
  // lexicographic on coordinates; used for deterministic tie-breaks
  friend auto operator<=>(const Site&, const Site&) = default;

  std::int64_t coord_sum() const;
  std::string str() const;

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Site& x);

struct SiteHash {
  std::size_t operator()(const Site& x) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(x.dim());
    for (int j = 0; j < x.dim(); ++j) {
      h ^= static_cast<std::uint64_t>(x[j]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

std::int64_t l1_norm(const Site& x);
std::int64_t linf_norm(const Site& x);
inline std::int64_t l1_dist(const Site& a, const Site& b) { return l1_norm(a - b); }

// axis is 0-based here; sign is +1 or -1
struct Direction {
  int axis = 0;
  int sign = 1;

  Site unit(int d) const;
  std::uint8_t code() const { return static_cast<std::uint8_t>(2 * axis + (sign < 0 ? 1 : 0)); }
  static Direction from_code(std::uint8_t c) { return {c / 2, (c & 1) ? -1 : 1}; }
  friend bool operator==(const Direction&, const Direction&) = default;
};

// Unit step from a to b; throws unless |a-b|_1 == 1.
Direction step_between(const Site& a, const Site& b);

// Axis-aligned inclusive box, row-major flat indexing (last axis fastest).
class Box {
 public:
  Box() = default;
  Box(Site lo, Site hi);
  static Box cube(int d, std::int64_t lo, std::int64_t hi);

  int dim() const { return lo_.dim(); }
  const Site& lo() const { return lo_; }
  const Site& hi() const { return hi_; }
  std::int64_t extent(int j) const { return hi_[j] - lo_[j] + 1; }
  std::int64_t stride(int j) const { return stride_[j]; }
  std::size_t volume() const { return volume_; }

  bool contains(const Site& x) const;
  bool contains(const Box& b) const;
  std::size_t index(const Site& x) const;
  Site site(std::size_t idx) const;

  Box expanded(std::int64_t m) const;
  Box shrunk(std::int64_t m) const { return expanded(-m); }
  bool empty() const { return volume_ == 0; }
  // l-infinity distance from x (inside) to the nearest site outside the box, minus one
  std::int64_t depth(const Site& x) const;

  friend bool operator==(const Box& a, const Box& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

 private:
  Site lo_, hi_;
  std::array<std::int64_t, kMaxDim> stride_{};
  std::size_t volume_ = 0;
};

struct Window {
  Site lo, hi;
  std::int64_t margin = 0;

  Box box() const { return Box(lo, hi); }
  Box outer() const { return Box(lo, hi).expanded(margin); }
  int dim() const { return lo.dim(); }
};

Window cube_window(int d, std::int64_t side, std::int64_t margin);

// Visits every site of a box in flat-index order.
template <class F>
void for_each_site(const Box& b, F&& f) {
  if (b.empty()) return;
  const int d = b.dim();
  Site x = b.lo();
  for (std::size_t idx = 0; idx < b.volume(); ++idx) {
    f(idx, x);
    for (int j = d - 1; j >= 0; --j) {
      if (x[j] < b.hi()[j]) {
        ++x[j];
        break;
      }
      x[j] = b.lo()[j];
    }
  }
}

std::uint64_t binomial(std::int64_t n, std::int64_t k);
std::uint64_t sphere_count(int d, std::int64_t n);
std::uint64_t orthant_sphere_count(int d, std::int64_t n);

// base + {x in [0,t]^d : x_i = 0, 0 < x_j <= t for j != i}
std::vector<Site> umbrella_side(int i, double t, const Site& base);
bool in_umbrella_side(const Site& offset, int i, double t);

}  // namespace umbrella
