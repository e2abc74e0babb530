#include "umbrella/lattice.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace umbrella {

Site::Site(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range: " + std::to_string(dim));
}

Site::Site(std::initializer_list<std::int64_t> coords) : Site(static_cast<int>(coords.size())) {
  int j = 0;
  for (auto v : coords) c_[j++] = v;
}

Site& Site::operator+=(const Site& o) {
  for (int j = 0; j < dim_; ++j) c_[j] += o.c_[j];
  return *this;
}

Site& Site::operator-=(const Site& o) {
  for (int j = 0; j < dim_; ++j) c_[j] -= o.c_[j];
  return *this;
}

Site Site::operator-() const {
  Site r(*this);
  for (int j = 0; j < dim_; ++j) r.c_[j] = -c_[j];
  return r;
}

std::int64_t Site::coord_sum() const {
  std::int64_t s = 0;
  for (int j = 0; j < dim_; ++j) s += c_[j];
  return s;
}

std::string Site::str() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Site& x) {
  os << '(';
  for (int j = 0; j < x.dim(); ++j) os << (j ? "," : "") << x[j];
  return os << ')';
}

std::int64_t l1_norm(const Site& x) {
  std::int64_t s = 0;
  for (int j = 0; j < x.dim(); ++j) s += x[j] < 0 ? -x[j] : x[j];
  return s;
}

std::int64_t linf_norm(const Site& x) {
  std::int64_t s = 0;
  for (int j = 0; j < x.dim(); ++j) s = std::max(s, x[j] < 0 ? -x[j] : x[j]);
  return s;
}

Site Direction::unit(int d) const {
  Site e(d);
  e[axis] = sign;
  return e;
}

Direction step_between(const Site& a, const Site& b) {
  Site diff = b - a;
  if (l1_norm(diff) != 1) throw std::invalid_argument("not neighbours: " + a.str() + " " + b.str());
  for (int j = 0; j < diff.dim(); ++j)
    if (diff[j] != 0) return {j, static_cast<int>(diff[j])};
  throw std::logic_error("unreachable");
}

Box::Box(Site lo, Site hi) : lo_(lo), hi_(hi) {
  if (lo.dim() != hi.dim()) throw std::invalid_argument("box corners differ in dimension");
  const int d = lo.dim();
  bool empty = false;
  for (int j = 0; j < d; ++j)
    if (hi[j] < lo[j]) empty = true;
  volume_ = 1;
  for (int j = d - 1; j >= 0; --j) {
    stride_[j] = static_cast<std::int64_t>(volume_);
    volume_ *= empty ? 0 : static_cast<std::size_t>(hi[j] - lo[j] + 1);
  }
  if (empty) volume_ = 0;
}

Box Box::cube(int d, std::int64_t lo, std::int64_t hi) {
  Site a(d), b(d);
  for (int j = 0; j < d; ++j) a[j] = lo, b[j] = hi;
  return Box(a, b);
}

bool Box::contains(const Site& x) const {
  for (int j = 0; j < dim(); ++j)
    if (x[j] < lo_[j] || x[j] > hi_[j]) return false;
  return true;
}

bool Box::contains(const Box& b) const { return b.empty() || (contains(b.lo()) && contains(b.hi())); }

std::size_t Box::index(const Site& x) const {
  std::int64_t idx = 0;
  for (int j = 0; j < dim(); ++j) idx += (x[j] - lo_[j]) * stride_[j];
  return static_cast<std::size_t>(idx);
}

Site Box::site(std::size_t idx) const {
  Site x(dim());
  auto r = static_cast<std::int64_t>(idx);
  for (int j = 0; j < dim(); ++j) {
    x[j] = lo_[j] + r / stride_[j];
    r %= stride_[j];
  }
  return x;
}

Box Box::expanded(std::int64_t m) const {
  Site a = lo_, b = hi_;
  for (int j = 0; j < dim(); ++j) a[j] -= m, b[j] += m;
  return Box(a, b);
}

std::int64_t Box::depth(const Site& x) const {
  std::int64_t best = INT64_MAX;
  for (int j = 0; j < dim(); ++j) best = std::min({best, x[j] - lo_[j], hi_[j] - x[j]});
  return best;
}

Window cube_window(int d, std::int64_t side, std::int64_t margin) {
  Window w{Site(d), Site(d), margin};
  for (int j = 0; j < d; ++j) w.hi[j] = side - 1;
  return w;
}

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<unsigned __int128>(n - k + i) / i;
  if (r > UINT64_MAX) throw std::overflow_error("binomial overflow");
  return static_cast<std::uint64_t>(r);
}

// choose k nonzero coordinates, their signs, and a composition of n into k positive parts
std::uint64_t sphere_count(int d, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("negative radius");
  if (n == 0) return 1;
  unsigned __int128 total = 0;
  for (int k = 1; k <= d; ++k)
    total += static_cast<unsigned __int128>(binomial(d, k)) * (std::uint64_t{1} << k) * binomial(n - 1, k - 1);
  if (total > UINT64_MAX) throw std::overflow_error("sphere_count overflow");
  return static_cast<std::uint64_t>(total);
}

std::uint64_t orthant_sphere_count(int d, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("negative radius");
  return binomial(n - 1, d - 1);
}

bool in_umbrella_side(const Site& offset, int i, double t) {
  if (offset[i] != 0) return false;
  for (int j = 0; j < offset.dim(); ++j) {
    if (j == i) continue;
    if (offset[j] < 1 || static_cast<double>(offset[j]) > t) return false;
  }
  return true;
}

std::vector<Site> umbrella_side(int i, double t, const Site& base) {
  const int d = base.dim();
  if (i < 0 || i >= d) throw std::invalid_argument("axis out of range");
  if (!(t >= 1)) throw std::invalid_argument("umbrella length must be >= 1");
  const auto m = static_cast<std::int64_t>(std::floor(t));
  Site lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = j == i ? 0 : 1;
    hi[j] = j == i ? 0 : m;
  }
  std::vector<Site> out;
  for_each_site(Box(lo, hi), [&](std::size_t, const Site& off) { out.push_back(base + off); });
  return out;
}

}  // namespace umbrella
