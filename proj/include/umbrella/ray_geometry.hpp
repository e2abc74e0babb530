#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "umbrella/pruning.hpp"

namespace umbrella {

struct RayTooShort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VN {
  double v = 0;
  std::size_t n = 0;
  bool certified = true;  // the search cutoff was reached inside the stored ray
};

// sup_n (n^beta - |x - alpha^n(z)|) and the largest attaining n. Throws RayTooShort
// when the stored ancestors end before the cutoff.
VN v_and_n(const RayHandle& ray, const Site& x);
// Same search over the stored ancestors only, reporting whether the cutoff was reached.
VN v_and_n_partial(const RayHandle& ray, const Site& x);

struct Drift {
  Direction r, s;
};

// r = alpha^{n+1}(z) - alpha^n(z); s steps toward alpha^n(z) along the lowest differing axis, s = r on the ray.
Drift drift_directions(const RayHandle& ray, const Site& x, std::size_t n);

struct C20 {
  double c20 = 0;
  double c22 = 0;
};

// Root of c^-beta (c - 1) = sqrt(d), nudged up by 1e-10 relative; c20 = 2 + d^2 c22^beta.
C20 solve_c20(int d, double beta);
inline double c21_from(const C20& c, double beta) { return c.c20 * std::pow(2.0, beta); }

// The part of InsRay(z) built from the in-core ancestors, with per-site geometry.
class Tube {
 public:
  Tube(const RayHandle& ray, int d);

  const RayHandle& ray() const { return ray_; }
  int dim() const { return d_; }
  std::size_t size() const { return sites_.size(); }
  const std::vector<Site>& sites() const { return sites_; }  // lexicographic order
  const Site& site(std::size_t k) const { return sites_[k]; }
  bool contains(const Site& x) const { return index_.count(x) != 0; }
  // member index, or npos
  std::size_t find(const Site& x) const;

  std::int64_t u(std::size_t k) const { return u_[k]; }
  const VN& vn(std::size_t k) const { return vn_[k]; }
  const Drift& drift(std::size_t k) const { return drift_[k]; }
  // geometry search hit the end of the stored ray; values are best-effort
  bool near_end(std::size_t k) const { return !vn_[k].certified; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  RayHandle ray_;
  int d_;
  std::vector<Site> sites_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
  std::vector<std::int64_t> u_;
  std::vector<VN> vn_;
  std::vector<Drift> drift_;
};

// BFS distance from x to the complement of the tube.
std::int64_t u_distance(const Tube& tube, const Site& x);

}  // namespace umbrella
