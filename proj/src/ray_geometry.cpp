#include "umbrella/ray_geometry.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace umbrella {

VN v_and_n_partial(const RayHandle& ray, const Site& x) {
  if (ray.anc.empty()) throw std::invalid_argument("empty ray");
  const auto D = static_cast<double>(l1_dist(x, ray.z));
  VN best{-D, 0, false};
  for (std::size_t n = 0; n < ray.anc.size(); ++n) {
    const double term = ray.radius(n) - static_cast<double>(l1_dist(x, ray.anc[n]));
    if (term >= best.v) {
      best.v = term;
      best.n = n;
    }
    // |x - alpha^m(z)| >= m - D, and m^beta - m decreases for m >= 1
    const auto m = static_cast<double>(n + 1);
    if (std::pow(m, ray.beta) - m + D < best.v) {
      best.certified = true;
      break;
    }
  }
  return best;
}

VN v_and_n(const RayHandle& ray, const Site& x) {
  VN r = v_and_n_partial(ray, x);
  if (!r.certified) {
    const auto D = static_cast<double>(l1_dist(x, ray.z));
    std::size_t need = ray.anc.size();
    while (std::pow(static_cast<double>(need), ray.beta) - static_cast<double>(need) + D >= r.v) ++need;
    throw RayTooShort("v_z search at " + x.str() + " needs ray depth " + std::to_string(need) + ", have " +
                      std::to_string(ray.anc.size() - 1));
  }
  return r;
}

Drift drift_directions(const RayHandle& ray, const Site& x, std::size_t n) {
  if (n >= ray.anc.size()) throw std::invalid_argument("drift_directions: index beyond ray");
  Drift out;
  if (n + 1 < ray.anc.size())
    out.r = step_between(ray.anc[n], ray.anc[n + 1]);
  else if (n > 0)
    out.r = step_between(ray.anc[n - 1], ray.anc[n]);
  else
    throw std::invalid_argument("drift_directions: single-point ray");
  const Site& t = ray.anc[n];
  if (x == t) {
    out.s = out.r;
    return out;
  }
  for (int j = 0; j < x.dim(); ++j) {
    if (x[j] != t[j]) {
      out.s = Direction{j, t[j] > x[j] ? 1 : -1};
      return out;
    }
  }
  return out;
}

C20 solve_c20(int d, double beta) {
  if (d < 2 || !(beta > 0 && beta < 1)) throw std::invalid_argument("solve_c20: need d >= 2 and 0 < beta < 1");
  const double target = std::sqrt(static_cast<double>(d));
  auto f = [&](double c) { return std::pow(c, -beta) * (c - 1); };
  double lo = 1, hi = 2;
  while (f(hi) <= target) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  C20 out;
  out.c22 = hi * (1 + 1e-10);
  out.c20 = 2 + static_cast<double>(d) * d * std::pow(out.c22, beta);
  return out;
}

Tube::Tube(const RayHandle& ray, int d) : ray_(ray), d_(d) {
  std::vector<Site> members;
  for (std::size_t n = 0; n < ray_.core_steps; ++n) {
    const auto r = ray_.int_radius(n);
    for (auto& o : l1_ball_offsets(d, r)) members.push_back(ray_.anc[n] + o);
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  sites_ = std::move(members);
  index_.reserve(sites_.size() * 2);
  for (std::size_t k = 0; k < sites_.size(); ++k) index_.emplace(sites_[k], k);

  // multi-source BFS from the complement
  u_.assign(sites_.size(), 0);
  std::deque<std::size_t> q;
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    for (int j = 0; j < d && u_[k] == 0; ++j)
      for (int sgn : {+1, -1}) {
        Site y = sites_[k];
        y[j] += sgn;
        if (!contains(y)) {
          u_[k] = 1;
          q.push_back(k);
          break;
        }
      }
  }
  while (!q.empty()) {
    const auto k = q.front();
    q.pop_front();
    for (int j = 0; j < d; ++j)
      for (int sgn : {+1, -1}) {
        Site y = sites_[k];
        y[j] += sgn;
        const auto m = find(y);
        if (m != npos && u_[m] == 0) {
          u_[m] = u_[k] + 1;
          q.push_back(m);
        }
      }
  }

  vn_.resize(sites_.size());
  drift_.resize(sites_.size());
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    vn_[k] = v_and_n_partial(ray_, sites_[k]);
    drift_[k] = drift_directions(ray_, sites_[k], vn_[k].n);
  }
}

std::size_t Tube::find(const Site& x) const {
  auto it = index_.find(x);
  return it == index_.end() ? npos : it->second;
}

std::int64_t u_distance(const Tube& tube, const Site& x) {
  const auto k = tube.find(x);
  return k == Tube::npos ? 0 : tube.u(k);
}

}  // namespace umbrella
