#include "umbrella/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "umbrella/rng.hpp"

namespace umbrella::oracle {

double brute_lambda(const Site& x, int i, const LField& field, int zeta, std::int64_t R) {
  const int d = x.dim();
  double best = 0;
  for_each_site(field.box(), [&](std::size_t idx, const Site& y) {
    if (y[i] != x[i] || linf_norm(x - y) > R) return;
    const double L = field.at(idx);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const std::int64_t off = zeta * (x[j] - y[j]);
      if (off <= 0 || static_cast<double>(off) > L) return;
    }
    best = std::max(best, L);
  });
  return best;
}

namespace {
BruteH descend(const Forest& f, const Site& x) {
  const Box& w = f.window();
  const int d = w.dim();
  BruteH r;
  for (int j = 0; j < d; ++j)
    if (x[j] == (f.zeta() > 0 ? w.lo()[j] : w.hi()[j])) r.censored = true;
  for (int j = 0; j < d; ++j) {
    Site y = x;
    y[j] -= f.zeta();
    if (!w.contains(y) || f.parent(y) != x) continue;
    auto c = descend(f, y);
    r.value = std::max(r.value, c.value + 1);
    r.censored = r.censored || c.censored;
  }
  return r;
}
}  // namespace

BruteH brute_h(const Forest& forest, const Site& x) { return descend(forest, x); }

BruteH brute_H(const HField& h, double beta, const Site& x) {
  const Box& w = h.window();
  std::int64_t hmax = 0;
  for (auto v : h.values()) hmax = std::max<std::int64_t>(hmax, v);
  // distance k is within radius t^beta iff k^(1/beta) <= t
  auto within = [&](std::int64_t k, std::int64_t t) {
    return std::pow(static_cast<double>(k), 1.0 / beta) <= static_cast<double>(t) * (1 + 1e-12);
  };
  BruteH r;
  for_each_site(w, [&](std::size_t idx, const Site& y) {
    const std::int64_t k = l1_dist(x, y);
    const std::int64_t hy = h.value(idx);
    if (within(k, hy)) r.value = std::max(r.value, hy);
    if (!h.exact(idx) && within(k, std::max(hy, hmax))) r.censored = true;
  });
  // a tree outside the window sits at l1 distance >= depth + 1
  if (within(w.depth(x) + 1, hmax)) r.censored = true;
  return r;
}

std::int64_t brute_u(const Tube& tube, const Site& x) {
  if (!tube.contains(x)) return 0;
  const int d = tube.dim();
  Site lo = tube.site(0), hi = tube.site(0);
  for (auto& y : tube.sites())
    for (int j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], y[j] - 1);
      hi[j] = std::max(hi[j], y[j] + 1);
    }
  std::int64_t best = INT64_MAX;
  for_each_site(Box(lo, hi), [&](std::size_t, const Site& y) {
    if (!tube.contains(y)) best = std::min(best, l1_dist(x, y));
  });
  return best;
}

VN brute_vn(const RayHandle& ray, const Site& x) {
  VN best{-1e300, 0, true};
  for (std::size_t n = 0; n < ray.anc.size(); ++n) {
    const double v = std::pow(static_cast<double>(n), ray.beta) - static_cast<double>(l1_dist(x, ray.anc[n]));
    if (v >= best.v) best = {v, n, true};
  }
  return best;
}

namespace {
struct PathSum {
  const Tube& tube;
  int N;
  ExitPoint acc;

  void walk(const Site& y, int t, double prob) {
    const int d = tube.dim();
    const auto vn = brute_vn(tube.ray(), y);
    const auto row = omega_row(d, drift_directions(tube.ray(), y, vn.n));
    for (int c = 0; c < 2 * d; ++c) {
      const double w = prob * row.p[c].value();
      const Site next = y + Direction::from_code(static_cast<std::uint8_t>(c)).unit(d);
      if (!tube.contains(next)) {
        acc.p += w;
        acc.E += w * (t + 1);
        if (!certainly_outside(tube.ray(), next)) acc.censored += w;
      } else if (t + 1 < N) {
        walk(next, t + 1, w);
      }
    }
  }
};
}  // namespace

ExitPoint brute_exit(const Tube& tube, const Site& x, int N) {
  PathSum ps{tube, N, {N, 0, 0, 0}};
  if (!tube.contains(x)) {
    ps.acc.p = 1;
    return ps.acc;
  }
  if (N > 0) ps.walk(x, 0, 1.0);
  return ps.acc;
}

}  // namespace umbrella::oracle


namespace umbrella::oracle {

namespace {
std::string where(const Site& x, std::int64_t side, int zeta) {
  std::ostringstream os;
  os << "d=" << x.dim() << " side=" << side << " zeta=" << zeta << " x=" << x;
  return os.str();
}

void compare_tube(const Tube& t, const std::string& tag, SuiteResult& r, std::size_t cap) {
  auto miss = [&](std::string what, const Site& x) {
    if (r.mismatches.size() < cap) {
      std::ostringstream os;
      os << tag << " at " << x;
      r.mismatches.push_back({std::move(what), os.str()});
    }
  };
  for (std::size_t k = 0; k < t.size(); ++k) {
    ++r.u;
    if (t.u(k) != brute_u(t, t.site(k))) miss("u", t.site(k));
  }
  std::vector<std::vector<std::int64_t>> hz(t.size(), std::vector<std::int64_t>{0, 1, 2, 3, 4});
  const auto dp = tube_dp(t, hz);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.near_end(k)) continue;
    for (int N = 0; N <= 4; ++N) {
      ++r.dp;
      const auto b = brute_exit(t, t.site(k), N);
      const auto& g = dp.at[k][N];
      if (std::abs(g.p - b.p) > 1e-12 || std::abs(g.E - b.E) > 1e-12 || std::abs(g.censored - b.censored) > 1e-12)
        miss("dp N=" + std::to_string(N), t.site(k));
    }
  }
}
}  // namespace

SuiteResult run_suite(std::int64_t max_side, std::uint64_t seed, std::size_t cap) {
  SuiteResult r;
  for (int d = 2; d <= 3; ++d)
    for (std::int64_t side = 2; side <= max_side; ++side)
      for (int zeta : {+1, -1}) {
        auto p = ModelParams::preset(d);
        p.window = cube_window(d, side, 2 * side);
        const auto key = derive_seed(seed, "oracle", static_cast<std::uint64_t>(100 * d + side) * 2 + (zeta > 0));
        const auto field = generate_field(p, p.window.outer(), key);
        const Box win = p.window.box();
        const std::int64_t R = 2 * side;
        const auto forest = build_forest(field, win, zeta, R);
        auto miss = [&](std::string what, const Site& x) {
          if (r.mismatches.size() < cap) r.mismatches.push_back({std::move(what), where(x, side, zeta)});
        };
        for_each_site(win, [&](std::size_t idx, const Site& x) {
          std::vector<double> bl;
          for (int i = 0; i < d; ++i) {
            bl.push_back(brute_lambda(x, i, field, zeta, R));
            ++r.lambda;
            if (lambda(x, i, field, R, zeta).value != bl.back()) miss("lambda_" + std::to_string(i), x);
          }
          ++r.axis;
          if (forest.axis(idx) != choose_direction(bl).axis) miss("axis", x);
        });
        const auto h = compute_h(forest);
        for (double beta : {p.beta, 0.5}) {
          const auto H = compute_H(h, beta);
          for_each_site(win, [&](std::size_t idx, const Site& x) {
            const auto bh = brute_h(forest, x);
            ++r.h;
            if (h.value(idx) != bh.value || h.exact(idx) == bh.censored) miss("h", x);
            const auto bH = brute_H(h, beta, x);
            ++r.H;
            if (H.value(idx) != bH.value || H.exact(idx) == bH.censored) miss("H", x);
          });
          // a few rays per box, cut at the window
          const std::size_t stride = std::max<std::size_t>(win.volume() / 4, 1);
          for (std::size_t idx = 0; idx < win.volume(); idx += stride) {
            const Site z = win.site(idx);
            const auto ray = make_ray(forest, zeta > 0 ? 1 : 2, z, win, beta);
            compare_tube(Tube(ray, d), where(z, side, zeta) + " beta=" + std::to_string(beta), r, cap);
          }
        }
      }
  return r;
}

}  // namespace umbrella::oracle
