#include <doctest.h>

#include <cmath>
#include <sstream>

#include "umbrella/metrics.hpp"
#include "umbrella/oracle.hpp"

using namespace umbrella;

namespace {
Forest chain_forest() {
  const Box w = Box::cube(2, 0, 6);
  std::vector<std::uint8_t> codes(w.volume(), 1);
  for (std::int64_t a = 0; a <= 6; ++a) codes[w.index(Site{a, 2})] = 0;
  for (std::int64_t a = 1; a <= 3; ++a) codes[w.index(Site{a, 3})] = 0;
  return Forest(w, +1, codes);
}

Forest random_forest(int d, std::int64_t side, int zeta, std::uint64_t seed) {
  auto p = ModelParams::preset(d);
  p.seed = seed;
  p.window = cube_window(d, side, 3 * side);
  return build_forest(generate_field(p), p.window.box(), zeta, 3 * side);
}
}  // namespace

TEST_CASE("h on a hand built chain") {
  auto f = chain_forest();
  auto h = compute_h(f);
  CHECK(h.value(Site{1, 3}) == 0);
  CHECK(h.status(Site{1, 3}) == Status::exact);
  CHECK(h.value(Site{4, 3}) == 3);
  CHECK(h.status(Site{4, 3}) == Status::exact);
  // column 0 feeds in from the inflow face
  CHECK(h.status(Site{0, 5}) == Status::at_least);
}

TEST_CASE("h and H match brute force") {
  for (int d = 2; d <= 3; ++d)
    for (int zeta : {+1, -1})
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const std::int64_t side = d == 2 ? 9 : 7;
        auto f = random_forest(d, side, zeta, seed);
        auto h = compute_h(f);
        for (double beta : {0.1, 0.5, 0.9}) {
          auto H = compute_H(h, beta);
          for_each_site(f.window(), [&](std::size_t idx, const Site& x) {
            auto bh = oracle::brute_h(f, x);
            CHECK(h.value(idx) == bh.value);
            CHECK(h.exact(idx) == !bh.censored);
            auto bH = oracle::brute_H(h, beta, x);
            CHECK(H.value(idx) == bH.value);
            CHECK(H.exact(idx) == !bH.censored);
          });
        }
        // h recursion on exact sites
        for_each_site(f.window(), [&](std::size_t idx, const Site& x) {
          if (!h.exact(idx)) return;
          std::int32_t expect = 0;
          for (int j = 0; j < d; ++j) {
            Site y = x;
            y[j] -= zeta;
            if (f.window().contains(y) && f.parent(y) == x) expect = std::max(expect, h.value(y) + 1);
          }
          CHECK(h.value(idx) == expect);
          const auto p = f.parent_index(idx);
          if (p != Forest::npos && h.exact(p)) CHECK(h.value(p) >= h.value(idx) + 1);
        });
      }
}

TEST_CASE("H radius arithmetic") {
  CHECK(ball_radius(32, 0.2) == 2);
  CHECK(ball_radius(31, 0.2) == 1);
  CHECK(ball_radius(1024, 0.1) == 2);
  CHECK(ball_radius(1023, 0.1) == 1);
  CHECK(ball_radius(0, 0.3) == 0);

  const Box w = Box::cube(2, 0, 20);
  HField h(w);
  h.values()[w.index(Site{10, 10})] = 32;
  auto H = compute_H(h, 0.2);
  for_each_site(w, [&](std::size_t idx, const Site& x) {
    const auto dist = l1_dist(x, Site{10, 10});
    CHECK(H.value(idx) == (dist <= 2 ? 32 : 0));
  });

  HField zero(w);
  auto Z = compute_H(zero, 0.3);
  for (auto v : Z.values()) CHECK(v == 0);
}

TEST_CASE("H is monotone in h") {
  auto f = random_forest(2, 9, +1, 5);
  auto h = compute_h(f);
  auto H = compute_H(h, 0.5);
  auto h2 = h;
  for (auto& v : h2.values()) v += 3;
  auto H2 = compute_H(h2, 0.5);
  for (std::size_t k = 0; k < H.values().size(); ++k) CHECK(H2.value(k) >= H.value(k));
}

TEST_CASE("rays") {
  auto f = chain_forest();
  auto r = ray(f, Site{1, 3}, 2);
  REQUIRE(r.size() == 3);
  CHECK(r[1] == Site{2, 3});
  CHECK(ray(f, Site{3, 6}).size() == 1);  // parent (3,7) leaves the window
  auto g = random_forest(2, 9, +1, 8);
  auto rr = ray(g, Site{0, 0});
  for (std::size_t n = 0; n < rr.size(); ++n) CHECK(l1_norm(rr[n]) == static_cast<std::int64_t>(n));
}

TEST_CASE("tail brackets") {
  TailSamples t;
  for (int k = 0; k < 10; ++k) t.add(0, Status::exact);
  auto e = tail_estimate(t, {1}, 2);
  CHECK(e.rows[0].p_lo == 0);
  CHECK(e.rows[0].p_hi == 0);

  TailSamples s;
  s.add(5, Status::exact);
  s.add(2, Status::at_least);
  s.add(9, Status::at_least);
  s.add(1, Status::exact);
  auto est = tail_estimate(s, {1, 3, 6, 10}, 2);
  CHECK(est.rows[1].count_lo == 2);  // 5 and >=9
  CHECK(est.rows[1].count_hi == 3);  // plus >=2
  CHECK(est.rows[3].count_lo == 0);
  CHECK(est.rows[3].count_hi == 2);
  for (std::size_t k = 1; k < est.rows.size(); ++k) {
    CHECK(est.rows[k].count_lo <= est.rows[k - 1].count_lo);
    CHECK(est.rows[k].count_hi <= est.rows[k - 1].count_hi);
  }
  for (auto& r : est.rows) CHECK(r.count_lo <= r.count_hi);
  CHECK_THROWS(tail_estimate(TailSamples{}, {1}, 2));
}

TEST_CASE("theorem 1 constant") {
  auto c2 = theorem1_constant(2);
  CHECK(c2.c1 == Rational(1, 4));
  auto c3 = theorem1_constant(3);
  CHECK(c3.c1 == Rational(1, 6));
  CHECK(c3.argmin == 1);
  CHECK(c3.monotone_tail);
  auto c4 = theorem1_constant(4, 500);
  Rational best(1, 1);
  for (std::int64_t n = 1; n <= 500; ++n) best = std::min(best, Rational(static_cast<std::uint64_t>(n * n * n), sphere_count(4, n)));
  CHECK(c4.c1 == best);
}

TEST_CASE("censored field dump") {
  auto f = random_forest(2, 9, +1, 2);
  auto h = compute_h(f);
  std::stringstream ss;
  h.write(ss, "UMBH");
  auto g = CensoredField::read(ss, "UMBH");
  CHECK(g.values() == h.values());
  CHECK(g.censor_flags() == h.censor_flags());
}

TEST_CASE("oracle suite on small boxes") {
  auto r = oracle::run_suite(4, 9);
  for (auto& m : r.mismatches) CAPTURE(m.what + " " + m.where);
  CHECK(r.ok());
  CHECK(r.lambda > 0);
  CHECK(r.u > 0);
  CHECK(r.dp > 0);
}
