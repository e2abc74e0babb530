#include <doctest.h>

#include <cmath>
#include <sstream>

#include "umbrella/forest.hpp"
#include "umbrella/oracle.hpp"
#include "umbrella/rng.hpp"

using namespace umbrella;

namespace {
LField constant_field(const Box& box, double v) { return LField(box, 0, std::vector<double>(box.volume(), v)); }

LField hand_field() {
  const Box box = Box::cube(2, -12, 12);
  std::vector<double> v(box.volume(), 1.5);
  v[box.index(Site{0, -1})] = 10.0;
  return LField(box, 0, std::move(v));
}

LField negated(const LField& f) {
  const Box nb(-f.box().hi(), -f.box().lo());
  std::vector<double> v(nb.volume());
  for_each_site(nb, [&](std::size_t idx, const Site& x) { v[idx] = f.at(-x); });
  return LField(nb, f.key(), std::move(v));
}
}  // namespace

TEST_CASE("hand built field") {
  const auto f = hand_field();
  auto l0 = lambda(Site{0, 0}, 0, f, 8);
  auto l1 = lambda(Site{0, 0}, 1, f, 8);
  CHECK(l0.value == 10.0);
  CHECK(l1.value == 1.5);
  CHECK(l0.exact);
  const double lv[] = {l0.value, l1.value};
  CHECK(choose_direction(lv).axis == 1);

  const Box win = Box::cube(2, -4, 4);
  auto forest = build_forest(f, win, +1, 8);
  CHECK(forest.parent(Site{0, 0}) == Site{0, 1});
  // the tall umbrella covers (0,0)..(0,9) on side 1
  for (int k = 0; k <= 4; ++k) CHECK(lambda(Site{0, k}, 0, f, 12).value == 10.0);
}

TEST_CASE("constant field") {
  const auto f = constant_field(Box::cube(3, -6, 6), 1.5);
  for (int i = 0; i < 3; ++i) CHECK(lambda(Site{0, 0, 0}, i, f, 4).value == 1.5);
  auto forest = build_forest(f, Box::cube(3, -2, 2), +1, 4);
  // every site ties; smallest axis wins and is flagged
  CHECK(forest.axis(Site{0, 0, 0}) == 0);
  CHECK(forest.uncertain_count() == forest.window().volume());
}

TEST_CASE("direction choice") {
  const double a[] = {10, 1.5};
  const double b[] = {3, 3};
  const double c[] = {5, 2, 7};
  const double e[] = {2, 5, 2};
  CHECK(choose_direction(a).axis == 1);
  CHECK_FALSE(choose_direction(a).tie);
  CHECK(choose_direction(b).axis == 0);
  CHECK(choose_direction(b).tie);
  CHECK(choose_direction(c).axis == 1);
  CHECK(choose_direction(e).axis == 0);
  CHECK(choose_direction(e).tie);
}

TEST_CASE("stamped forest matches brute force lambda") {
  for (int d = 2; d <= 3; ++d)
    for (int zeta : {+1, -1}) {
      auto p = ModelParams::preset(d);
      p.seed = 11 + d;
      const std::int64_t side = d == 2 ? 9 : 5;
      p.window = cube_window(d, side, 2 * side);
      const auto field = generate_field(p);
      const std::int64_t R = 2 * side;
      const Box win = p.window.box();
      auto forest = build_forest(field, win, zeta, R);
      for_each_site(win, [&](std::size_t idx, const Site& x) {
        std::vector<double> bl;
        for (int i = 0; i < d; ++i) {
          bl.push_back(oracle::brute_lambda(x, i, field, zeta, R));
          CHECK(lambda(x, i, field, R, zeta).value == bl.back());
          // radius reaching past the box: the untruncated supremum over the known field
          auto full = lambda(x, i, field, 4 * side, zeta);
          CHECK(full.value == oracle::brute_lambda(x, i, field, zeta));
          CHECK_FALSE(full.exact);
        }
        CHECK(forest.axis(idx) == choose_direction(bl).axis);
        CHECK_FALSE(forest.uncertain(idx));
      });
    }
}

TEST_CASE("on-the-fly field gives the same forest") {
  for (int d = 2; d <= 3; ++d)
    for (int zeta : {+1, -1}) {
      auto p = ModelParams::preset(d);
      p.seed = 5;
      const std::int64_t side = d == 2 ? 24 : 8, R = d == 2 ? 40 : 16;
      p.window = cube_window(d, side, R);
      const auto key = derive_seed(p.seed, "field", 1);
      const auto field = generate_field(p, p.window.outer(), key);
      const Box win = p.window.box();
      auto a = build_forest(field, win, zeta, R);
      auto b = build_forest(p, key, win, zeta, R);
      CHECK(a.codes() == b.codes());
    }
}

TEST_CASE("reflection symmetry") {
  auto p = ModelParams::preset(2);
  p.window = cube_window(2, 20, 16);
  p.window.lo = Site{-10, -10};
  p.window.hi = Site{9, 9};
  const auto f = generate_field(p);
  const auto nf = negated(f);
  const Box win = p.window.box();
  const Box nwin(-win.hi(), -win.lo());
  auto plus = build_forest(f, win, +1, 16);
  auto minus = build_forest(nf, nwin, -1, 16);
  for_each_site(win, [&](std::size_t, const Site& x) { CHECK(minus.parent(-x) == -plus.parent(x)); });
}

TEST_CASE("directedness and truncation") {
  auto p = ModelParams::preset(2);
  p.window = cube_window(2, 40, 64);
  p.seed = 3;
  const auto f1 = generate_field(p);
  p.seed = 4;
  const auto f2 = generate_field(p);
  auto a = build_forest(f1, p.window.box(), +1, 64);
  auto b = build_forest(f2, p.window.box(), -1, 64);
  for_each_site(p.window.box(), [&](std::size_t, const Site& x) {
    CHECK(a.parent(x).coord_sum() == x.coord_sum() + 1);
    CHECK(b.parent(x).coord_sum() == x.coord_sum() - 1);
  });
  CHECK_THROWS_AS(build_forest(f1, p.window.box(), +1, 65), MarginError);

  // radius 32 vs 64: disagreements bounded by the miss bound
  auto c = build_forest(f1, p.window.box(), +1, 32);
  std::size_t diff = 0;
  for (std::size_t k = 0; k < a.codes().size(); ++k) diff += a.axis(k) != c.axis(k);
  CHECK(static_cast<double>(diff) / a.codes().size() <= 2 * lambda_miss_bound(p, 32));
}

TEST_CASE("miss bound scales like 1/R") {
  auto p = ModelParams::preset(2);
  const double b32 = lambda_miss_bound(p, 32), b64 = lambda_miss_bound(p, 64);
  CHECK(b32 == doctest::Approx(6.0 / 32).epsilon(0.05));
  CHECK(b64 == doctest::Approx(b32 / 2).epsilon(0.05));
}

TEST_CASE("example 1 forest") {
  const Box win = Box::cube(2, 0, 999);
  auto f = example1_forest(5, win);
  auto g = example1_forest(5, win);
  CHECK(f.codes() == g.codes());
  std::size_t ones = 0;
  for (std::size_t k = 0; k < win.volume(); ++k) ones += f.axis(k) == 0;
  const double N = static_cast<double>(win.volume());
  CHECK(std::abs(ones / N - 0.5) <= 5 * std::sqrt(0.25 / N));
}

TEST_CASE("forest dump round trip") {
  auto f = example1_forest(9, Box::cube(3, -2, 3), -1);
  std::stringstream ss;
  f.write(ss);
  auto g = Forest::read(ss);
  CHECK(g.codes() == f.codes());
  CHECK(g.zeta() == -1);
  CHECK(g.window() == f.window());
}
