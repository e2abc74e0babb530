#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "umbrella/field.hpp"
#include "umbrella/rng.hpp"

using namespace umbrella;

TEST_CASE("presets validate") {
  CHECK(validate_params(ModelParams::preset(2)).empty());
  CHECK(validate_params(ModelParams::preset(3)).empty());
  auto p = ModelParams::preset(3);
  p.beta = 0.2;
  auto v = validate_params(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "beta range");
}

TEST_CASE("validation reports every violation") {
  auto p = ModelParams::preset(3);
  p.theta = 400;   // above n0^d
  p.gamma = 0.9;   // breaks the orthant bound
  p.beta = 0.5;
  auto v = validate_params(p);
  CHECK(v.size() == 3);
}

TEST_CASE("orthant bound is checked by enumeration") {
  // (n-1) >= (2/3) n holds from n = 3 on, fails at n = 2
  auto p = ModelParams::preset(2);
  p.n0 = 2;
  p.theta = 4;
  p.gamma = 1.0;  // theta >= 4/gamma = 4
  bool found = false;
  for (auto& e : validate_params(p)) found |= e.rule == "orthant sphere";
  CHECK(found);
}

TEST_CASE("inverse cdf") {
  const auto p = ModelParams::preset(2);
  CHECK(sample_L_from_uniform(1.0 / 6.0, p) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(p.tail_mass() == doctest::Approx(2.0 / 3.0));
  CHECK(sample_L_from_uniform(1.0 - 1e-15, p) > 1.0);
  CHECK(sample_L_from_uniform(1.0 - 1e-15, p) < 1.0 + 1e-12);
  double prev = INFINITY;
  for (int k = 1; k < 2000; ++k) {
    const double u = k / 2000.0;
    const double L = sample_L_from_uniform(u, p);
    CHECK(L < prev);
    prev = L;
    if (u < p.tail_mass()) CHECK(std::abs(p.theta * std::pow(L, -p.d) - u) <= 1e-12 * u);
  }
  const auto q = ModelParams::preset(3);
  for (double u : {1e-9, 1e-4, 0.1, 0.26}) {
    const double L = sample_L_from_uniform(u, q);
    CHECK(std::abs(q.theta * std::pow(L, -q.d) - u) <= 1e-12 * u);
  }
}

TEST_CASE("field determinism and margins") {
  auto p = ModelParams::preset(2);
  p.window = cube_window(2, 16, 16);
  auto a = generate_field(p);
  p.window.margin = 32;
  auto b = generate_field(p);
  for_each_site(a.box(), [&](std::size_t idx, const Site& x) { CHECK(a.at(idx) == b.at(x)); });

  p.seed = 2;
  auto c = generate_field(p);
  std::size_t diff = 0;
  for_each_site(c.box(), [&](std::size_t idx, const Site& x) { diff += c.at(idx) != b.at(x); });
  CHECK(diff > c.box().volume() * 99 / 100);

  std::stringstream ss;
  a.write(ss);
  auto r = LField::read(ss);
  CHECK(r.box() == a.box());
  CHECK(r.values() == a.values());
  CHECK(r.key() == a.key());
}

TEST_CASE("tail fraction concentration") {
  auto p = ModelParams::preset(2);
  p.window = cube_window(2, 1000, 0);
  auto f = generate_field(p);
  const double N = static_cast<double>(f.box().volume());
  for (double t : {3.0, 6.0, 12.0}) {
    std::size_t c = 0;
    for (double v : f.values()) c += v > t;
    const double q = p.theta * std::pow(t, -2);
    CHECK(std::abs(c / N - q) <= 5 * std::sqrt(q * (1 - q) / N));
  }
  CHECK(*std::min_element(f.values().begin(), f.values().end()) > 1.0);
}

TEST_CASE("site budget") {
  auto p = ModelParams::preset(2);
  p.window = cube_window(2, 100, 0);
  CHECK_THROWS_AS(generate_field(p, 100), CapacityError);
}

TEST_CASE("rng stream helpers") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  SplitMix64 g(7), h(7);
  for (int k = 0; k < 10; ++k) CHECK(g() == h());
  for (int k = 0; k < 1000; ++k) {
    double u = g.uniform();
    CHECK(u > 0);
    CHECK(u < 1);
  }
}
