#include "umbrella/field.hpp"

#include <cmath>
#include <sstream>

#include "umbrella/io.hpp"
#include "umbrella/rng.hpp"

namespace umbrella {

namespace {
// slack for inequalities that hold with equality at the presets (27/0.3 is not exact in binary)
constexpr double kRelTol = 1e-9;

bool leq(double a, double b) { return a <= b + kRelTol * std::max(std::abs(a), std::abs(b)); }
}  // namespace

ModelParams ModelParams::preset(int d) {
  ModelParams p;
  p.d = d;
  if (d == 2) {
    p.n0 = 3;
    p.theta = 6.0;
    p.gamma = 2.0 / 3.0;
    p.beta = 0.1;
  } else if (d == 3) {
    p.n0 = 7;
    p.theta = 90.0;
    p.gamma = 0.3;
    p.beta = 0.1;
  } else {
    throw std::invalid_argument("no preset for d=" + std::to_string(d));
  }
  p.window = cube_window(d, 64, 32);
  return p;
}

double ModelParams::tail_mass() const { return theta * std::pow(static_cast<double>(n0), -d); }

std::vector<Violation> validate_params(const ModelParams& p) {
  std::vector<Violation> out;
  auto fail = [&](std::string rule, std::string detail) { out.push_back({std::move(rule), std::move(detail)}); };
  if (p.d < 2 || p.d > kMaxDim) {
    fail("dimension", "d must lie in [2," + std::to_string(kMaxDim) + "], got " + std::to_string(p.d));
    return out;
  }
  if (p.n0 < 1) fail("n0", "n0 must be a positive integer");
  if (!(p.theta > 0)) fail("theta", "theta must be positive");
  if (!(p.gamma > 0)) fail("gamma", "gamma must be positive");

  const double d = p.d;
  const double n0d = std::pow(static_cast<double>(p.n0), d);
  if (!leq(p.theta, n0d)) {
    std::ostringstream os;
    os << "n0^d >= theta fails: " << n0d << " < " << p.theta;
    fail("tail-constant upper", os.str());
  }
  if (p.gamma > 0 && !leq(std::pow(d, d) / p.gamma, p.theta)) {
    std::ostringstream os;
    os << "theta >= d^d/gamma fails: " << p.theta << " < " << std::pow(d, d) / p.gamma;
    fail("tail-constant lower", os.str());
  }
  for (std::int64_t n = std::max(p.n0, 1); n <= p.n0 + 64; ++n) {
    const double lhs = p.gamma * std::pow(static_cast<double>(n), d - 1);
    const auto rhs = static_cast<double>(orthant_sphere_count(p.d, n));
    if (!leq(lhs, rhs)) {
      std::ostringstream os;
      os << "gamma*n^(d-1) <= #orthant sphere fails at n=" << n << ": " << lhs << " > " << rhs;
      fail("orthant sphere", os.str());
      break;
    }
  }
  if (p.d >= 3) {
    const double bmax = (d - 2) / (2 * d);
    if (!(p.beta > 0 && p.beta < bmax)) {
      std::ostringstream os;
      os << "beta must lie in (0, " << bmax << "), got " << p.beta;
      fail("beta range", os.str());
    }
  } else if (!(p.beta > 0 && p.beta < 1)) {
    fail("beta range", "beta must lie in (0,1)");
  }
  if (p.window.lo.dim() != p.d || p.window.hi.dim() != p.d) {
    fail("window", "window dimension does not match d");
  } else {
    for (int j = 0; j < p.d; ++j)
      if (p.window.hi[j] < p.window.lo[j]) fail("window", "window is empty along axis " + std::to_string(j));
  }
  if (p.window.margin < 0) fail("margin", "margin must be nonnegative");
  return out;
}

void require_valid(const ModelParams& p) {
  auto v = validate_params(p);
  if (v.empty()) return;
  std::string msg = "invalid parameters:";
  for (auto& e : v) msg += "\n  [" + e.rule + "] " + e.detail;
  throw std::invalid_argument(msg);
}

double sample_L_from_uniform(double u, const ModelParams& p) {
  const double tail = p.tail_mass();
  if (u < tail) return std::pow(p.theta / u, 1.0 / p.d);
  return 1.0 + (p.n0 - 1.0) * (1.0 - u) / (1.0 - tail);
}

double sample_L(const Site& x, const ModelParams& p, std::uint64_t key) {
  return sample_L_from_uniform(to_open_unit(hash_site(key, x)), p);
}

LField::LField(Box box, std::uint64_t key, std::vector<double> values)
    : box_(std::move(box)), key_(key), values_(std::move(values)) {
  if (values_.size() != box_.volume()) throw std::invalid_argument("field size does not match box");
}

void LField::write(std::ostream& os) const {
  io::put_magic(os, "UMBF", 1);
  io::put_box(os, box_);
  io::put<std::uint64_t>(os, key_);
  io::put_array(os, values_);
}

LField LField::read(std::istream& is) {
  if (io::expect_magic(is, "UMBF") != 1) throw io::FormatError("unsupported UMBF version");
  Box b = io::get_box(is);
  auto key = io::get<std::uint64_t>(is);
  std::vector<double> v;
  io::get_array(is, v, b.volume());
  return LField(b, key, std::move(v));
}

LField generate_field(const ModelParams& p, const Box& box, std::uint64_t key, std::size_t site_budget) {
  if (box.volume() > site_budget)
    throw CapacityError("field box has " + std::to_string(box.volume()) + " sites, budget is " +
                        std::to_string(site_budget));
  std::vector<double> v(box.volume());
  for_each_site(box, [&](std::size_t idx, const Site& x) { v[idx] = sample_L(x, p, key); });
  return LField(box, key, std::move(v));
}

LField generate_field(const ModelParams& p, std::size_t site_budget) {
  require_valid(p);
  return generate_field(p, p.window.outer(), derive_seed(p.seed, "field", 1), site_budget);
}

}  // namespace umbrella
