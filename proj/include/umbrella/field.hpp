#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "umbrella/lattice.hpp"

namespace umbrella {

struct ModelParams {
  int d = 2;
  int n0 = 3;
  double theta = 6.0;
  double gamma = 2.0 / 3.0;
  double beta = 0.1;
  Window window;
  std::uint64_t seed = 1;

  static ModelParams preset(int d);
  double tail_mass() const;  // theta * n0^-d
};

struct Violation {
  std::string rule;
  std::string detail;
};

std::vector<Violation> validate_params(const ModelParams& p);
void require_valid(const ModelParams& p);

double sample_L_from_uniform(double u, const ModelParams& p);
double sample_L(const Site& x, const ModelParams& p, std::uint64_t key);

inline constexpr std::size_t kDefaultSiteBudget = std::size_t{1} << 28;

class LField {
 public:
  LField() = default;
  LField(Box box, std::uint64_t key, std::vector<double> values);

  const Box& box() const { return box_; }
  std::uint64_t key() const { return key_; }
  double at(const Site& x) const { return values_[box_.index(x)]; }
  double at(std::size_t idx) const { return values_[idx]; }
  const std::vector<double>& values() const { return values_; }

  void write(std::ostream& os) const;
  static LField read(std::istream& is);

 private:
  Box box_;
  std::uint64_t key_ = 0;
  std::vector<double> values_;
};

// key selects the independent copy (e.g. one per forest); the box is usually window.outer().
LField generate_field(const ModelParams& p, const Box& box, std::uint64_t key,
                      std::size_t site_budget = kDefaultSiteBudget);
LField generate_field(const ModelParams& p, std::size_t site_budget = kDefaultSiteBudget);

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace umbrella
