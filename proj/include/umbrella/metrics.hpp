#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "umbrella/estimators.hpp"
#include "umbrella/forest.hpp"
#include "umbrella/rational.hpp"

namespace umbrella {

enum class Status : std::uint8_t { exact = 0, at_least = 1 };

// Per-site integer value with a censoring flag; used for both h and H.
class CensoredField {
 public:
  CensoredField() = default;
  explicit CensoredField(Box window) : window_(std::move(window)), value_(window_.volume(), 0), cens_(window_.volume(), 0) {}

  const Box& window() const { return window_; }
  std::int32_t value(std::size_t idx) const { return value_[idx]; }
  std::int32_t value(const Site& x) const { return value_[window_.index(x)]; }
  Status status(std::size_t idx) const { return cens_[idx] ? Status::at_least : Status::exact; }
  Status status(const Site& x) const { return status(window_.index(x)); }
  bool exact(std::size_t idx) const { return cens_[idx] == 0; }
  std::int32_t max_value() const;

  std::vector<std::int32_t>& values() { return value_; }
  std::vector<std::uint8_t>& censor_flags() { return cens_; }
  const std::vector<std::int32_t>& values() const { return value_; }
  const std::vector<std::uint8_t>& censor_flags() const { return cens_; }

  void write(std::ostream& os, const char (&magic)[5]) const;
  static CensoredField read(std::istream& is, const char (&magic)[5]);

 private:
  Box window_;
  std::vector<std::int32_t> value_;
  std::vector<std::uint8_t> cens_;
};

using HField = CensoredField;
using HInsField = CensoredField;

HField compute_h(const Forest& forest);

// Largest integer k with k <= h^beta, with a few ulps of slack so that exact
// powers such as 32^0.2 = 2 land on the integer.
std::int64_t ball_radius(std::int64_t h, double beta);
// Offsets of the closed l1 ball of integer radius r.
std::vector<Site> l1_ball_offsets(int d, std::int64_t r);

HInsField compute_H(const HField& h, double beta);

std::vector<Site> ray(const Forest& forest, const Site& x, std::size_t max_steps = SIZE_MAX);

// Exact histogram of censored samples; merges are associative.
class TailSamples {
 public:
  void add(std::int64_t value, Status s);
  void merge(const TailSamples& o);
  std::uint64_t total() const { return total_; }
  // count of samples known to be >= n, and count possibly >= n
  std::uint64_t count_geq_lower(std::int64_t n) const;
  std::uint64_t count_geq_upper(std::int64_t n) const;
  std::uint64_t censored() const;

 private:
  std::vector<std::uint64_t> exact_, cens_;
  std::uint64_t total_ = 0;
};

// Adds every site of the window shrunk by buffer.
void add_interior(TailSamples& t, const CensoredField& f, std::int64_t buffer);

struct TailRow {
  std::int64_t n = 0;
  std::uint64_t count_lo = 0, count_hi = 0, total = 0;
  double p_lo = 0, p_hi = 0;
  Interval ci;  // Wilson lower end of the lower bracket, upper end of the upper bracket
  double scaled_lo = 0, scaled_hi = 0;  // n^(d-1) * p
};

struct TailEstimate {
  int d = 2;
  std::vector<TailRow> rows;
};

TailEstimate tail_estimate(const TailSamples& samples, const std::vector<std::int64_t>& grid, int d);
void write_tails_csv(std::ostream& os, const TailEstimate& t);

struct Theorem1Constant {
  Rational c1;
  std::int64_t argmin = 1;
  bool monotone_tail = false;  // ratio nondecreasing from argmin to the end of the scan
};

Theorem1Constant theorem1_constant(int d, std::int64_t scan_to = 10000);

}  // namespace umbrella
