#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "umbrella/forest.hpp"
#include "umbrella/metrics.hpp"

namespace umbrella {

enum class Tri : std::uint8_t { out = 0, in = 1, unknown = 2 };

// One tri-state membership layer over a window.
class Membership {
 public:
  Membership() = default;
  explicit Membership(Box window, Tri fill = Tri::out)
      : window_(std::move(window)), s_(window_.volume(), static_cast<std::uint8_t>(fill)) {}

  const Box& window() const { return window_; }
  Tri at(std::size_t idx) const { return static_cast<Tri>(s_[idx]); }
  Tri at(const Site& x) const { return at(window_.index(x)); }
  // sites outside the window are reported as unknown
  Tri at_or_unknown(const Site& x) const { return window_.contains(x) ? at(x) : Tri::unknown; }
  bool in(std::size_t idx) const { return at(idx) == Tri::in; }
  bool in(const Site& x) const { return window_.contains(x) && at(x) == Tri::in; }
  void set(std::size_t idx, Tri t) { s_[idx] = static_cast<std::uint8_t>(t); }
  std::size_t count(Tri t) const;
  const std::vector<std::uint8_t>& states() const { return s_; }

  friend bool operator==(const Membership&, const Membership&) = default;

 private:
  Box window_;
  std::vector<std::uint8_t> s_;
};

const char* tri_name(Tri t);

// T-tilde_i: h_i(x) > H_j(y) for every y in B(x, h_i(x)^beta).
Membership tilde_T(const HField& h_i, const HInsField& H_j, double beta);

// Default core: window shrunk by the widths of the two censoring bands plus one.
Box default_core(const HField& h_i, const HField& h_j, double beta);

// T_i by the frontier rule. OUT if any in-window ancestor is OUT of T-tilde;
// otherwise IN when x lies in the core and every ancestor inside the core is IN
// of T-tilde, else UNKNOWN. Every IN site carries the frontier caveat: its line
// was verified only up to the core exit.
Membership prune_to_infinite(const Forest& forest, const Membership& tildeT, const Box& core);

// Frequency of lines with an ancestor outside T-tilde at depth n in [k, depth_cap].
struct DepthViolation {
  std::int64_t k = 0;
  std::uint64_t certain = 0;   // some a^n(x) certainly OUT
  std::uint64_t possible = 0;  // OUT or UNKNOWN
  std::uint64_t lines = 0;
};
// Starts are the sites of `starts` whose first depth_cap ancestors stay in the window.
std::vector<DepthViolation> depth_violations(const Forest& forest, const Membership& tildeT, const Box& starts,
                                             const std::vector<std::int64_t>& ks, std::int64_t depth_cap);

// IN sites of T with no IN child.
std::vector<Site> leaves(const Membership& T, const Forest& forest);

struct RayHandle {
  Site z;
  int forest = 1;  // 1 or 2
  int zeta = 1;
  double beta = 0.5;
  // alpha^0(z), alpha^1(z), ... while inside the core, then the exit step
  std::vector<Site> anc;
  std::size_t core_steps = 0;  // number of entries of anc inside the core

  double radius(std::size_t n) const;
  std::int64_t int_radius(std::size_t n) const;
};

RayHandle make_ray(const Forest& forest, int forest_id, const Site& z, const Box& core, double beta);

struct Insulation {
  Membership B, C;
  std::vector<RayHandle> rays;
  std::uint64_t c_outside_b = 0;  // certain C sites not certainly in B; must be zero
};

Insulation insulate(const Membership& T, const HField& h, const Forest& forest, int forest_id, const Box& core,
                    double beta);

struct DisjointReport {
  std::uint64_t certain_overlaps = 0;
  std::uint64_t unknown_overlaps = 0;
  std::vector<Site> witnesses;  // first few certain overlaps
  bool disjoint() const { return certain_overlaps == 0; }
};

DisjointReport check_disjoint(const Membership& B1, const Membership& B2, std::size_t max_witnesses = 16);

// a_1(x) on certain T_1, a_2(x) on certain T_2, nothing otherwise.
std::optional<Site> alpha(const Site& x, const Membership& T1, const Membership& T2, const Forest& f1,
                          const Forest& f2);

struct NamedLayer {
  std::string name;
  Membership layer;
};

// "UMBM" dump: box, layer count, then per layer its name and (state, run length) pairs.
void write_membership(std::ostream& os, const std::vector<NamedLayer>& layers);
std::vector<NamedLayer> read_membership(std::istream& is);

}  // namespace umbrella
