#pragma once

#include <cstdint>
#include <string_view>

#include "umbrella/lattice.hpp"

namespace umbrella {

// SplitMix64 finalizer (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Root seed -> named stream -> index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return mix64(mix64(seed ^ fnv1a(stream)) + kGolden * (index + 1));
}

inline std::uint64_t hash_site(std::uint64_t key, const Site& x) {
  std::uint64_t h = mix64(key);
  for (int j = 0; j < x.dim(); ++j) h = mix64(h + kGolden * static_cast<std::uint64_t>(x[j]) + static_cast<std::uint64_t>(j));
  return h;
}

// Uniform on the open interval (0,1).
constexpr double to_open_unit(std::uint64_t u) { return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53; }

// Counter-based sequential stream: value k is mix64(state + k * golden).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() {
    state_ += kGolden;
    return mix64(state_);
  }
  double uniform() { return to_open_unit((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace umbrella
