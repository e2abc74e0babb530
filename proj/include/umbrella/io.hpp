#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "umbrella/lattice.hpp"

// Little-endian binary helpers for the dump formats. The build targets are
// little-endian, so PODs are written as-is.
namespace umbrella::io {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw FormatError("truncated dump");
  return v;
}

template <class T>
void put_array(std::ostream& os, const std::vector<T>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void get_array(std::istream& is, std::vector<T>& v, std::size_t n) {
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw FormatError("truncated dump payload");
}

inline void put_magic(std::ostream& os, const char (&m)[5], std::uint32_t version) {
  os.write(m, 4);
  put<std::uint32_t>(os, version);
}

inline std::uint32_t expect_magic(std::istream& is, const char (&m)[5]) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, m, 4) != 0) throw FormatError(std::string("bad magic, expected ") + m);
  return get<std::uint32_t>(is);
}

inline void put_box(std::ostream& os, const Box& b) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(b.dim()));
  for (int j = 0; j < b.dim(); ++j) {
    put<std::int64_t>(os, b.lo()[j]);
    put<std::int64_t>(os, b.hi()[j]);
  }
}

inline Box get_box(std::istream& is) {
  auto d = static_cast<int>(get<std::uint32_t>(is));
  if (d < 1 || d > kMaxDim) throw FormatError("bad dimension in dump");
  Site lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = get<std::int64_t>(is);
    hi[j] = get<std::int64_t>(is);
  }
  return Box(lo, hi);
}

}  // namespace umbrella::io
