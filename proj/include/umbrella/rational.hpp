#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace umbrella {

// Nonnegative reduced fraction.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::uint64_t n, std::uint64_t d) : num(n), den(d) {
    if (d == 0) throw std::domain_error("zero denominator");
    const auto g = std::gcd(n, d);
    num = n / g;
    den = d / g;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  friend constexpr bool operator==(const Rational&, const Rational&) = default;
  friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const auto l = static_cast<unsigned __int128>(a.num) * b.den;
    const auto r = static_cast<unsigned __int128>(b.num) * a.den;
    return l <=> r;
  }
  friend constexpr Rational operator+(const Rational& a, const Rational& b) {
    const auto g = std::gcd(a.den, b.den);
    const unsigned __int128 n = static_cast<unsigned __int128>(a.num) * (b.den / g) +
                                static_cast<unsigned __int128>(b.num) * (a.den / g);
    const unsigned __int128 d = static_cast<unsigned __int128>(a.den / g) * b.den;
    return narrow(n, d);
  }
  friend constexpr Rational operator-(const Rational& a, const Rational& b) {
    if (a < b) throw std::domain_error("negative rational");
    const auto g = std::gcd(a.den, b.den);
    const unsigned __int128 n = static_cast<unsigned __int128>(a.num) * (b.den / g) -
                                static_cast<unsigned __int128>(b.num) * (a.den / g);
    const unsigned __int128 d = static_cast<unsigned __int128>(a.den / g) * b.den;
    return narrow(n, d);
  }
  friend constexpr Rational operator*(const Rational& a, const Rational& b) {
    return narrow(static_cast<unsigned __int128>(a.num) * b.num, static_cast<unsigned __int128>(a.den) * b.den);
  }

 private:
  static constexpr unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
      auto t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static constexpr Rational narrow(unsigned __int128 n, unsigned __int128 d) {
    const auto g = gcd128(n, d);
    n /= g;
    d /= g;
    if (n > UINT64_MAX || d > UINT64_MAX) throw std::overflow_error("rational overflow");
    return Rational(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d));
  }
};

}  // namespace umbrella
