#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "kram/errors.hpp"

namespace kram {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number in lowest terms with a positive denominator.
///
/// Backed by Boost.Multiprecision's cpp_rational, which normalizes after
/// every operation. Conversions to and from double are exact in the
/// double -> Rational direction and correctly rounded (ties to even) in the
/// other.
class Rational {
 public:
  Rational() = default;
  Rational(int v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Rational(const BigInt& v) : value_(v) {}
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw DomainError("rational with zero denominator");
    value_ = den < 0 ? boost::multiprecision::cpp_rational(-num, -den) : boost::multiprecision::cpp_rational(num, den);
  }

  /// Exact value of a finite double (every double is a dyadic rational).
  static Rational from_double(double d) {
    if (!std::isfinite(d)) throw DomainError("cannot represent non-finite double as a rational");
    if (d == 0.0) return Rational();
    int exp = 0;
    const double frac = std::frexp(d, &exp);  // d = frac * 2^exp, 0.5 <= |frac| < 1
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    exp -= 53;
    BigInt num(mant);
    if (exp >= 0) return Rational(BigInt(num << exp));
    return Rational(num, BigInt(1) << -exp);
  }

  /// Parses "[-]digits[.digits][e[+-]digits]" or "[-]p/q" exactly.
  static Rational parse(std::string_view s) {
    const auto fail = [&] { return DomainError("not a decimal or rational literal: '" + std::string(s) + "'"); };
    if (s.empty()) throw fail();
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      const Rational num = parse(s.substr(0, slash));
      const Rational den = parse(s.substr(slash + 1));
      if (den.is_zero()) throw fail();
      return num / den;
    }
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    BigInt digits = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool seen_point = false;
    for (; i < s.size(); ++i) {
      const char c = s[i];
      if (c >= '0' && c <= '9') {
        digits = digits * 10 + (c - '0');
        any_digit = true;
        if (seen_point) ++frac_digits;
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
    }
    if (!any_digit) throw fail();
    long long exp10 = 0;
    if (i < s.size()) {
      if (s[i] != 'e' && s[i] != 'E') throw fail();
      ++i;
      bool exp_negative = false;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) exp_negative = s[i++] == '-';
      if (i == s.size()) throw fail();
      for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw fail();
        exp10 = exp10 * 10 + (s[i] - '0');
        if (exp10 > 100000) throw fail();
      }
      if (exp_negative) exp10 = -exp10;
    }
    exp10 -= frac_digits;
    Rational out(digits);
    if (exp10 > 0) out *= Rational(BigInt(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exp10))));
    if (exp10 < 0) out /= Rational(BigInt(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-exp10))));
    return negative ? -out : out;
  }

  BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  BigInt denominator() const { return boost::multiprecision::denominator(value_); }

  bool is_zero() const { return value_ == 0; }
  int sign() const { return value_.sign(); }

  /// Correctly rounded (round-half-even) conversion; subnormal results may
  /// be double-rounded.
  double to_double() const {
    if (is_zero()) return 0.0;
    BigInt num = numerator();
    const BigInt den = denominator();
    const bool negative = num < 0;
    if (negative) num = -num;
    const long nbits = static_cast<long>(boost::multiprecision::msb(num)) + 1;
    const long dbits = static_cast<long>(boost::multiprecision::msb(den)) + 1;
    // Scale so the integer quotient carries 55 or 56 significant bits.
    const long shift = 55 - (nbits - dbits);
    BigInt q;
    BigInt rem;
    if (shift >= 0) {
      boost::multiprecision::divide_qr(BigInt(num << shift), den, q, rem);
    } else {
      boost::multiprecision::divide_qr(num, BigInt(den << -shift), q, rem);
    }
    const bool sticky = rem != 0;
    auto bits = q.convert_to<std::uint64_t>();
    int width = 0;
    for (std::uint64_t t = bits; t != 0; t >>= 1) ++width;
    const int extra = width - 53;
    std::uint64_t mant = bits >> extra;
    const std::uint64_t low = bits & ((std::uint64_t{1} << extra) - 1);
    const std::uint64_t half = std::uint64_t{1} << (extra - 1);
    if (low > half || (low == half && (sticky || (mant & 1U) != 0))) ++mant;
    const long exponent = static_cast<long>(extra) - shift;
    if (exponent > std::numeric_limits<double>::max_exponent) {
      return negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    if (exponent < -2 * 1100) return negative ? -0.0 : 0.0;
    const double out = std::ldexp(static_cast<double>(mant), static_cast<int>(exponent));
    return negative ? -out : out;
  }

  /// "p/q", or "p" when the denominator is 1.
  std::string str() const {
    if (denominator() == 1) return numerator().str();
    return numerator().str() + "/" + denominator().str();
  }

  Rational pow(unsigned e) const {
    Rational out(1);
    Rational base = *this;
    while (e != 0) {
      if ((e & 1U) != 0) out *= base;
      e >>= 1;
      if (e != 0) base *= base;
    }
    return out;
  }

  Rational abs() const { return sign() < 0 ? -*this : *this; }

  Rational operator-() const { return Rational(Raw{}, -value_); }
  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw DomainError("rational division by zero");
    value_ /= o.value_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = a.value_.compare(b.value_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  struct Raw {};
  Rational(Raw, boost::multiprecision::cpp_rational v) : value_(std::move(v)) {}

  boost::multiprecision::cpp_rational value_;
};

}  // namespace kram
