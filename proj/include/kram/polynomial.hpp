#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "kram/rational.hpp"

namespace kram {

/// Dense univariate polynomial with exact rational coefficients.
/// coefficients()[i] multiplies x^i; trailing zeros are always trimmed.
class Polynomial {
 public:
  static constexpr int kZeroDegree = std::numeric_limits<int>::min();

  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) { trim(); }

  static Polynomial constant(const Rational& c) { return Polynomial({c}); }

  /// (x - shift)^power, built by repeated multiplication.
  static Polynomial shifted_power(const Rational& shift, unsigned power) {
    const Polynomial linear({-shift, Rational(1)});
    Polynomial out = constant(Rational(1));
    for (unsigned i = 0; i < power; ++i) out = out * linear;
    return out;
  }

  const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  int degree() const noexcept { return is_zero() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1; }

  Rational coefficient(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(); }

  Rational operator()(const Rational& x) const {
    Rational acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial& operator+=(const Polynomial& o) {
    coeffs_.resize(std::max(coeffs_.size(), o.coeffs_.size()));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += o * Rational(-1); }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(const Polynomial& a, const Rational& s) {
    std::vector<Rational> out = a.coeffs_;
    for (auto& c : out) c *= s;
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
  }

  std::vector<Rational> coeffs_;
};

}  // namespace kram
