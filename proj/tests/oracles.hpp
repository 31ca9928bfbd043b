#pragma once

// Test-side reference computations. Nothing here calls into the library
// code it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "kram/rational.hpp"

namespace oracle {

using kram::BigInt;
using kram::Rational;

inline BigInt factorial(int n) {
  BigInt out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

// Multiplicative formula, independent of any Pascal-triangle code.
inline BigInt choose(int n, int j) {
  BigInt out = 1;
  for (int i = 1; i <= j; ++i) out = out * (n - j + i) / i;
  return out;
}

// sum_{j=0}^{n} C(n,j) (-1)^j (x - j)^k evaluated directly at a rational x.
inline Rational alternating_sum_at(int n, int k, const Rational& x) {
  Rational s;
  for (int j = 0; j <= n; ++j) {
    Rational term = Rational(choose(n, j), BigInt(1)) * (x - Rational(j)).pow(static_cast<unsigned>(k));
    if (j % 2 == 1) term = -term;
    s += term;
  }
  return s;
}

// Coefficients (ascending) of the unique polynomial of degree < xs.size()
// through the points, by Gauss-Jordan elimination on the Vandermonde system.
inline std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  const std::size_t n = xs.size();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    Rational p(1);
    for (std::size_t c = 0; c < n; ++c) {
      m[r][c] = p;
      p *= xs[r];
    }
    m[r][n] = ys[r];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (m[pivot][c].is_zero()) ++pivot;
    std::swap(m[pivot], m[c]);
    const Rational inv = Rational(1) / m[c][c];
    for (auto& v : m[c]) v *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c].is_zero()) continue;
      const Rational f = m[r][c];
      for (std::size_t j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<Rational> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = m[r][n];
  return out;
}

inline double relu_pow(double x, int k) { return x > 0.0 ? std::pow(x, k) : 0.0; }

// max |f - g| over points+1 uniform samples of [lo, hi].
inline double dense_sup(const std::function<double(double)>& f, const std::function<double(double)>& g, double lo,
                        double hi, int points) {
  double err = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / points;
    err = std::max(err, std::abs(f(x) - g(x)));
  }
  return err;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Fixed-seed generator shared by the property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  // p/q with |p| <= num_bound and 1 <= q <= den_bound.
  Rational rational(int num_bound, int den_bound) {
    return Rational(BigInt(integer(-num_bound, num_bound)), BigInt(integer(1, den_bound)));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
