#pragma once

#include <string>
#include <vector>

#include "kram/polynomial.hpp"

namespace kram {

/// C(n, j) exactly.
inline Rational binomial(int n, int j) {
  if (n < 0 || j < 0 || j > n) {
    throw DomainError("binomial(" + std::to_string(n) + ", " + std::to_string(j) + ") requires 0 <= j <= n");
  }
  BigInt out = 1;
  for (int i = 1; i <= j; ++i) out = out * (n - j + i) / i;
  return Rational(out);
}

namespace detail {

// sum_{j=0}^{n} C(n, j) (-1)^j (x - j)^k as an expanded polynomial.
inline Polynomial alternating_shift_sum(int n, int k) {
  Polynomial sum;
  for (int j = 0; j <= n; ++j) {
    const Rational c = (j % 2 == 0 ? binomial(n, j) : -binomial(n, j));
    sum += Polynomial::shifted_power(Rational(j), static_cast<unsigned>(k)) * c;
  }
  return sum;
}

inline void require_positive_order(int k) {
  if (k < 1) throw DomainError("order k must be >= 1, got " + std::to_string(k));
}

}  // namespace detail

/// sum_{j=0}^{k+1} C(k+1,j) (-1)^j (x-j)^k, expanded exactly. The
/// (k+1)-st finite difference of a degree-k polynomial, so it must be zero.
inline Polynomial vanishing_identity_residual(int k) {
  detail::require_positive_order(k);
  return detail::alternating_shift_sum(k + 1, k);
}

/// The constant value of sum_{j=0}^{k} C(k,j) (-1)^j (x-j)^k.
///
/// The x-dependence cancels exactly; the surviving constant is k! (the
/// k-th backward difference of x^k). Note this is +1, not -1, at k = 1.
inline Rational constant_identity_value(int k) {
  detail::require_positive_order(k);
  const Polynomial p = detail::alternating_shift_sum(k, k);
  if (p.degree() > 0) {
    throw InvariantViolation("constant identity expansion has degree " + std::to_string(p.degree()) +
                             " at k=" + std::to_string(k));
  }
  return p.coefficient(0);
}

/// One row of the identity verification table.
struct IdentityCheck {
  int k = 0;
  bool residual_is_zero = false;
  Rational constant;
  Rational claimed_constant;  // the (-1)^k value this sum is often quoted as
  Rational factorial;         // k!
  bool pointwise_agrees = false;
};

/// Expands both identities for one k and cross-checks the constant by
/// evaluating the defining sums directly at a few rational points.
inline IdentityCheck check_identities(int k) {
  IdentityCheck row;
  row.k = k;
  row.residual_is_zero = vanishing_identity_residual(k).is_zero();
  row.constant = constant_identity_value(k);
  row.claimed_constant = Rational(k % 2 == 0 ? 1 : -1);
  BigInt f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  row.factorial = Rational(f);

  row.pointwise_agrees = true;
  for (const Rational& x : {Rational(-7, 3), Rational(0), Rational(1, 2), Rational(11)}) {
    Rational vanishing;
    Rational constant;
    for (int j = 0; j <= k + 1; ++j) {
      const Rational sign(j % 2 == 0 ? 1 : -1);
      const Rational p = (x - Rational(j)).pow(static_cast<unsigned>(k));
      vanishing += sign * binomial(k + 1, j) * p;
      if (j <= k) constant += sign * binomial(k, j) * p;
    }
    row.pointwise_agrees = row.pointwise_agrees && vanishing.is_zero() && constant == row.constant;
  }
  return row;
}

}  // namespace kram
