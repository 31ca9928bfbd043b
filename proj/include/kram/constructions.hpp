#pragma once

#include <string>
#include <vector>

#include "kram/identities.hpp"
#include "kram/network.hpp"

namespace kram {

namespace detail {

// sum_{j=0}^{n} C(n,j) (-1)^j ReLU^k((x - left)/width - j) / normalizer,
// rewritten in canonical form: knots left + j*width, coefficients scaled by width^-k.
inline ExactNetwork alternating_knot_combination(int n, int k, const Rational& left, const Rational& width,
                                                 const Rational& normalizer) {
  const Rational scale = Rational(1) / (width.pow(static_cast<unsigned>(k)) * normalizer);
  std::vector<ExactTerm> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const Rational c = (j % 2 == 0 ? binomial(n, j) : -binomial(n, j)) * scale;
    terms.push_back(ExactTerm{c, Orientation::plus, left + Rational(j) * width, k});
  }
  return ExactNetwork(k, std::move(terms));
}

}  // namespace detail

/// Compactly supported k-ReLU network on [left, right]: the (k+1)-st
/// alternating binomial difference of ReLU^k, affinely mapped so its knots
/// split [left, right] into k+1 equal cells. Equals k! times the cardinal
/// B-spline of degree k and vanishes identically outside [left, right].
inline ExactNetwork bump(int k, const Rational& left, const Rational& right) {
  detail::require_positive_order(k);
  if (!(left < right)) throw DomainError("bump: need left < right, got [" + left.str() + ", " + right.str() + "]");
  const Rational width = (right - left) / Rational(k + 1);
  return detail::alternating_knot_combination(k + 1, k, left, width, Rational(1));
}

/// k-ReLU network equal to 0 on (-inf, rise_left] and to 1 on [rise_right, inf),
/// monotone in between. Built from the k-term alternating sum normalized by
/// constant_identity_value(k).
inline ExactNetwork step(int k, const Rational& rise_left, const Rational& rise_right) {
  detail::require_positive_order(k);
  if (!(rise_left < rise_right)) {
    throw DomainError("step: need rise_left < rise_right, got [" + rise_left.str() + ", " + rise_right.str() + "]");
  }
  const Rational width = (rise_right - rise_left) / Rational(k);
  return detail::alternating_knot_combination(k, k, rise_left, width, constant_identity_value(k));
}

inline ExactNetwork bump(int k, double left, double right) {
  return bump(k, Rational::from_double(left), Rational::from_double(right));
}
inline ExactNetwork step(int k, double rise_left, double rise_right) {
  return step(k, Rational::from_double(rise_left), Rational::from_double(rise_right));
}

}  // namespace kram
