#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "kram/errors.hpp"
#include "kram/rational.hpp"

namespace kram {

enum class Orientation : int { minus = -1, plus = 1 };

inline int sign_of(Orientation o) { return static_cast<int>(o); }

/// max(0, x)^k for k >= 1.
template <class S>
S relu_pow(const S& x, int k) {
  if (!(x > S(0))) return S(0);
  S out = x;
  for (int i = 1; i < k; ++i) out = out * x;
  return out;
}

/// coefficient * ReLU^order(orientation * (x - knot)).
template <class S>
struct Term {
  S coefficient{};
  Orientation orientation = Orientation::plus;
  S knot{};
  int order = 1;

  S operator()(const S& x) const {
    const S arg = orientation == Orientation::plus ? x - knot : knot - x;
    return coefficient * relu_pow(arg, order);
  }

  friend bool operator==(const Term&, const Term&) = default;
};

enum class ZeroPolicy { drop, keep };

/// A finite sum of k-ReLU terms of one common order.
///
/// Terms are kept sorted by (orientation, knot) and merged on construction,
/// so two networks representing the same term multiset compare equal.
template <class S>
class Network {
 public:
  using scalar_type = S;
  using term_type = Term<S>;

  explicit Network(int order, std::vector<Term<S>> terms = {}, ZeroPolicy zeros = ZeroPolicy::drop)
      : order_(order), terms_(std::move(terms)) {
    if (order_ < 1) throw DomainError("network order must be >= 1, got " + std::to_string(order_));
    for (const auto& t : terms_) {
      if (t.order != order_) {
        throw DomainError("term of order " + std::to_string(t.order) + " in network of order " +
                          std::to_string(order_));
      }
    }
    normalize(zeros);
  }

  int order() const noexcept { return order_; }
  const std::vector<Term<S>>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  S operator()(const S& x) const { return eval(x); }

  S eval(const S& x) const {
    if constexpr (std::is_floating_point_v<S>) {
      if (terms_.size() > kCompensatedThreshold) return eval_compensated(x);
    }
    S sum{};
    for (const auto& t : terms_) sum = sum + t(x);
    return sum;
  }

  Network scaled(const S& factor) const {
    std::vector<Term<S>> out = terms_;
    for (auto& t : out) t.coefficient = t.coefficient * factor;
    return Network(order_, std::move(out));
  }

  friend Network operator+(const Network& a, const Network& b) {
    if (a.order_ != b.order_) throw DomainError("cannot add networks of different order");
    std::vector<Term<S>> out;
    out.reserve(a.terms_.size() + b.terms_.size());
    std::merge(a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end(), std::back_inserter(out),
               term_before);
    return Network(a.order_, std::move(out));
  }
  friend Network operator-(const Network& a, const Network& b) { return a + b.scaled(S(-1)); }

  friend bool operator==(const Network&, const Network&) = default;

  static constexpr std::size_t kCompensatedThreshold = 64;

 private:
  static bool term_before(const Term<S>& a, const Term<S>& b) {
    if (a.orientation != b.orientation) return a.orientation < b.orientation;
    return a.knot < b.knot;
  }

  // Neumaier summation; alternating binomial coefficients cancel heavily.
  S eval_compensated(const S& x) const {
    S sum{};
    S comp{};
    for (const auto& t : terms_) {
      const S v = t(x);
      const S next = sum + v;
      if (std::abs(sum) >= std::abs(v)) {
        comp += (sum - next) + v;
      } else {
        comp += (v - next) + sum;
      }
      sum = next;
    }
    return sum + comp;
  }

  void normalize(ZeroPolicy zeros) {
    if (!std::is_sorted(terms_.begin(), terms_.end(), term_before)) {
      std::sort(terms_.begin(), terms_.end(), term_before);
    }
    std::vector<Term<S>> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().orientation == t.orientation && merged.back().knot == t.knot) {
        merged.back().coefficient = merged.back().coefficient + t.coefficient;
      } else {
        merged.push_back(std::move(t));
      }
    }
    if (zeros == ZeroPolicy::drop) {
      std::erase_if(merged, [](const Term<S>& t) { return t.coefficient == S(0); });
    }
    terms_ = std::move(merged);
  }

  int order_;
  std::vector<Term<S>> terms_;
};

using KReluTerm = Term<double>;
using KReluNetwork = Network<double>;
using ExactTerm = Term<Rational>;
using ExactNetwork = Network<Rational>;

/// Canonical form of c * ReLU^k(a x + b): coefficient c|a|^k, orientation
/// sign(a), knot -b/a.
template <class S>
Term<S> canonicalize(const S& c, const S& a, const S& b, int k) {
  if (a == S(0)) throw DomainError("canonicalize: slope a must be nonzero");
  if (k < 1) throw DomainError("canonicalize: order must be >= 1");
  const bool negative = a < S(0);
  const S magnitude = negative ? S(0) - a : a;
  S scale = S(1);
  for (int i = 0; i < k; ++i) scale = scale * magnitude;
  return Term<S>{c * scale, negative ? Orientation::minus : Orientation::plus, (S(0) - b) / a, k};
}

/// Running integral from -infinity: sum a_j ReLU^{k-1}(x - t_j) maps to
/// sum (a_j / k) ReLU^k(x - t_j). Minus-oriented terms have no finite
/// left-tail integral and are rejected.
template <class S>
Network<S> integrate(const Network<S>& net) {
  const int k = net.order() + 1;
  std::vector<Term<S>> out;
  out.reserve(net.size());
  for (const auto& t : net.terms()) {
    if (t.orientation == Orientation::minus) {
      throw DomainError("integrate: minus-oriented term has a divergent integral from -infinity");
    }
    out.push_back(Term<S>{t.coefficient / S(k), t.orientation, t.knot, k});
  }
  return Network<S>(k, std::move(out), ZeroPolicy::keep);
}

/// Termwise derivative; requires order >= 2 so the result stays in the class.
template <class S>
Network<S> differentiate(const Network<S>& net) {
  const int k = net.order();
  if (k < 2) throw DomainError("differentiate: order-1 networks leave the k-ReLU class");
  std::vector<Term<S>> out;
  out.reserve(net.size());
  for (const auto& t : net.terms()) {
    out.push_back(Term<S>{t.coefficient * S(sign_of(t.orientation) * k), t.orientation, t.knot, k - 1});
  }
  return Network<S>(k - 1, std::move(out), ZeroPolicy::keep);
}

inline KReluNetwork to_double(const ExactNetwork& net) {
  std::vector<KReluTerm> out;
  out.reserve(net.size());
  for (const auto& t : net.terms()) {
    out.push_back(KReluTerm{t.coefficient.to_double(), t.orientation, t.knot.to_double(), t.order});
  }
  return KReluNetwork(net.order(), std::move(out));
}

/// Exact image of a floating-point network (doubles are dyadic rationals).
inline ExactNetwork to_exact(const KReluNetwork& net) {
  std::vector<ExactTerm> out;
  out.reserve(net.size());
  for (const auto& t : net.terms()) {
    out.push_back(ExactTerm{Rational::from_double(t.coefficient), t.orientation, Rational::from_double(t.knot),
                            t.order});
  }
  return ExactNetwork(net.order(), std::move(out), ZeroPolicy::keep);
}

}  // namespace kram
