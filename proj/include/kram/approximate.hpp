#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kram/constructions.hpp"
#include "kram/network.hpp"
#include "kram/weighted.hpp"

namespace kram {

// ---------------------------------------------------------------------------
// Compact approximation
// ---------------------------------------------------------------------------

struct CompactApproxConfig {
  double epsilon = 1e-2;
  std::optional<double> mollifier_width;  // empty: the grid spacing
  int base_knot_count = 16;
  int max_recursion = 16;
  int max_knots = 1 << 14;  // cap on uniform grid intervals
  int adaptive_depth = 40;  // bisection cap for the order-1 interpolant, 0 disables
  int max_refined_nodes = 1 << 16;  // node budget for that bisection
  int stall_limit = 3;  // stop after this many doublings without a 10% gain
  int check_density = 8;    // error check points per grid interval
};

struct CompactApproximation {
  ExactNetwork network{1};
  double sup_error = std::numeric_limits<double>::infinity();
  int grid_intervals = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> history;  // (grid intervals, measured sup error)
  std::string diagnostics;
};

namespace detail {

// One pass of the inductive construction on a fixed uniform grid of [left, right].
class CompactBuilder {
 public:
  CompactBuilder(Rational left, Rational right, int intervals, double delta, int adaptive_depth, int node_cap)
      : left_(std::move(left)),
        right_(std::move(right)),
        intervals_(intervals),
        delta_(delta),
        adaptive_depth_(adaptive_depth),
        node_cap_(static_cast<std::size_t>(std::max(node_cap, intervals + 1))),
        length_((right_ - left_).to_double()) {}

  // Order-k network supported in [left, right] approximating g. Adaptive
  // bisection runs only on an order-1 target given directly: a mollified
  // derivative is already smooth at the grid scale.
  ExactNetwork build(int order, const RealFunction& g, double tol, bool mollified = false) const {
    if (order == 1) return piecewise_linear(g, tol, !mollified);
    // Cut g off within d/2 of the ends: its box-mollified derivative then
    // lives in [left, right], vanishes at both end nodes, and keeps the mass
    // of any jump g makes at the ends. With d equal to the grid spacing its
    // node values are exact cell averages of g'.
    const double d = delta_;
    const RealFunction cut = [g, lo = left_.to_double() + 0.5 * d, hi = right_.to_double() - 0.5 * d](double x) {
      return x > lo && x < hi ? g(x) : 0.0;
    };
    const RealFunction derivative = [cut, d](double x) {
      return (cut(x + 0.5 * d) - cut(x - 0.5 * d)) / d;
    };
    const ExactNetwork psi = build(order - 1, derivative, tol / (2.0 * (1.0 + length_)), true);
    const ExactNetwork phi = integrate(psi);
    // phi is constant right of the support; cancel that constant with a step.
    const Rational total = phi.eval(right_);
    return phi - step(order, left_, right_).scaled(total);
  }

 private:
  struct Node {
    Rational x;
    double value;
  };

  // Hat-function interpolant through g on the grid (zero at both ends),
  // bisecting cells where the chord misses g by more than tol. Refinement
  // sees the true end values; the zeros are forced afterwards, otherwise the
  // bisection chases that jump and creates huge slopes that cancel badly in
  // floating evaluation.
  ExactNetwork piecewise_linear(const RealFunction& g, double tol, bool adaptive) const {
    const Rational h = (right_ - left_) / Rational(intervals_);
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(intervals_) + 1);
    for (int i = 0; i <= intervals_; ++i) {
      const Rational x = left_ + h * Rational(i);
      nodes.push_back(Node{x, g(x.to_double())});
    }
    if (adaptive && adaptive_depth_ > 0) nodes = refine(nodes, g, tol);
    nodes.front().value = 0.0;
    nodes.back().value = 0.0;

    std::vector<Rational> slopes;
    slopes.reserve(nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      slopes.push_back((Rational::from_double(nodes[i + 1].value) - Rational::from_double(nodes[i].value)) /
                       (nodes[i + 1].x - nodes[i].x));
    }
    std::vector<ExactTerm> terms;
    terms.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Rational right_slope = i < slopes.size() ? slopes[i] : Rational();
      const Rational left_slope = i > 0 ? slopes[i - 1] : Rational();
      terms.push_back(ExactTerm{right_slope - left_slope, Orientation::plus, nodes[i].x, 1});
    }
    return ExactNetwork(1, std::move(terms));
  }

  std::vector<Node> refine(const std::vector<Node>& coarse, const RealFunction& g, double tol) const {
    std::vector<Node> out;
    out.reserve(coarse.size() * 2);
    out.push_back(coarse.front());
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
      bisect(coarse[i], coarse[i + 1], g, tol, 0, out);
    }
    return out;
  }

  // Appends interior nodes of (a, b] in order.
  void bisect(const Node& a, const Node& b, const RealFunction& g, double tol, int depth,
              std::vector<Node>& out) const {
    const double xa = a.x.to_double();
    const double xb = b.x.to_double();
    bool fine = depth >= adaptive_depth_ || out.size() >= node_cap_;
    if (!fine) {
      fine = true;
      for (double t : {0.25, 0.5, 0.75}) {
        const double x = xa + t * (xb - xa);
        const double chord = a.value + t * (b.value - a.value);
        if (std::abs(g(x) - chord) > tol) {
          fine = false;
          break;
        }
      }
    }
    const Rational mid = (a.x + b.x) / Rational(2);
    const double xm = mid.to_double();
    if (fine || !(xm > xa && xm < xb)) {
      out.push_back(b);
      return;
    }
    const Node m{mid, g(xm)};
    bisect(a, m, g, tol, depth + 1, out);
    bisect(m, b, g, tol, depth + 1, out);
  }

  Rational left_;
  Rational right_;
  int intervals_;
  double delta_;
  int adaptive_depth_;
  std::size_t node_cap_;
  double length_;
};

inline double sup_error_on(const RealFunction& f, const KReluNetwork& net, double lo, double hi, int points) {
  double err = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * i / points;
    err = std::max(err, std::abs(f(x) - net(x)));
  }
  return err;
}

}  // namespace detail

/// Order-k network supported in the target's support hint [-a', a] with
/// sup-norm error at most epsilon (measured on a check grid).
///
/// Induction on k. Order 1 is the hat-function interpolant. Order k
/// approximates the box-mollified derivative at order k-1, integrates it
/// termwise, and subtracts phi(a) times step(k, -a', a) so the result is
/// exactly zero right of the support. The grid doubles until the measured
/// error meets epsilon or max_knots is exceeded.
inline CompactApproximation approx_compact(const TargetFunction& f, int k, const CompactApproxConfig& cfg = {}) {
  if (k < 1) throw DomainError("approx_compact: order must be >= 1");
  if (!f.support_hint) throw DomainError("approx_compact: target has no compact support hint");
  if (!(cfg.epsilon > 0.0)) throw DomainError("approx_compact: epsilon must be positive");
  if (cfg.base_knot_count < 2) throw DomainError("approx_compact: base_knot_count must be >= 2");
  const Interval support = *f.support_hint;
  if (!(support.lo < support.hi)) throw DomainError("approx_compact: empty support interval");

  CompactApproximation best;
  best.network = ExactNetwork(k);
  if (k - 1 > cfg.max_recursion) {
    best.diagnostics = "recursion budget exhausted: order " + std::to_string(k) + " needs " +
                       std::to_string(k - 1) + " levels, max_recursion is " + std::to_string(cfg.max_recursion);
    return best;
  }

  const Rational left = Rational::from_double(support.lo);
  const Rational right = Rational::from_double(support.hi);
  const RealFunction target = f.evaluator;
  int stalled = 0;
  for (int n = cfg.base_knot_count; n <= cfg.max_knots; n *= 2) {
    const double delta = cfg.mollifier_width.value_or(support.length() / n);
    const detail::CompactBuilder builder(left, right, n, delta, cfg.adaptive_depth, cfg.max_refined_nodes);
    ExactNetwork net = builder.build(k, target, 0.5 * cfg.epsilon);
    const double err =
        detail::sup_error_on(target, to_double(net), support.lo, support.hi, cfg.check_density * n);
    best.history.emplace_back(n, err);
    stalled = err < 0.9 * best.sup_error ? 0 : stalled + 1;
    if (err < best.sup_error) {
      best.network = std::move(net);
      best.sup_error = err;
      best.grid_intervals = n;
    }
    if (err <= cfg.epsilon) {
      best.converged = true;
      return best;
    }
    if (cfg.stall_limit > 0 && stalled >= cfg.stall_limit) {
      best.diagnostics = "sup error stalled at " + std::to_string(best.sup_error) + " after " +
                         std::to_string(best.history.size()) + " grid doublings";
      return best;
    }
  }
  best.diagnostics = "grid cap of " + std::to_string(cfg.max_knots) + " intervals reached with sup error " +
                     std::to_string(best.sup_error);
  return best;
}

// ---------------------------------------------------------------------------
// Global decomposition and assembly
// ---------------------------------------------------------------------------

struct DecomposeConfig {
  double epsilon = 1e-2;
  double tail_fraction = 0.25;  // share of epsilon granted to the tail residual
  int max_doublings = 20;
  int residual_samples = 4096;
  TailConfig tail;
};

struct GlobalDecomposition {
  double beta_plus = 0.0;
  double beta_minus = 0.0;
  TargetFunction remainder;
  double window_radius = 1.0;
  double tail_residual = 0.0;
  bool radius_capped = false;
  TailLimits limits;
  std::vector<std::pair<double, double>> schedule;  // (radius, measured tail residual)
};

/// g0 = f - beta_plus ReLU^k(x) - beta_minus ReLU^k(-x).
inline TargetFunction tail_remainder(const TargetFunction& f, int k, double beta_plus, double beta_minus) {
  TargetFunction out = f;
  out.tail_limits_hint.reset();
  out.evaluator = [fn = f.evaluator, k, beta_plus, beta_minus](double x) {
    return fn(x) - beta_plus * relu_pow(x, k) - beta_minus * relu_pow(-x, k);
  };
  return out;
}

/// Weighted tail residual of the remainder beyond radius.
inline double remainder_tail_residual(const GlobalDecomposition& d, int k, double radius, int samples = 4096,
                                      const TailConfig& tail = {}) {
  const TailLimits lim = tail_limits(d.remainder, k, tail);
  return tail_residual(d.remainder.evaluator, k, radius, lim, samples);
}

/// beta_+- are the weighted tail limits of f (ReLU^k_-(x) = |x|^k on x < 0,
/// so no sign factor enters). The window radius doubles from
/// max(1, a, a') until the weighted tail residual of the remainder is at
/// most tail_fraction * epsilon.
inline GlobalDecomposition decompose(const TargetFunction& f, int k, const DecomposeConfig& cfg = {}) {
  if (k < 1) throw DomainError("decompose: order must be >= 1");
  GlobalDecomposition d;
  d.limits = tail_limits(f, k, cfg.tail);
  d.beta_plus = d.limits.plus.value;
  d.beta_minus = d.limits.minus.value;
  d.remainder = tail_remainder(f, k, d.beta_plus, d.beta_minus);
  const TailLimits rem_limits = tail_limits(d.remainder, k, cfg.tail);

  double r0 = 1.0;
  if (f.support_hint) r0 = std::max({r0, std::abs(f.support_hint->lo), std::abs(f.support_hint->hi)});
  const double budget = cfg.tail_fraction * cfg.epsilon;
  double radius = r0;
  for (int i = 0; i <= cfg.max_doublings; ++i, radius *= 2.0) {
    const double res = tail_residual(d.remainder.evaluator, k, radius, rem_limits, cfg.residual_samples);
    d.schedule.emplace_back(radius, res);
    d.window_radius = radius;
    d.tail_residual = res;
    if (res <= budget) return d;
  }
  d.radius_capped = true;
  return d;
}

/// g0 on [-R, R], linear tapers to zero on [R, R+1] and [-R-1, -R], zero elsewhere.
inline TargetFunction window_remainder(const TargetFunction& g0, double radius, int k) {
  if (!(radius > 0.0)) throw DomainError("window_remainder: radius must be positive");
  const double at_right = g0(radius);
  const double at_left = g0(-radius);
  TargetFunction out;
  out.order_hint = k;
  out.support_hint = Interval{-radius - 1.0, radius + 1.0};
  out.evaluator = [g = g0.evaluator, radius, at_right, at_left](double x) {
    if (std::abs(x) <= radius) return g(x);
    if (x > radius && x <= radius + 1.0) return -at_right * (x - radius) + at_right;
    if (x < -radius && x >= -radius - 1.0) return at_left * (x + radius) + at_left;
    return 0.0;
  };
  return out;
}

struct ErrorCurvePoint {
  double x = 0.0;
  double f = 0.0;
  double approx = 0.0;
  double weighted_err = 0.0;
};

struct ApproxReport {
  std::string mode = "global";  // "global" or "compact"
  bool success = false;
  int k = 1;
  double epsilon = 0.0;
  ExactNetwork network{1};
  double beta_plus = 0.0;
  double beta_minus = 0.0;
  double window_radius = 0.0;
  std::size_t term_count = 0;
  int grid_intervals = 0;
  double tail_residual = 0.0;
  WeightedNormEstimate weighted_error;
  double sup_error_on_window = 0.0;
  std::vector<ErrorCurvePoint> error_curve;
  std::string diagnostics;
};

struct GlobalConfig {
  double epsilon = 1e-2;
  DecomposeConfig decompose;
  CompactApproxConfig compact;
  NormConfig norm;
  int curve_points = 2001;
};

/// Fills weighted_error and error_curve for f - network. Seeds the norm
/// grid at a quarter of the network's grid spacing across `window`.
inline void measure_report(const TargetFunction& f, const GlobalConfig& cfg, const Interval& window,
                           ApproxReport& report) {
  const KReluNetwork net = to_double(report.network);
  TargetFunction residual = f;
  residual.tail_limits_hint.reset();
  residual.evaluator = [fn = f.evaluator, net](double x) { return fn(x) - net(x); };

  NormConfig norm = cfg.norm;
  norm.tolerance = std::min(norm.tolerance, 0.05 * report.epsilon);
  norm.tolerance = std::max(norm.tolerance, 1e-3 * report.epsilon);
  const int seeds = 4 * std::max(report.grid_intervals, 64);
  for (int i = 0; i <= seeds; ++i) norm.seed_points.push_back(window.lo + window.length() * i / seeds);
  report.weighted_error = weighted_norm(residual, report.k, norm);

  report.error_curve.clear();
  const double half = 2.0 * std::max(std::abs(window.lo), std::abs(window.hi));
  const int n = std::max(2, cfg.curve_points);
  for (int i = 0; i < n; ++i) {
    const double x = -half + 2.0 * half * i / (n - 1);
    const double fx = f(x);
    const double ax = net(x);
    report.error_curve.push_back(ErrorCurvePoint{x, fx, ax, weighted_value(fx - ax, x, report.k)});
  }
}

/// Global pipeline: decompose, window the remainder, approximate the window
/// compactly at epsilon/2, and add the two tail terms.
inline ApproxReport approx_global(const TargetFunction& f, int k, const GlobalConfig& cfg = {}) {
  if (!(cfg.epsilon > 0.0)) throw DomainError("approx_global: epsilon must be positive");
  ApproxReport report;
  report.mode = "global";
  report.k = k;
  report.epsilon = cfg.epsilon;

  DecomposeConfig dc = cfg.decompose;
  dc.epsilon = cfg.epsilon;
  const GlobalDecomposition d = decompose(f, k, dc);
  report.beta_plus = d.beta_plus;
  report.beta_minus = d.beta_minus;
  report.window_radius = d.window_radius;
  report.tail_residual = d.tail_residual;

  const TargetFunction window = window_remainder(d.remainder, d.window_radius, k);
  CompactApproxConfig cc = cfg.compact;
  cc.epsilon = 0.5 * cfg.epsilon;
  if (d.radius_capped && d.tail_residual > cfg.epsilon) {
    // Success is already out of reach; a small budget still gives a best effort.
    cc.max_knots = std::min(cc.max_knots, 4 * cc.base_knot_count);
    cc.max_refined_nodes = std::min(cc.max_refined_nodes, 1 << 12);
  }
  const CompactApproximation h = approx_compact(window, k, cc);
  report.grid_intervals = h.grid_intervals;
  report.sup_error_on_window = h.sup_error;

  std::vector<ExactTerm> tails;
  tails.push_back(ExactTerm{Rational::from_double(d.beta_plus), Orientation::plus, Rational(0), k});
  tails.push_back(ExactTerm{Rational::from_double(d.beta_minus), Orientation::minus, Rational(0), k});
  const ExactNetwork tail_terms(k, std::move(tails));
  report.network = tail_terms + h.network;
  report.term_count = report.network.size();

  measure_report(f, cfg, *window.support_hint, report);
  if (!h.converged) {
    // A failed compact stage can be worse than no correction at all.
    ApproxReport bare = report;
    bare.network = tail_terms;
    bare.term_count = tail_terms.size();
    measure_report(f, cfg, *window.support_hint, bare);
    if (bare.weighted_error.lower_bound < report.weighted_error.lower_bound) report = std::move(bare);
  }

  std::vector<std::string> problems;
  if (d.radius_capped) problems.push_back("window radius cap reached, tail residual " + std::to_string(d.tail_residual));
  if (!h.converged) problems.push_back("compact stage: " + h.diagnostics);
  if (!report.weighted_error.converged) problems.push_back("weighted error estimate did not converge");
  if (report.weighted_error.lower_bound > cfg.epsilon) {
    problems.push_back("weighted error " + std::to_string(report.weighted_error.lower_bound) + " exceeds epsilon");
  }
  report.success = problems.empty();
  for (const auto& p : problems) report.diagnostics += (report.diagnostics.empty() ? "" : "; ") + p;
  return report;
}

/// Compact-only pipeline for targets with a support hint, reported in the
/// same format as approx_global.
inline ApproxReport approx_compact_report(const TargetFunction& f, int k, const GlobalConfig& cfg = {}) {
  if (!f.support_hint) throw DomainError("approx_compact_report: target has no support hint");
  ApproxReport report;
  report.mode = "compact";
  report.k = k;
  report.epsilon = cfg.epsilon;
  CompactApproxConfig cc = cfg.compact;
  cc.epsilon = cfg.epsilon;
  const CompactApproximation h = approx_compact(f, k, cc);
  report.network = h.network;
  report.term_count = h.network.size();
  report.grid_intervals = h.grid_intervals;
  report.sup_error_on_window = h.sup_error;
  report.window_radius = std::max(std::abs(f.support_hint->lo), std::abs(f.support_hint->hi));
  measure_report(f, cfg, *f.support_hint, report);
  report.success = h.converged && report.weighted_error.converged && report.weighted_error.lower_bound <= cfg.epsilon;
  if (!h.converged) report.diagnostics = h.diagnostics;
  return report;
}

// ---------------------------------------------------------------------------
// k-sigmoidal activations
// ---------------------------------------------------------------------------

enum class SigmoidalVerdict { sigmoidal, not_sigmoidal, undetermined };

inline const char* to_string(SigmoidalVerdict v) {
  switch (v) {
    case SigmoidalVerdict::sigmoidal: return "sigmoidal";
    case SigmoidalVerdict::not_sigmoidal: return "not_sigmoidal";
    case SigmoidalVerdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

struct SigmoidalCheck {
  SigmoidalVerdict verdict = SigmoidalVerdict::undetermined;
  std::optional<double> limit_minus;  // lim sigma(x)/x^k, x -> -infinity
  std::optional<double> limit_plus;   // lim sigma(x)/x^k, x -> +infinity
  std::string detail;

  bool is_sigmoidal() const { return verdict == SigmoidalVerdict::sigmoidal; }
};

/// Estimates sigma(x)/x^k at both infinities with the tail-limit engine.
/// Never reports sigmoidal unless both limits stabilize at (0, 1).
inline SigmoidalCheck sigmoidal_check(const RealFunction& sigma, int k, const TailConfig& cfg = {},
                                      double limit_tolerance = 1e-6) {
  if (k < 0) throw DomainError("sigmoidal_check: k must be >= 0");
  const RealFunction power = [k](double x) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    return p;
  };
  SigmoidalCheck out;
  try {
    out.limit_minus = geometric_limit(sigma, -1, power, cfg, "sigma(x)/x^k").value;
    out.limit_plus = geometric_limit(sigma, +1, power, cfg, "sigma(x)/x^k").value;
  } catch (const NotInSpaceError& e) {
    out.verdict = SigmoidalVerdict::undetermined;
    out.detail = e.what();
    return out;
  }
  const bool ok = std::abs(*out.limit_minus) <= limit_tolerance && std::abs(*out.limit_plus - 1.0) <= limit_tolerance;
  out.verdict = ok ? SigmoidalVerdict::sigmoidal : SigmoidalVerdict::not_sigmoidal;
  return out;
}

/// coefficient * sigma(scale * x + shift)
struct SigmoidalTerm {
  double coefficient = 0.0;
  double scale = 1.0;
  double shift = 0.0;
};

struct TermSubstitution {
  KReluTerm term;
  double scale = 1.0;  // the a finally used
  double error = 0.0;
  bool met = false;
  std::vector<std::pair<double, double>> schedule;  // (a, sup error on region)
};

struct SigmoidalExpansion {
  std::vector<SigmoidalTerm> terms;
  std::vector<TermSubstitution> per_term;
  double achieved_error = 0.0;
  bool success = true;
};

struct SubstituteConfig {
  double tolerance = 1e-2;
  int grid_points = 4001;
  double max_scale = 1099511627776.0;  // 2^40
};

/// sup over a uniform grid on region of |term(x) - c sigma(a o (x - t)) / a^k|.
inline double substitution_error(const KReluTerm& term, const RealFunction& sigma, double a, const Interval& region,
                                 int grid_points) {
  const double o = sign_of(term.orientation);
  const double ak = std::pow(a, term.order);
  double err = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double x = region.lo + region.length() * i / (grid_points - 1);
    const double approx = term.coefficient * sigma(a * o * (x - term.knot)) / ak;
    err = std::max(err, std::abs(term(x) - approx));
  }
  return err;
}

/// Replaces every c ReLU^k(o(x - t)) by (c / a^k) sigma(a o (x - t)), doubling
/// a from 1 per term until its error on region is within tolerance / terms.
inline SigmoidalExpansion sigmoidal_substitute(const KReluNetwork& net, const RealFunction& sigma,
                                               const Interval& region, const SubstituteConfig& cfg = {}) {
  if (!(region.lo < region.hi)) throw DomainError("sigmoidal_substitute: empty region");
  if (!(cfg.tolerance > 0.0)) throw DomainError("sigmoidal_substitute: tolerance must be positive");
  SigmoidalExpansion out;
  if (net.empty()) return out;
  const double per_term = cfg.tolerance / static_cast<double>(net.size());
  for (const auto& t : net.terms()) {
    TermSubstitution sub;
    sub.term = t;
    for (double a = 1.0; a <= cfg.max_scale; a *= 2.0) {
      const double err = substitution_error(t, sigma, a, region, cfg.grid_points);
      sub.schedule.emplace_back(a, err);
      sub.scale = a;
      sub.error = err;
      if (err <= per_term) {
        sub.met = true;
        break;
      }
    }
    out.success = out.success && sub.met;
    const double o = sign_of(t.orientation);
    out.terms.push_back(SigmoidalTerm{t.coefficient / std::pow(sub.scale, t.order), sub.scale * o,
                                      -sub.scale * o * t.knot});
    out.per_term.push_back(std::move(sub));
  }
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double x = region.lo + region.length() * i / (cfg.grid_points - 1);
    double s = 0.0;
    for (const auto& st : out.terms) s += st.coefficient * sigma(st.scale * x + st.shift);
    out.achieved_error = std::max(out.achieved_error, std::abs(net(x) - s));
  }
  return out;
}

}  // namespace kram
