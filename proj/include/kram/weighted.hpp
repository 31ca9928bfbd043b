#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kram/errors.hpp"

namespace kram {

using RealFunction = std::function<double(double)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  double length() const { return hi - lo; }
};

struct LimitEstimate {
  double value = 0.0;
  double agreement = 0.0;  // largest successive difference inside the accepted run
  double last_x = 0.0;     // where the returned value was sampled
};

struct TailLimits {
  LimitEstimate minus;  // x -> -infinity
  LimitEstimate plus;   // x -> +infinity
};

/// A real function on the whole line plus what the caller knows about it.
///
/// The evaluator must be a pure function: the engines call it from
/// arbitrary points, possibly concurrently.
struct TargetFunction {
  RealFunction evaluator;
  int order_hint = 1;
  std::optional<Interval> support_hint;
  std::optional<std::pair<double, double>> tail_limits_hint;

  double operator()(double x) const { return evaluator(x); }
};

inline TargetFunction make_target(RealFunction fn, int order_hint = 1, std::optional<Interval> support = {}) {
  return TargetFunction{std::move(fn), order_hint, support, std::nullopt};
}

/// 1 / (1 + |x|^k); zero at +-infinity.
inline double weight(double x, int k) {
  if (std::isinf(x)) return 0.0;
  return 1.0 / (1.0 + std::pow(std::abs(x), k));
}

/// f(x) / (1 + |x|^k), evaluated without forming 1 + |x|^k when it would overflow.
inline double weighted_value(double fx, double x, int k) {
  const double ax = std::abs(x);
  const double p = std::pow(ax, k);
  if (std::isfinite(p)) return fx / (1.0 + p);
  double r = fx;
  for (int i = 0; i < k; ++i) r /= ax;
  return r;
}

/// Chart of the extended line onto [-1, 1]: u = x / (1 + |x|).
inline double to_chart(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : -1.0;
  return x / (1.0 + std::abs(x));
}

/// Inverse chart x = u / (1 - |u|); +-1 map to +-infinity.
inline double from_chart(double u) {
  if (u >= 1.0) return std::numeric_limits<double>::infinity();
  if (u <= -1.0) return -std::numeric_limits<double>::infinity();
  return u / (1.0 - std::abs(u));
}

struct TailConfig {
  double tolerance = 1e-8;
  int first_scale = 2;   // sample at +-base * 2^m for m in [first_scale, last_scale]
  int last_scale = 60;
  int consecutive = 3;   // successive differences that must agree before accepting
  double base = 1.0;
};

/// Limit of fn(x) / scale(x) along x = direction * base * 2^m.
///
/// Accepts once `consecutive` successive differences fall below the
/// tolerance, then keeps following the run while it stays stable and
/// returns its last value.
inline LimitEstimate geometric_limit(const RealFunction& fn, int direction, const RealFunction& scale,
                                     const TailConfig& cfg, const std::string& label) {
  std::vector<std::pair<double, double>> samples;
  for (int m = cfg.first_scale; m <= cfg.last_scale; ++m) {
    const double x = direction * cfg.base * std::ldexp(1.0, m);
    const double v = fn(x) / scale(x);
    if (!std::isfinite(v)) break;
    samples.emplace_back(x, v);
  }
  const auto n = static_cast<int>(samples.size());
  int run = 0;
  for (int i = 1; i < n; ++i) {
    const double diff = std::abs(samples[i].second - samples[i - 1].second);
    run = diff < cfg.tolerance ? run + 1 : 0;
    if (run < cfg.consecutive) continue;
    LimitEstimate est;
    est.agreement = 0.0;
    int j = i - cfg.consecutive + 1;
    for (; j < n; ++j) {
      const double d = std::abs(samples[j].second - samples[j - 1].second);
      if (d >= cfg.tolerance) break;
      est.agreement = std::max(est.agreement, d);
    }
    est.value = samples[j - 1].second;
    est.last_x = samples[j - 1].first;
    return est;
  }
  throw NotInSpaceError(label + ": ratio did not stabilize toward " + (direction > 0 ? "+" : "-") +
                            "infinity at tolerance " + std::to_string(cfg.tolerance),
                        std::move(samples));
}

/// Limits of f(x) / (1 + |x|^k) as x -> -infinity and x -> +infinity.
/// Uses the target's tail_limits_hint when it carries one.
inline TailLimits tail_limits(const TargetFunction& f, int k, const TailConfig& cfg = {}) {
  if (k < 1) throw DomainError("tail_limits: order must be >= 1");
  if (f.tail_limits_hint) {
    return TailLimits{LimitEstimate{f.tail_limits_hint->first, 0.0, -std::numeric_limits<double>::infinity()},
                      LimitEstimate{f.tail_limits_hint->second, 0.0, std::numeric_limits<double>::infinity()}};
  }
  const RealFunction fn = [&f, k](double x) { return weighted_value(f(x), x, k); };
  const RealFunction one = [](double) { return 1.0; };
  TailLimits out;
  out.minus = geometric_limit(fn, -1, one, cfg, "not in Y_k at requested tolerance");
  out.plus = geometric_limit(fn, +1, one, cfg, "not in Y_k at requested tolerance");
  return out;
}

/// Bounded continuous representative u -> f(x(u)) / (1 + |x(u)|^k) on the
/// compactified line, extended to u = +-1 by the tail limits.
struct CompactRepresentative {
  TargetFunction f;
  int k = 1;
  TailLimits limits;

  double operator()(double u) const {
    if (u <= -1.0) return limits.minus.value;
    if (u >= 1.0) return limits.plus.value;
    const double x = from_chart(u);
    return weighted_value(f(x), x, k);
  }
};

inline CompactRepresentative compactify(const TargetFunction& f, int k, const TailConfig& cfg = {}) {
  return CompactRepresentative{f, k, tail_limits(f, k, cfg)};
}

/// Inverse identification: F on [-1, 1] to x -> (1 + |x|^k) F(u(x)).
inline RealFunction decompactify(RealFunction representative, int k) {
  return [F = std::move(representative), k](double x) { return (1.0 + std::pow(std::abs(x), k)) * F(to_chart(x)); };
}

struct CompactifiedGrid {
  std::vector<double> nodes;  // strictly increasing chart coordinates, including -1 and 1
  int refinement_depth = 0;
};

struct GridSample {
  double x = 0.0;
  double u = 0.0;
  double f = 0.0;         // NaN at u = +-1
  double weighted = 0.0;  // signed f / (1 + |x|^k), or the tail limit at u = +-1
};

struct WeightedNormEstimate {
  double lower_bound = 0.0;
  double upper_estimate = 0.0;
  double argmax_x = 0.0;
  bool converged = true;
  TailLimits limits;
  CompactifiedGrid grid;
  std::vector<GridSample> samples;  // parallel to grid.nodes
};

struct NormConfig {
  double tolerance = 1e-6;
  int depth_cap = 24;
  int initial_intervals = 64;
  std::size_t max_nodes = std::size_t{1} << 20;
  std::vector<double> seed_points;  // extra x coordinates sampled up front
  TailConfig tail;
};

/// Certified lower bound and heuristic upper estimate of sup |f| / (1 + |x|^k).
///
/// Works on the compactified line. Each interval between samples gets a
/// midpoint; its heuristic ceiling is the largest of the three values plus
/// the midpoint's deviation from the chord. Intervals whose ceiling exceeds
/// the running lower bound by more than the tolerance are bisected, up to
/// the depth cap. The lower bound is the largest sampled value, so adding
/// samples never decreases it.
inline WeightedNormEstimate weighted_norm(const TargetFunction& f, int k, const NormConfig& cfg = {}) {
  const CompactRepresentative rep = compactify(f, k, cfg.tail);

  std::vector<double> initial;
  const int n0 = std::max(2, cfg.initial_intervals);
  for (int i = 0; i <= n0; ++i) initial.push_back(-1.0 + 2.0 * i / n0);
  for (double x : cfg.seed_points) {
    if (std::isfinite(x)) initial.push_back(to_chart(x));
  }
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());

  struct Node {
    double u;
    double value;
    double fx;
  };
  const auto sample = [&](double u) {
    if (u <= -1.0 || u >= 1.0) return Node{u, rep(u), std::numeric_limits<double>::quiet_NaN()};
    const double x = from_chart(u);
    const double fx = f(x);
    return Node{u, weighted_value(fx, x, k), fx};
  };
  std::vector<Node> nodes;
  nodes.reserve(initial.size() * 2);

  WeightedNormEstimate est;
  est.limits = rep.limits;
  double best = -1.0;
  double best_u = 0.0;
  const auto consider = [&](double u, double value) {
    const double a = std::abs(value);
    // Endpoints are seen first, so interior samples must strictly exceed them.
    if (a > best) {
      best = a;
      best_u = u;
    }
  };
  for (double u : {-1.0, 1.0}) consider(u, rep(u));
  for (double u : initial) {
    nodes.push_back(sample(u));
    consider(u, nodes.back().value);
  }

  struct Pending {
    double left_u, right_u, left_v, right_v;
    int depth;
  };
  std::vector<Pending> work;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    work.push_back({nodes[i].u, nodes[i + 1].u, nodes[i].value, nodes[i + 1].value, 0});
  }
  double max_ceiling = 0.0;
  int max_depth = 0;
  while (!work.empty()) {
    const Pending p = work.back();
    work.pop_back();
    const double mid_u = 0.5 * (p.left_u + p.right_u);
    if (!(mid_u > p.left_u && mid_u < p.right_u)) continue;
    nodes.push_back(sample(mid_u));
    const double mid_v = nodes.back().value;
    consider(mid_u, mid_v);
    max_depth = std::max(max_depth, p.depth + 1);
    const double lv = std::abs(p.left_v);
    const double rv = std::abs(p.right_v);
    const double mv = std::abs(mid_v);
    const double deviation = std::abs(mid_v - 0.5 * (p.left_v + p.right_v));
    const double ceiling = std::max({lv, rv, mv}) + deviation;
    if (ceiling <= best + cfg.tolerance) {
      max_ceiling = std::max(max_ceiling, ceiling);
      continue;
    }
    if (p.depth + 1 >= cfg.depth_cap || nodes.size() >= cfg.max_nodes) {
      est.converged = false;
      max_ceiling = std::max(max_ceiling, ceiling);
      continue;
    }
    work.push_back({p.left_u, mid_u, p.left_v, mid_v, p.depth + 1});
    work.push_back({mid_u, p.right_u, mid_v, p.right_v, p.depth + 1});
  }

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.u < b.u; });
  est.grid.refinement_depth = max_depth;
  est.grid.nodes.reserve(nodes.size());
  est.samples.reserve(nodes.size());
  for (const auto& n : nodes) {
    est.grid.nodes.push_back(n.u);
    est.samples.push_back(GridSample{from_chart(n.u), n.u, n.fx, n.value});
  }
  est.lower_bound = best;
  est.upper_estimate = std::max(best, max_ceiling);
  est.argmax_x = from_chart(best_u);
  return est;
}

/// sup over |x| >= radius of |g(x)| / (1 + |x|^k), sampled uniformly in the
/// chart coordinate on both tails (plus x = +-radius and the tail limits).
inline double tail_residual(const RealFunction& g, int k, double radius, const TailLimits& limits,
                            int samples_per_side = 4096) {
  double out = std::max(std::abs(limits.minus.value), std::abs(limits.plus.value));
  const double u0 = to_chart(radius);
  for (int side : {-1, 1}) {
    for (int i = 0; i < samples_per_side; ++i) {
      const double u = u0 + (1.0 - u0) * i / samples_per_side;
      const double x = side * from_chart(u);
      out = std::max(out, std::abs(weighted_value(g(x), x, k)));
    }
  }
  return out;
}

}  // namespace kram
