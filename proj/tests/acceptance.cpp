// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kram/kram.hpp"

namespace {

using kram::Interval;
using kram::Rational;
using kram::TargetFunction;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double relu_pow(double x, int k) { return x > 0.0 ? std::pow(x, k) : 0.0; }

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Identities for k = 1..10 with an interpolation cross-check, under 1 s.
Outcome identities() {
  Outcome out;
  std::cout << "    k   constant   (-1)^k\n";
  for (int k = 1; k <= 10; ++k) {
    const kram::IdentityCheck row = kram::check_identities(k);
    out.require(row.residual_is_zero, "residual nonzero at k=" + std::to_string(k));
    out.require(row.pointwise_agrees, "pointwise disagreement at k=" + std::to_string(k));
    out.require(row.constant == row.factorial, "constant is not k! at k=" + std::to_string(k));
    std::printf("    %-3d %-10s %s\n", k, row.constant.str().c_str(), row.claimed_constant.str().c_str());

    // Evaluate sum_j C(k+1,j)(-1)^j (x-j)^k at k+2 points: all zero, so the
    // interpolating polynomial is zero. The constant sum is the same at each.
    Rational first;
    for (int i = 0; i < k + 2; ++i) {
      const Rational x(3 * i - 5, 7);
      Rational vanish;
      Rational constant;
      Rational c(1);
      for (int j = 0; j <= k + 1; ++j) {
        const Rational term = c * (x - Rational(j)).pow(static_cast<unsigned>(k));
        vanish += j % 2 == 0 ? term : -term;
        c = c * Rational(k + 1 - j) / Rational(j + 1);
      }
      c = Rational(1);
      for (int j = 0; j <= k; ++j) {
        const Rational term = c * (x - Rational(j)).pow(static_cast<unsigned>(k));
        constant += j % 2 == 0 ? term : -term;
        c = c * Rational(k - j) / Rational(j + 1);
      }
      out.require(vanish.is_zero(), "direct sum nonzero at k=" + std::to_string(k));
      if (i == 0) first = constant;
      out.require(constant == first && constant == row.constant, "constant sum varies at k=" + std::to_string(k));
    }
  }
  return out;
}

// 2. Exact zeros (and exact plateaus) outside the active region.
Outcome support_exactness() {
  Outcome out;
  std::mt19937_64 rng(0x5eed0901);
  std::uniform_int_distribution<int> num(-50, 50);
  std::uniform_int_distribution<int> den(1, 13);
  for (int k = 1; k <= 4; ++k) {
    for (int trial = 0; trial < 10; ++trial) {
      Rational a(num(rng), den(rng));
      Rational b(num(rng), den(rng));
      if (a == b) b = a + Rational(1);
      if (b < a) std::swap(a, b);
      const kram::ExactNetwork bump = kram::bump(k, a, b);
      const kram::ExactNetwork step = kram::step(k, a, b);
      for (int i = 1; i <= 20; ++i) {
        const Rational d = Rational(i) / Rational(den(rng)) + Rational(i, 1000);
        out.require(bump.eval(a - d).is_zero() && bump.eval(b + d).is_zero(), "bump nonzero outside support");
        out.require(step.eval(a - d).is_zero(), "step nonzero left of its rise");
        out.require(step.eval(b + d) == Rational(1), "step not 1 right of its rise");
      }
    }
  }
  return out;
}

// 3. Derivatives against central differences and continuity at knots.
Outcome smoothness() {
  Outcome out;
  std::mt19937_64 rng(0x5eed0902);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  double worst_rel = 0.0;
  double worst_knot = 0.0;
  for (int k = 2; k <= 4; ++k) {
    std::vector<kram::KReluTerm> terms;
    for (int i = 0; i < 10; ++i) {
      terms.push_back({coef(rng), coin(rng) ? kram::Orientation::plus : kram::Orientation::minus, pos(rng), k});
    }
    const kram::KReluNetwork net(k, terms);
    const kram::KReluNetwork d = kram::differentiate(net);
    int checked = 0;
    while (checked < 100) {
      const double x = pos(rng);
      bool near = false;
      for (const auto& t : net.terms()) near = near || std::abs(x - t.knot) < 1e-3;
      if (near) continue;
      const double h = 1e-5;
      const double fd = (net(x + h) - net(x - h)) / (2 * h);
      worst_rel = std::max(worst_rel, std::abs(fd - d(x)) / std::max(1.0, std::abs(d(x))));
      ++checked;
    }
    for (const auto& t : net.terms()) {
      // Second-order one-sided quotients: the plain ones carry an O(h f'') term.
      const double h = 1e-6;
      const double x = t.knot;
      const double left = (3 * net(x) - 4 * net(x - h) + net(x - 2 * h)) / (2 * h);
      const double right = (-3 * net(x) + 4 * net(x + h) - net(x + 2 * h)) / (2 * h);
      worst_knot = std::max(worst_knot, std::abs(left - right));
    }
  }
  out.require(worst_rel <= 1e-6, "relative derivative error " + fmt(worst_rel));
  out.require(worst_knot <= 1e-4, "knot quotient gap " + fmt(worst_knot));
  out.detail = out.pass ? "max rel " + fmt(worst_rel) + ", knot gap " + fmt(worst_knot) : out.detail;
  return out;
}

double dense_sup(const TargetFunction& f, const kram::KReluNetwork& net, double lo, double hi, int points) {
  double err = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * i / points;
    err = std::max(err, std::abs(f(x) - net(x)));
  }
  return err;
}

// 4. Compact convergence on the windowed sine; C is pinned.
Outcome compact_convergence() {
  constexpr double kC = 1.0;
  Outcome out;
  const TargetFunction f = kram::make_target(
      [](double x) { return std::abs(x) <= 1.0 ? std::sin(std::numbers::pi * x) : 0.0; }, 2, Interval{-1.0, 1.0});
  double previous = std::numeric_limits<double>::infinity();
  std::string errors;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    kram::CompactApproxConfig cfg;
    cfg.epsilon = eps;
    const auto start = std::chrono::steady_clock::now();
    const auto h = kram::approx_compact(f, 2, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double err = dense_sup(f, kram::to_double(h.network), -1.0, 1.0, 100000);
    errors += (errors.empty() ? "" : ", ") + fmt(err);
    if (eps == 1e-2) {
      out.require(err <= 1e-2, "error " + fmt(err) + " at 1e-2");
      out.require(seconds < 5.0, "took " + fmt(seconds) + " s at 1e-2");
    }
    out.require(err <= kC * eps, "error " + fmt(err) + " above C*eps");
    out.require(err <= previous, "errors increased");
    previous = err;
    for (const auto& t : h.network.terms()) {
      out.require(t.knot >= Rational(-1) && t.knot <= Rational(1), "knot outside [-1, 1]");
    }
    for (int i = 1; i <= 20; ++i) {
      const Rational x = Rational(1) + Rational(i, 3);
      out.require(h.network.eval(x).is_zero() && h.network.eval(-x).is_zero(), "nonzero outside [-1, 1]");
    }
  }
  if (out.pass) out.detail = "errors " + errors + ", C = " + fmt(kC);
  return out;
}

TargetFunction x2_tanh() {
  return kram::make_target([](double x) { return x * x * std::tanh(x); }, 2);
}

// 5. Weighted tail residual of the remainder beyond R.
Outcome tail_decay() {
  Outcome out;
  const auto d = kram::decompose(x2_tanh(), 2);
  double previous = std::numeric_limits<double>::infinity();
  std::string values;
  for (double R : {4.0, 8.0, 16.0, 32.0}) {
    const double r = kram::remainder_tail_residual(d, 2, R);
    values += (values.empty() ? "" : ", ") + fmt(r);
    if (std::isfinite(previous)) {
      out.require(r < previous, "not strictly decreasing at R=" + fmt(R));
      out.require(r <= 0.75 * previous, "ratio above 0.75 at R=" + fmt(R));
    }
    previous = r;
  }
  if (out.pass) out.detail = "residuals " + values;
  return out;
}

// 6. Global approximation plus an independent re-measurement.
Outcome global_witness() {
  Outcome out;
  const TargetFunction f = x2_tanh();
  kram::GlobalConfig cfg;
  cfg.epsilon = 1e-2;
  const auto report = kram::approx_global(f, 2, cfg);
  out.require(report.success, "approx_global failed: " + report.diagnostics);
  const kram::KReluNetwork net = kram::to_double(report.network);
  // Twice the density of the report's own seed grid, over twice the window.
  const double span = 2.0 * (report.window_radius + 1.0);
  const int points = 2 * 2 * 4 * std::max(report.grid_intervals, 64);
  double err = 0.0;
  const auto visit = [&](double x) { err = std::max(err, std::abs(kram::weighted_value(f(x) - net(x), x, 2))); };
  for (int i = 0; i <= points; ++i) visit(-span + 2.0 * span * i / points);
  std::mt19937_64 rng(0x5eed0906);
  std::uniform_real_distribution<double> mant(1.0, 2.0);
  for (int m = 0; m <= 50; ++m) {
    for (int s = 0; s < 4; ++s) {
      const double x = std::ldexp(mant(rng), m) * span;
      visit(x);
      visit(-x);
    }
  }
  out.require(err <= 2e-2, "re-measured weighted error " + fmt(err));
  if (out.pass) out.detail = "reported " + fmt(report.weighted_error.lower_bound) + ", re-measured " + fmt(err);
  return out;
}

// 7. Sigmoidal substitution and the sigmoidal check.
Outcome sigmoidal() {
  Outcome out;
  const kram::KReluNetwork net(2, {kram::KReluTerm{1.0, kram::Orientation::plus, 0.0, 2}});
  const auto sigma = [](double x) { return kram::softplus(x) * kram::softplus(x); };
  const auto ex = kram::sigmoidal_substitute(net, sigma, Interval{-10.0, 10.0});
  const auto& schedule = ex.per_term.front().schedule;
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    out.require(schedule[i].second <= 1.1 * schedule[i - 1].second, "error rose at a=" + fmt(schedule[i].first));
  }
  out.require(ex.success && ex.achieved_error <= 1e-2, "substitution error " + fmt(ex.achieved_error));

  for (int k = 1; k <= 3; ++k) {
    const std::vector<std::pair<std::string, kram::RealFunction>> good = {
        {"relu^k", [k](double x) { return relu_pow(x, k); }},
        {"softplus^k", [k](double x) { return std::pow(kram::softplus(x), k); }},
        {"relu^k + 5 sin", [k](double x) { return relu_pow(x, k) + 5.0 * std::sin(x); }},
    };
    for (const auto& [name, s] : good) {
      const auto c = kram::sigmoidal_check(s, k);
      out.require(c.is_sigmoidal(), name + " not sigmoidal at k=" + std::to_string(k));
    }
    const auto c = kram::sigmoidal_check([k](double x) { return std::pow(x, k + 1); }, k);
    out.require(!c.is_sigmoidal(), "x^(k+1) accepted at k=" + std::to_string(k));
  }
  if (out.pass) out.detail = "a = " + fmt(ex.per_term.front().scale) + ", error " + fmt(ex.achieved_error);
  return out;
}

// 8. The compactified sup equals the weighted-norm lower bound.
Outcome isometry() {
  Outcome out;
  std::vector<std::pair<TargetFunction, int>> cases;
  for (int k = 1; k <= 3; ++k) cases.emplace_back(kram::make_target([k](double x) { return relu_pow(x, k); }, k), k);
  cases.emplace_back(kram::make_target([](double) { return 1.0; }, 1), 1);
  cases.emplace_back(kram::make_target([](double) { return -2.5; }, 2), 2);
  for (int k = 1; k <= 3; ++k) {
    const auto b = kram::to_double(kram::bump(k, -1.0, 2.0));
    cases.emplace_back(kram::make_target([b](double x) { return b(x); }, k), k);
  }
  cases.emplace_back(x2_tanh(), 2);
  cases.emplace_back(kram::make_target([](double x) { return 1.0 + x * x; }, 2), 2);
  double worst = 0.0;
  for (const auto& [f, k] : cases) {
    const auto est = kram::weighted_norm(f, k);
    const auto rep = kram::compactify(f, k);
    double s = 0.0;
    for (double u : est.grid.nodes) s = std::max(s, std::abs(rep(u)));
    worst = std::max(worst, std::abs(s - est.lower_bound));
  }
  out.require(worst <= 1e-12, "gap " + fmt(worst));
  if (out.pass) out.detail = std::to_string(cases.size()) + " functions, max gap " + fmt(worst);
  return out;
}

// 9. Parser and JSON round trips, the CLI identity check, byte-identical reruns.
Outcome plumbing() {
  Outcome out;
  const std::vector<std::string> corpus = {
      "x^2*tanh(x)", "sin(pi*x)*indicator(-1,1)", "relu3(x - 1) - 2*relu3(-x)", "-x^2", "2^3^2",
      "softplus(x)^2", "ln(1 + exp(-abs(x)))", "1.5e-3 / (1 + x)", "cos(x) - (1 - x)",
  };
  for (const auto& text : corpus) {
    const kram::Expr e = kram::parse(text);
    out.require(kram::structurally_equal(e, kram::parse(kram::to_string(e))), "parser round trip: " + text);
  }
  const kram::ExactNetwork bump = kram::bump(3, Rational(1, 3), Rational(7, 5));
  out.require(kram::network_from_json(kram::Json::parse(kram::dump(kram::network_to_json(bump)))) == bump,
              "exact JSON round trip");
  const kram::KReluNetwork floating(2, {{0.1, kram::Orientation::plus, 1.0 / 3.0, 2}, {-1e-300, kram::Orientation::minus, 7.5, 2}});
  const auto back = kram::to_double(kram::network_from_json(kram::Json::parse(kram::dump(kram::network_to_json(floating)))));
  out.require(back.terms() == floating.terms(), "double JSON round trip");

  const std::string cli = KRAM_CLI_PATH;
  out.require(run(cli + " verify-identities --k-max 8 > acceptance_verify1.txt 2>&1") == 0, "verify-identities exit");
  run(cli + " verify-identities --k-max 8 > acceptance_verify2.txt 2>&1");
  out.require(slurp("acceptance_verify1.txt") == slurp("acceptance_verify2.txt"), "verify output differs between runs");
  const std::string approx = cli + " approx --fn 'x^2*tanh(x)' --k 2 --eps 0.01 --curve ";
  out.require(run(approx + "acceptance_curve1.csv -o acceptance_report1.json 2>/dev/null") == 0, "approx exit");
  run(approx + "acceptance_curve2.csv -o acceptance_report2.json 2>/dev/null");
  out.require(slurp("acceptance_report1.json") == slurp("acceptance_report2.json"), "report differs between runs");
  out.require(slurp("acceptance_curve1.csv") == slurp("acceptance_curve2.csv"), "curve differs between runs");
  out.require(kram::validate_report(kram::read_json_file("acceptance_report1.json")).empty(), "report fails validation");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
    double budget_seconds;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria = {
      {"identity suite k=1..10", identities, 1.0},
      {"support exactness k=1..4", support_exactness, 0.0},
      {"derivatives and knot continuity k=2..4", smoothness, 0.0},
      {"compact convergence, windowed sine k=2", compact_convergence, 0.0},
      {"tail decay for x^2 tanh(x)", tail_decay, 2.0},
      {"global approximation of x^2 tanh(x) at 1e-2", global_witness, 10.0},
      {"sigmoidal substitution and check", sigmoidal, 5.0},
      {"isometry of the compactification", isometry, 0.0},
      {"parser, JSON and CLI plumbing", plumbing, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].check();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0.0 && seconds >= criteria[i].budget_seconds) {
      out.require(false, "runtime " + fmt(seconds) + " s over " + fmt(criteria[i].budget_seconds) + " s");
    }
    std::printf("%s criterion %zu: %s (%.2f s)%s%s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, seconds,
                out.detail.empty() ? "" : " - ", out.detail.c_str());
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
