// kram: build, evaluate and check k-ReLU network approximations from the
// command line. Exit status: 0 success, 1 usage error, 2 verification or
// approximation failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kram/kram.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct UsageError : kram::Error {
  using kram::Error::Error;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double parse_real(const std::string& s, const std::string& flag) {
  try {
    return kram::Rational::parse(s).to_double();
  } catch (const kram::DomainError&) {
    throw UsageError(flag + ": '" + s + "' is not a number");
  }
}

// "L:R" or "L:R:N"
Range parse_range(const std::string& s, const std::string& flag, bool with_count) {
  const auto parts = split(s, ':');
  if (parts.size() != (with_count ? 3U : 2U)) {
    throw UsageError(flag + " expects " + (with_count ? "L:R:N" : "L:R") + ", got '" + s + "'");
  }
  Range r{parse_real(parts[0], flag), parse_real(parts[1], flag), 0};
  if (!(r.lo < r.hi)) throw UsageError(flag + ": need L < R");
  if (with_count) {
    try {
      r.count = std::stoi(parts[2]);
    } catch (const std::exception&) {
      throw UsageError(flag + ": N must be an integer");
    }
    if (r.count < 2) throw UsageError(flag + ": N must be >= 2");
  }
  return r;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    kram::write_text_file(path, text);
  }
}

// Diagnostics for exit status 2: to --diag when given, else stderr.
int failure(const std::string& diag_path, const kram::Json& diagnostics) {
  const std::string text = kram::dump(diagnostics);
  if (diag_path.empty()) {
    std::cerr << text;
  } else {
    kram::write_text_file(diag_path, text);
    std::cerr << "kram: failure, diagnostics written to " << diag_path << "\n";
  }
  return kFailure;
}

kram::KReluNetwork load_network(const std::string& path) {
  return kram::to_double(kram::network_from_json(kram::read_json_file(path)));
}

int run_verify(int k_max, const std::string& diag) {
  std::cout << std::left << std::setw(4) << "k" << std::setw(10) << "vanishes" << std::setw(12) << "constant"
            << std::setw(12) << "(-1)^k" << std::setw(12) << "k!" << "pointwise\n";
  bool ok = true;
  int differs = 0;
  kram::Json failures = kram::Json::array();
  for (int k = 1; k <= k_max; ++k) {
    const kram::IdentityCheck row = kram::check_identities(k);
    const bool row_ok = row.residual_is_zero && row.pointwise_agrees && row.constant == row.factorial;
    std::cout << std::setw(4) << k << std::setw(10) << (row.residual_is_zero ? "yes" : "NO") << std::setw(12)
              << row.constant.str() << std::setw(12) << row.claimed_constant.str() << std::setw(12)
              << row.factorial.str() << (row.pointwise_agrees ? "ok" : "MISMATCH") << "\n";
    if (!row_ok) {
      kram::Json f;
      f["k"] = k;
      f["residual_is_zero"] = row.residual_is_zero;
      f["constant"] = row.constant.str();
      f["pointwise_agrees"] = row.pointwise_agrees;
      failures.push_back(f);
    }
    ok = ok && row_ok;
    if (row.constant != row.claimed_constant) ++differs;
  }
  std::cout << "note: the constant differs from (-1)^k in " << differs << " of " << k_max << " rows\n";
  if (!ok) {
    kram::Json d;
    d["error"] = "identity verification failed";
    d["rows"] = failures;
    return failure(diag, d);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kram: k-ReLU network approximation in weighted sup-norms"};
  app.require_subcommand(1);
  std::string diag;
  app.add_option("--diag", diag, "Write failure diagnostics (JSON) to this file instead of stderr");

  // verify-identities
  auto* verify = app.add_subcommand("verify-identities", "Check the binomial identities in exact arithmetic");
  int k_max = 10;
  verify->add_option("--k-max", k_max, "Largest order to check")->check(CLI::Range(1, 64));

  // bump / step
  auto* bump_cmd = app.add_subcommand("bump", "Compactly supported network on [from, to]");
  auto* step_cmd = app.add_subcommand("step", "Network rising from 0 at `from` to 1 at `to`");
  int net_k = 1;
  std::string from_text;
  std::string to_text;
  std::string net_out;
  for (auto* cmd : {bump_cmd, step_cmd}) {
    cmd->add_option("--k", net_k, "Order k")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--from", from_text, "Left end (decimal or p/q, read exactly)")->required();
    cmd->add_option("--to", to_text, "Right end (decimal or p/q, read exactly)")->required();
    cmd->add_option("-o,--output", net_out, "Output kram-net/1 file (default stdout)");
  }

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a network");
  std::string net_path;
  std::string at_text;
  std::string grid_text;
  std::string csv_out;
  bool exact = false;
  eval_cmd->add_option("--net", net_path, "kram-net/1 file")->required();
  auto* at_opt = eval_cmd->add_option("--at", at_text, "Single point");
  auto* grid_opt = eval_cmd->add_option("--grid", grid_text, "Uniform grid L:R:N");
  at_opt->excludes(grid_opt);
  eval_cmd->add_option("--csv", csv_out, "CSV output for --grid (default stdout)");
  eval_cmd->add_flag("--exact", exact, "Also print the exact rational value at --at");

  // norm
  auto* norm_cmd = app.add_subcommand("norm", "Estimate sup |f| / (1 + |x|^k)");
  std::string fn_text;
  int fn_k = 1;
  double norm_tol = 1e-6;
  int depth_cap = 24;
  norm_cmd->add_option("--fn", fn_text, "Target expression in x")->required();
  norm_cmd->add_option("--k", fn_k, "Order k")->required()->check(CLI::PositiveNumber);
  norm_cmd->add_option("--tol", norm_tol, "Refinement tolerance")->check(CLI::PositiveNumber);
  norm_cmd->add_option("--depth", depth_cap, "Refinement depth cap")->check(CLI::PositiveNumber);
  norm_cmd->add_option("--csv", csv_out, "Grid dump x,u,f,weighted_f");

  // approx
  auto* approx_cmd = app.add_subcommand("approx", "Approximate a target by a k-ReLU network");
  double eps = 1e-2;
  std::string support_text;
  std::string report_out;
  std::string curve_out;
  int max_knots = 1 << 14;
  approx_cmd->add_option("--fn", fn_text, "Target expression in x")->required();
  approx_cmd->add_option("--k", fn_k, "Order k")->required()->check(CLI::PositiveNumber);
  approx_cmd->add_option("--eps", eps, "Target weighted error")->required()->check(CLI::PositiveNumber);
  approx_cmd->add_option("--support", support_text, "Assert compact support L:R (compact pipeline)");
  approx_cmd->add_option("-o,--output", report_out, "kram-report/1 output (default stdout)");
  approx_cmd->add_option("--curve", curve_out, "Error curve CSV x,f,approx,weighted_err");
  approx_cmd->add_option("--max-knots", max_knots, "Grid interval cap")->check(CLI::PositiveNumber);

  // sigmoidal
  auto* sig_cmd = app.add_subcommand("sigmoidal", "Replace ReLU^k terms by a k-sigmoidal activation");
  std::string sigma_text;
  std::string region_text;
  double sig_tol = 1e-2;
  sig_cmd->add_option("--net", net_path, "kram-net/1 file")->required();
  sig_cmd->add_option("--sigma", sigma_text, "Activation expression in x")->required();
  sig_cmd->add_option("--k", fn_k, "Order k of sigma (must match the network)")->required()->check(CLI::NonNegativeNumber);
  sig_cmd->add_option("--region", region_text, "Region L:R")->required();
  sig_cmd->add_option("--tol", sig_tol, "Total sup-error tolerance on the region")->check(CLI::PositiveNumber);
  sig_cmd->add_option("-o,--output", report_out, "JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (verify->parsed()) return run_verify(k_max, diag);

    if (bump_cmd->parsed() || step_cmd->parsed()) {
      const kram::Rational lo = kram::Rational::parse(from_text);
      const kram::Rational hi = kram::Rational::parse(to_text);
      if (!(lo < hi)) throw UsageError("--from must be less than --to");
      const kram::ExactNetwork net = bump_cmd->parsed() ? kram::bump(net_k, lo, hi) : kram::step(net_k, lo, hi);
      emit(net_out, kram::dump(kram::network_to_json(net)));
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const kram::ExactNetwork exact_net = kram::network_from_json(kram::read_json_file(net_path));
      const kram::KReluNetwork net = kram::to_double(exact_net);
      if (!at_text.empty()) {
        const kram::Rational x = kram::Rational::parse(at_text);
        std::cout << kram::format_real(net(x.to_double())) << "\n";
        if (exact) std::cout << exact_net.eval(x).str() << "\n";
        return kOk;
      }
      if (grid_text.empty()) throw UsageError("eval needs --at or --grid");
      const Range g = parse_range(grid_text, "--grid", true);
      std::vector<kram::GridSample> samples;
      for (int i = 0; i < g.count; ++i) {
        const double x = g.lo + (g.hi - g.lo) * i / (g.count - 1);
        const double v = net(x);
        samples.push_back({x, kram::to_chart(x), v, kram::weighted_value(v, x, net.order())});
      }
      std::ostringstream os;
      kram::write_grid_csv(os, samples);
      emit(csv_out, os.str());
      return kOk;
    }

    if (norm_cmd->parsed()) {
      const kram::TargetFunction f = kram::to_target(kram::parse(fn_text), fn_k);
      kram::NormConfig cfg;
      cfg.tolerance = norm_tol;
      cfg.depth_cap = depth_cap;
      const kram::WeightedNormEstimate est = kram::weighted_norm(f, fn_k, cfg);
      kram::Json j = kram::norm_to_json(est);
      j["k"] = fn_k;
      j["fn"] = fn_text;
      std::cout << kram::dump(j);
      if (!csv_out.empty()) {
        std::ostringstream os;
        kram::write_grid_csv(os, est.samples);
        kram::write_text_file(csv_out, os.str());
      }
      return kOk;
    }

    if (approx_cmd->parsed()) {
      kram::TargetFunction f = kram::to_target(kram::parse(fn_text), fn_k);
      kram::GlobalConfig cfg;
      cfg.epsilon = eps;
      cfg.compact.max_knots = max_knots;
      kram::ApproxReport report;
      if (!support_text.empty()) {
        const Range s = parse_range(support_text, "--support", false);
        f.support_hint = kram::Interval{s.lo, s.hi};
        // Spot-check the support assertion.
        const double len = s.hi - s.lo;
        for (int i = 1; i <= 64; ++i) {
          for (double x : {s.lo - len * i / 64.0, s.hi + len * i / 64.0}) {
            if (f(x) != 0.0) {
              std::cerr << "kram: warning: target is " << kram::format_real(f(x)) << " at x = " << kram::format_real(x)
                        << ", outside the asserted support\n";
              i = 65;
              break;
            }
          }
        }
        report = kram::approx_compact_report(f, fn_k, cfg);
      } else {
        report = kram::approx_global(f, fn_k, cfg);
      }
      const kram::Json j = kram::report_to_json(report);
      emit(report_out, kram::dump(j));
      if (!curve_out.empty()) {
        std::ostringstream os;
        kram::write_error_curve_csv(os, report.error_curve);
        kram::write_text_file(curve_out, os.str());
      }
      if (!report.success) {
        kram::Json d;
        d["error"] = "approximation did not reach epsilon";
        d["diagnostics"] = report.diagnostics;
        d["weighted_error"] = kram::norm_to_json(report.weighted_error);
        return failure(diag, d);
      }
      return kOk;
    }

    if (sig_cmd->parsed()) {
      const kram::KReluNetwork net = load_network(net_path);
      if (net.order() != fn_k) {
        throw UsageError("--k " + std::to_string(fn_k) + " does not match network order " + std::to_string(net.order()));
      }
      const Range region = parse_range(region_text, "--region", false);
      const kram::TargetFunction sigma = kram::to_target(kram::parse(sigma_text), fn_k);
      const kram::SigmoidalCheck check = kram::sigmoidal_check(sigma.evaluator, fn_k);
      kram::Json j;
      j["format"] = "kram-sigmoidal/1";
      j["sigma"] = sigma_text;
      j["k"] = fn_k;
      j["verdict"] = kram::to_string(check.verdict);
      j["limit_minus"] = check.limit_minus ? kram::json_real(*check.limit_minus) : kram::Json();
      j["limit_plus"] = check.limit_plus ? kram::json_real(*check.limit_plus) : kram::Json();
      if (!check.is_sigmoidal()) {
        j["detail"] = check.detail;
        emit(report_out, kram::dump(j));
        kram::Json d;
        d["error"] = "sigma is not k-sigmoidal (or undetermined)";
        d["verdict"] = kram::to_string(check.verdict);
        return failure(diag, d);
      }
      kram::SubstituteConfig cfg;
      cfg.tolerance = sig_tol;
      const kram::SigmoidalExpansion ex =
          kram::sigmoidal_substitute(net, sigma.evaluator, kram::Interval{region.lo, region.hi}, cfg);
      j["success"] = ex.success;
      j["achieved_error"] = kram::json_real(ex.achieved_error);
      kram::Json terms = kram::Json::array();
      for (std::size_t i = 0; i < ex.terms.size(); ++i) {
        kram::Json t;
        t["coefficient"] = kram::json_real(ex.terms[i].coefficient);
        t["scale"] = kram::json_real(ex.terms[i].scale);
        t["shift"] = kram::json_real(ex.terms[i].shift);
        t["a"] = kram::json_real(ex.per_term[i].scale);
        t["term_error"] = kram::json_real(ex.per_term[i].error);
        terms.push_back(t);
      }
      j["terms"] = terms;
      emit(report_out, kram::dump(j));
      if (!ex.success) {
        kram::Json d;
        d["error"] = "scale cap reached before tolerance";
        d["achieved_error"] = kram::json_real(ex.achieved_error);
        return failure(diag, d);
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "kram: " << e.what() << "\n";
    return kUsage;
  } catch (const kram::IoError& e) {
    std::cerr << "kram: " << e.what() << "\n";
    return kUsage;
  } catch (const kram::ParseError& e) {
    std::cerr << "kram: parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const kram::DomainError& e) {
    std::cerr << "kram: " << e.what() << "\n";
    return kUsage;
  } catch (const kram::Error& e) {
    kram::Json d;
    d["error"] = e.what();
    return failure(diag, d);
  }
  return kUsage;
}
