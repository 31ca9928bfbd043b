#pragma once

// Serialization: kram-net/1 and kram-report/1 JSON documents and the
// error-curve / grid CSV files. Field order and number formatting are fixed
// so identical inputs give byte-identical files.

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kram/approximate.hpp"
#include "kram/errors.hpp"
#include "kram/network.hpp"

namespace kram {

using Json = nlohmann::ordered_json;

inline constexpr const char* kNetworkFormat = "kram-net/1";
inline constexpr const char* kReportFormat = "kram-report/1";

/// Shortest decimal string that round-trips to the same double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

/// JSON number, or "inf" / "-inf" / "nan" strings for non-finite values.
inline Json json_real(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(format_real(v));
}

namespace detail {

inline Json exact_json(const Rational& r) {
  Json j;
  j["num"] = r.numerator().str();
  j["den"] = r.denominator().str();
  return j;
}

inline Rational exact_from_json(const Json& j) {
  return Rational(BigInt(j.at("num").get<std::string>()), BigInt(j.at("den").get<std::string>()));
}

inline Rational scalar_field(const Json& term, const char* name) {
  if (term.contains("exact") && term.at("exact").contains(name)) return exact_from_json(term.at("exact").at(name));
  const Json& v = term.at(name);
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number()) return Rational::from_double(v.get<double>());
  throw IoError(std::string("term field '") + name + "' must be a decimal string");
}

}  // namespace detail

/// kram-net/1 document. Every term carries both a shortest-round-trip
/// decimal and the exact rational value of each field.
template <class S>
Json network_to_json(const Network<S>& net) {
  Json doc;
  doc["format"] = kNetworkFormat;
  doc["k"] = net.order();
  Json terms = Json::array();
  for (const auto& t : net.terms()) {
    Rational c;
    Rational knot;
    if constexpr (std::is_same_v<S, Rational>) {
      c = t.coefficient;
      knot = t.knot;
    } else {
      c = Rational::from_double(t.coefficient);
      knot = Rational::from_double(t.knot);
    }
    Json term;
    term["c"] = format_real(c.to_double());
    term["orient"] = t.orientation == Orientation::plus ? "+" : "-";
    term["knot"] = format_real(knot.to_double());
    term["exact"]["c"] = detail::exact_json(c);
    term["exact"]["knot"] = detail::exact_json(knot);
    terms.push_back(std::move(term));
  }
  doc["terms"] = std::move(terms);
  return doc;
}

/// Reads a kram-net/1 document. Exact fields win over decimal strings;
/// decimal strings are read exactly (0.1 becomes 1/10).
inline ExactNetwork network_from_json(const Json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kNetworkFormat) {
      throw IoError("unsupported network format '" + doc.at("format").get<std::string>() + "'");
    }
    const int k = doc.at("k").get<int>();
    std::vector<ExactTerm> terms;
    for (const auto& t : doc.at("terms")) {
      const std::string orient = t.at("orient").get<std::string>();
      if (orient != "+" && orient != "-") throw IoError("term orientation must be \"+\" or \"-\"");
      terms.push_back(ExactTerm{detail::scalar_field(t, "c"), orient == "+" ? Orientation::plus : Orientation::minus,
                                detail::scalar_field(t, "knot"), k});
    }
    return ExactNetwork(k, std::move(terms), ZeroPolicy::keep);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed network document: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("malformed network document: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "': file not found or unreadable");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json norm_to_json(const WeightedNormEstimate& est) {
  Json j;
  j["lower_bound"] = json_real(est.lower_bound);
  j["upper_estimate"] = json_real(est.upper_estimate);
  j["argmax_x"] = json_real(est.argmax_x);
  j["converged"] = est.converged;
  j["tail_limit_minus"] = json_real(est.limits.minus.value);
  j["tail_limit_plus"] = json_real(est.limits.plus.value);
  j["grid_nodes"] = est.grid.nodes.size();
  j["refinement_depth"] = est.grid.refinement_depth;
  return j;
}

inline Json report_to_json(const ApproxReport& r) {
  Json j;
  j["format"] = kReportFormat;
  j["mode"] = r.mode;
  j["success"] = r.success;
  j["k"] = r.k;
  j["epsilon"] = json_real(r.epsilon);
  j["beta_plus"] = json_real(r.beta_plus);
  j["beta_minus"] = json_real(r.beta_minus);
  j["window_radius"] = json_real(r.window_radius);
  j["term_count"] = r.term_count;
  j["grid_intervals"] = r.grid_intervals;
  j["tail_residual"] = json_real(r.tail_residual);
  j["weighted_error"] = norm_to_json(r.weighted_error);
  j["sup_error_on_window"] = json_real(r.sup_error_on_window);
  j["diagnostics"] = r.diagnostics;
  j["network"] = network_to_json(r.network);
  return j;
}

/// Schema problems with a kram-report/1 document (empty when valid).
inline std::vector<std::string> validate_report(const Json& j) {
  std::vector<std::string> problems;
  const auto need = [&](const Json& obj, const char* key, auto predicate, const char* what) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(std::string("missing field '") + key + "'");
    } else if (!predicate(obj.at(key))) {
      problems.push_back(std::string("field '") + key + "' must be " + what);
    }
  };
  const auto is_real = [](const Json& v) { return v.is_number() || (v.is_string() && (v == "inf" || v == "-inf" || v == "nan")); };
  const auto is_bool = [](const Json& v) { return v.is_boolean(); };
  const auto is_uint = [](const Json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); };
  const auto is_string = [](const Json& v) { return v.is_string(); };
  const auto is_object = [](const Json& v) { return v.is_object(); };

  if (!j.is_object() || j.value("format", "") != kReportFormat) problems.emplace_back("format must be kram-report/1");
  need(j, "mode", [](const Json& v) { return v == "global" || v == "compact"; }, "\"global\" or \"compact\"");
  need(j, "success", is_bool, "a boolean");
  need(j, "k", [](const Json& v) { return v.is_number_integer() && v.get<int>() >= 1; }, "a positive integer");
  for (const char* key : {"epsilon", "beta_plus", "beta_minus", "window_radius", "tail_residual", "sup_error_on_window"}) {
    need(j, key, is_real, "a real");
  }
  need(j, "term_count", is_uint, "a nonnegative integer");
  need(j, "grid_intervals", is_uint, "a nonnegative integer");
  need(j, "diagnostics", is_string, "a string");
  need(j, "weighted_error", is_object, "an object");
  if (j.is_object() && j.contains("weighted_error") && j["weighted_error"].is_object()) {
    const Json& w = j["weighted_error"];
    for (const char* key : {"lower_bound", "upper_estimate", "argmax_x"}) need(w, key, is_real, "a real");
    need(w, "converged", is_bool, "a boolean");
  }
  need(j, "network", is_object, "an object");
  if (problems.empty()) {
    try {
      const ExactNetwork net = network_from_json(j["network"]);
      if (net.size() != j["term_count"].get<std::size_t>()) problems.emplace_back("term_count disagrees with network");
      if (net.order() != j["k"].get<int>()) problems.emplace_back("network order disagrees with k");
    } catch (const IoError& e) {
      problems.emplace_back(e.what());
    }
  }
  return problems;
}

/// Grid dump: x,u,f,weighted_f.
inline void write_grid_csv(std::ostream& os, const std::vector<GridSample>& samples) {
  os << "x,u,f,weighted_f\n";
  for (const auto& s : samples) {
    os << format_real(s.x) << ',' << format_real(s.u) << ',' << format_real(s.f) << ',' << format_real(s.weighted)
       << '\n';
  }
}

/// Error curve: x,f,approx,weighted_err.
inline void write_error_curve_csv(std::ostream& os, const std::vector<ErrorCurvePoint>& curve) {
  os << "x,f,approx,weighted_err\n";
  for (const auto& p : curve) {
    os << format_real(p.x) << ',' << format_real(p.f) << ',' << format_real(p.approx) << ','
       << format_real(p.weighted_err) << '\n';
  }
}

}  // namespace kram
