#pragma once

// Target-function expressions: a small recursive-descent parser, a printer
// whose output re-parses to the same tree, and a double-precision evaluator.
//
// Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative, binds tighter than '-'
//   primary := number | 'pi' | 'x' | name '(' expr (',' expr)* ')' | '(' expr ')'

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "kram/errors.hpp"
#include "kram/network.hpp"
#include "kram/weighted.hpp"

namespace kram {

struct SourceSpan {
  int line = 1;
  int column = 1;
  std::size_t offset = 0;
  std::size_t length = 0;
};

enum class ExprKind { number, pi, variable, neg, add, sub, mul, div, pow, call, relu_k, indicator };

struct Expr {
  ExprKind kind = ExprKind::number;
  double value = 0.0;     // number
  std::string name;       // call
  int k = 0;              // relu_k
  std::vector<Expr> args;
  SourceSpan span;
};

/// Tree equality ignoring source spans.
inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  if (a.kind == ExprKind::number && a.value != b.value) return false;
  if (a.kind == ExprKind::call && a.name != b.name) return false;
  if (a.kind == ExprKind::relu_k && a.k != b.k) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  }
  return true;
}

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column, std::vector<std::string> suggestions = {})
      : Error(format(message, line, column, suggestions)),
        line_(line),
        column_(column),
        suggestions_(std::move(suggestions)) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

 private:
  static std::string format(const std::string& message, int line, int column,
                            const std::vector<std::string>& suggestions) {
    std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!suggestions.empty()) {
      out += " (did you mean";
      for (std::size_t i = 0; i < suggestions.size(); ++i) out += (i == 0 ? " " : ", ") + suggestions[i];
      out += "?)";
    }
    return out;
  }

  int line_;
  int column_;
  std::vector<std::string> suggestions_;
};

class EvalError : public Error {
 public:
  EvalError(const std::string& message, SourceSpan span)
      : Error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message), span_(span) {}

  const SourceSpan& span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

namespace detail {

inline const std::vector<std::string>& unary_functions() {
  static const std::vector<std::string> names = {"sin", "cos", "exp", "ln", "tanh", "abs", "softplus", "relu"};
  return names;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// k for names of the form relu<k>, 0 otherwise.
inline int relu_suffix(std::string_view name) {
  if (name.size() <= 4 || name.substr(0, 4) != "relu") return 0;
  int k = 0;
  for (char c : name.substr(4)) {
    if (c < '0' || c > '9') return 0;
    k = k * 10 + (c - '0');
    if (k > 1000) return 0;
  }
  return name[4] == '0' ? 0 : k;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::vector<std::string> suggestions = {}) const {
    throw ParseError(message, line_, column_, std::move(suggestions));
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) advance();
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      fail(pos_ < src_.size() ? "expected '" + std::string(1, c) + "', found '" + std::string(1, src_[pos_]) + "'"
                              : "expected '" + std::string(1, c) + "' before end of input");
    }
  }

  SourceSpan here() const { return SourceSpan{line_, column_, pos_, 0}; }

  Expr node(ExprKind kind, SourceSpan span, std::vector<Expr> args) const {
    Expr e;
    e.kind = kind;
    span.length = pos_ - span.offset;
    e.span = span;
    e.args = std::move(args);
    return e;
  }

  Expr expression() {
    skip_space();
    const SourceSpan start = here();
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = node(ExprKind::add, start, {std::move(lhs), term()});
      } else if (accept('-')) {
        lhs = node(ExprKind::sub, start, {std::move(lhs), term()});
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    skip_space();
    const SourceSpan start = here();
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = node(ExprKind::mul, start, {std::move(lhs), unary()});
      } else if (accept('/')) {
        lhs = node(ExprKind::div, start, {std::move(lhs), unary()});
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    skip_space();
    const SourceSpan start = here();
    if (accept('-')) return node(ExprKind::neg, start, {unary()});
    return power();
  }

  Expr power() {
    skip_space();
    const SourceSpan start = here();
    Expr base = primary();
    if (accept('^')) return node(ExprKind::pow, start, {std::move(base), unary()});
    return base;
  }

  Expr primary() {
    skip_space();
    const SourceSpan start = here();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      advance();
      Expr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') return number(start);
    if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') return identifier(start);
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number(SourceSpan start) {
    const std::size_t begin = pos_;
    const auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) advance();
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      const int save_col = column_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) {
        digits();
      } else {
        pos_ = save;
        column_ = save_col;
      }
    }
    const std::string_view text = src_.substr(begin, pos_ - begin);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError("invalid number '" + std::string(text) + "'", start.line, start.column);
    }
    Expr e = node(ExprKind::number, start, {});
    e.value = v;
    return e;
  }

  Expr identifier(SourceSpan start) {
    const std::size_t begin = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) != 0 || src_[pos_] == '_')) {
      advance();
    }
    const std::string name(src_.substr(begin, pos_ - begin));
    if (name == "x") return node(ExprKind::variable, start, {});
    if (name == "pi") return node(ExprKind::pi, start, {});

    const auto& fns = unary_functions();
    const int k = relu_suffix(name);
    const bool known = k > 0 || name == "indicator" || std::find(fns.begin(), fns.end(), name) != fns.end();
    if (!known) {
      std::vector<std::string> candidates = fns;
      candidates.insert(candidates.end(), {"x", "pi", "indicator", "relu2"});
      std::vector<std::string> hints;
      for (const auto& cand : candidates) {
        if (edit_distance(name, cand) <= 2) hints.push_back(cand);
      }
      throw ParseError("unknown identifier '" + name + "'", start.line, start.column, std::move(hints));
    }
    expect('(');
    std::vector<Expr> args;
    args.push_back(expression());
    while (accept(',')) args.push_back(expression());
    expect(')');

    const std::size_t want = name == "indicator" ? 2 : 1;
    if (args.size() != want) {
      throw ParseError(name + " takes " + std::to_string(want) + " argument(s), got " + std::to_string(args.size()),
                       start.line, start.column);
    }
    if (name == "indicator") return node(ExprKind::indicator, start, std::move(args));
    if (k > 0) {
      Expr e = node(ExprKind::relu_k, start, std::move(args));
      e.k = k;
      return e;
    }
    Expr e = node(ExprKind::call, start, std::move(args));
    e.name = name;
    return e;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

inline std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

inline Expr parse(std::string_view source) { return detail::Parser(source).parse(); }

/// Fully parenthesized rendering; parse(to_string(e)) is structurally equal to e.
inline std::string to_string(const Expr& e) {
  const auto bin = [&](const char* op) { return "(" + to_string(e.args[0]) + " " + op + " " + to_string(e.args[1]) + ")"; };
  switch (e.kind) {
    case ExprKind::number: return detail::shortest(e.value);
    case ExprKind::pi: return "pi";
    case ExprKind::variable: return "x";
    case ExprKind::neg: return "(-" + to_string(e.args[0]) + ")";
    case ExprKind::add: return bin("+");
    case ExprKind::sub: return bin("-");
    case ExprKind::mul: return bin("*");
    case ExprKind::div: return bin("/");
    case ExprKind::pow: return bin("^");
    case ExprKind::call: return e.name + "(" + to_string(e.args[0]) + ")";
    case ExprKind::relu_k: return "relu" + std::to_string(e.k) + "(" + to_string(e.args[0]) + ")";
    case ExprKind::indicator: return "indicator(" + to_string(e.args[0]) + ", " + to_string(e.args[1]) + ")";
  }
  return {};
}

/// ln(1 + e^x) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double eval_expr(const Expr& e, double x) {
  switch (e.kind) {
    case ExprKind::number: return e.value;
    case ExprKind::pi: return std::numbers::pi;
    case ExprKind::variable: return x;
    case ExprKind::neg: return -eval_expr(e.args[0], x);
    case ExprKind::add: return eval_expr(e.args[0], x) + eval_expr(e.args[1], x);
    case ExprKind::sub: return eval_expr(e.args[0], x) - eval_expr(e.args[1], x);
    case ExprKind::mul: return eval_expr(e.args[0], x) * eval_expr(e.args[1], x);
    case ExprKind::div: {
      const double den = eval_expr(e.args[1], x);
      if (den == 0.0) throw EvalError("division by zero in '" + to_string(e) + "'", e.args[1].span);
      return eval_expr(e.args[0], x) / den;
    }
    case ExprKind::pow: {
      const double base = eval_expr(e.args[0], x);
      const double expo = eval_expr(e.args[1], x);
      const double v = std::pow(base, expo);
      if (std::isnan(v)) throw EvalError("pow undefined for base " + detail::shortest(base) + " in '" + to_string(e) + "'", e.span);
      return v;
    }
    case ExprKind::call: {
      const double a = eval_expr(e.args[0], x);
      const std::string& n = e.name;
      if (n == "sin") return std::sin(a);
      if (n == "cos") return std::cos(a);
      if (n == "exp") return std::exp(a);
      if (n == "tanh") return std::tanh(a);
      if (n == "abs") return std::abs(a);
      if (n == "softplus") return softplus(a);
      if (n == "relu") return std::max(a, 0.0);
      if (n == "ln") {
        if (!(a > 0.0)) throw EvalError("ln of nonpositive value " + detail::shortest(a) + " in '" + to_string(e) + "'", e.span);
        return std::log(a);
      }
      throw EvalError("unknown function '" + n + "'", e.span);
    }
    case ExprKind::relu_k: return relu_pow(eval_expr(e.args[0], x), e.k);
    case ExprKind::indicator: {
      const double lo = eval_expr(e.args[0], x);
      const double hi = eval_expr(e.args[1], x);
      return (lo <= x && x <= hi) ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

/// Wraps an expression as a target function (the tree is shared, not copied per call).
inline TargetFunction to_target(Expr e, int order_hint = 1, std::optional<Interval> support = {}) {
  auto tree = std::make_shared<const Expr>(std::move(e));
  return make_target([tree](double x) { return eval_expr(*tree, x); }, order_hint, support);
}

}  // namespace kram
