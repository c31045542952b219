#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "specsim/errors.hpp"

namespace specsim {

/// Variables visible to user expressions: x, y (space), w (frequency omega), n (index).
struct ExprVars {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double n = 0.0;
};

class ParseError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// A compiled real-valued expression.
///
/// Grammar: comparisons (< <= > >= == !=), + - * / and right-associative ^, unary minus,
/// numbers, the constants pi and e, the variables x y w n, and the functions
/// exp log sin cos tan sqrt abs floor min max mod pow if(c, a, b).
class Expr {
public:
  Expr() = default;

  static Expr parse(const std::string& text) {
    Parser p{text};
    Expr e;
    e.text_ = text;
    e.fn_ = p.expression();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  double operator()(const ExprVars& v) const { return fn_(v); }
  double operator()(double x, double y = 0.0, double w = 0.0, double n = 0.0) const { return fn_({x, y, w, n}); }

  const std::string& text() const { return text_; }
  explicit operator bool() const { return static_cast<bool>(fn_); }

private:
  using Fn = std::function<double(const ExprVars&)>;

  struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw ParseError("expression '" + s + "' at column " + std::to_string(pos + 1) + ": " + what);
    }

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(const char* tok) {
      skip();
      const std::size_t n = std::char_traits<char>::length(tok);
      if (s.compare(pos, n, tok) == 0) {
        pos += n;
        return true;
      }
      return false;
    }

    Fn expression() { return comparison(); }

    Fn comparison() {
      Fn lhs = additive();
      for (;;) {
        Fn rhs;
        if (accept("<=")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) <= rhs(v) ? 1.0 : 0.0; };
        } else if (accept(">=")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) >= rhs(v) ? 1.0 : 0.0; };
        } else if (accept("==")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) == rhs(v) ? 1.0 : 0.0; };
        } else if (accept("!=")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) != rhs(v) ? 1.0 : 0.0; };
        } else if (accept("<")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) < rhs(v) ? 1.0 : 0.0; };
        } else if (accept(">")) {
          rhs = additive();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) > rhs(v) ? 1.0 : 0.0; };
        } else {
          return lhs;
        }
      }
    }

    Fn additive() {
      Fn lhs = multiplicative();
      for (;;) {
        if (accept("+")) {
          Fn rhs = multiplicative();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) + rhs(v); };
        } else if (accept("-")) {
          Fn rhs = multiplicative();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) - rhs(v); };
        } else {
          return lhs;
        }
      }
    }

    Fn multiplicative() {
      Fn lhs = unary();
      for (;;) {
        if (accept("*")) {
          Fn rhs = unary();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) * rhs(v); };
        } else if (accept("/")) {
          Fn rhs = unary();
          lhs = [lhs, rhs](const ExprVars& v) { return lhs(v) / rhs(v); };
        } else {
          return lhs;
        }
      }
    }

    // -x^2 parses as -(x^2)
    Fn unary() {
      if (accept("-")) {
        Fn a = unary();
        return [a](const ExprVars& v) { return -a(v); };
      }
      if (accept("+")) return unary();
      return power();
    }

    Fn power() {
      Fn base = primary();
      if (accept("^")) {
        Fn ex = unary();
        return [base, ex](const ExprVars& v) { return std::pow(base(v), ex(v)); };
      }
      return base;
    }

    Fn number() {
      const char* begin = s.c_str() + pos;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) fail("expected a number");
      pos += static_cast<std::size_t>(end - begin);
      return [value](const ExprVars&) { return value; };
    }

    std::string identifier() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      return s.substr(start, pos - start);
    }

    std::vector<Fn> arguments() {
      std::vector<Fn> args;
      if (!accept("(")) fail("expected '('");
      if (accept(")")) return args;
      do {
        args.push_back(expression());
      } while (accept(","));
      if (!accept(")")) fail("expected ')'");
      return args;
    }

    Fn call(const std::string& name, std::vector<Fn> a) {
      auto arity = [&](std::size_t n) {
        if (a.size() != n) fail(name + " takes " + std::to_string(n) + " argument(s)");
      };
      using F1 = double (*)(double);
      static const std::pair<const char*, F1> unary_fns[] = {
          {"exp", [](double t) { return std::exp(t); }},     {"log", [](double t) { return std::log(t); }},
          {"sin", [](double t) { return std::sin(t); }},     {"cos", [](double t) { return std::cos(t); }},
          {"tan", [](double t) { return std::tan(t); }},     {"sqrt", [](double t) { return std::sqrt(t); }},
          {"abs", [](double t) { return std::abs(t); }},     {"floor", [](double t) { return std::floor(t); }},
      };
      for (const auto& [fname, f] : unary_fns) {
        if (name == fname) {
          arity(1);
          return [f, x = a[0]](const ExprVars& v) { return f(x(v)); };
        }
      }
      if (name == "min" || name == "max" || name == "mod" || name == "pow") {
        arity(2);
        Fn p = a[0], q = a[1];
        if (name == "min") return [p, q](const ExprVars& v) { return std::min(p(v), q(v)); };
        if (name == "max") return [p, q](const ExprVars& v) { return std::max(p(v), q(v)); };
        if (name == "pow") return [p, q](const ExprVars& v) { return std::pow(p(v), q(v)); };
        // floored modulus, result has the sign of the divisor
        return [p, q](const ExprVars& v) {
          const double b = q(v);
          const double r = p(v) - b * std::floor(p(v) / b);
          return r == b ? 0.0 : r;
        };
      }
      if (name == "if") {
        arity(3);
        return [c = a[0], t = a[1], f = a[2]](const ExprVars& v) { return c(v) != 0.0 ? t(v) : f(v); };
      }
      fail("unknown function '" + name + "'");
    }

    Fn primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of expression");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        Fn e = expression();
        if (!accept(")")) fail("expected ')'");
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::string name = identifier();
        skip();
        if (pos < s.size() && s[pos] == '(') return call(name, arguments());
        if (name == "x") return [](const ExprVars& v) { return v.x; };
        if (name == "y") return [](const ExprVars& v) { return v.y; };
        if (name == "w") return [](const ExprVars& v) { return v.w; };
        if (name == "n") return [](const ExprVars& v) { return v.n; };
        if (name == "pi") return [](const ExprVars&) { return std::numbers::pi; };
        if (name == "e") return [](const ExprVars&) { return std::numbers::e; };
        fail("unknown identifier '" + name + "'");
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  std::string text_;
  Fn fn_;
};

}  // namespace specsim
