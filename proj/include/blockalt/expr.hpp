#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Scalar math expressions over variables x1..xn.
//
// Grammar, loosest binding first:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom (('^' | '**') unary)?          right-associative
//   atom    := number | 'x'<index> | func '(' sum ')' | '(' sum ')'
//   func    := exp | log | sqrt | abs | sin | cos
//
// so '^' binds tightest (2^3^2 = 512) and unary minus sits between '^' and
// '*' ('-x1^2' is -(x1^2)). Whitespace is insignificant. Evaluation either
// produces a finite real or reports a domain error naming the offending
// operation and operand (division by zero, log of a non-positive value,
// sqrt of a negative value, non-integer power of a negative base, overflow).

namespace blockalt {

struct ParseError : std::runtime_error {
  std::size_t position;  // 0-based character offset into the source text
  ParseError(std::size_t pos, const std::string& message)
      : std::runtime_error(message + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
};

struct DomainError : std::runtime_error {
  std::string operation;
  double operand;
  DomainError(std::string op, double value)
      : std::runtime_error("domain error: " + op + " (operand " +
                           std::to_string(value) + ")"),
        operation(std::move(op)),
        operand(value) {}
};

enum class UnaryOp : std::uint8_t { Neg, Exp, Log, Sqrt, Abs, Sin, Cos };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

namespace detail {
class Parser;
struct DomainFault {
  bool failed = false;
  const char* operation = "";
  double operand = 0.0;
  void fail(const char* op, double v) {
    if (failed) return;
    failed = true;
    operation = op;
    operand = v;
  }
};
}  // namespace detail

class Expr {
public:
  struct Node {
    enum class Kind : std::uint8_t { Constant, Variable, Unary, Binary } kind;
    double value = 0.0;  // Constant
    int var = 0;         // Variable, 1-based
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    std::int32_t a = -1;
    std::int32_t b = -1;
  };

  Expr() = default;

  int n_vars() const { return n_vars_; }
  int max_var() const { return max_var_; }
  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  // True when the whole expression is the literal constant `v`.
  bool is_constant(double v) const {
    return nodes_.size() == 1 && nodes_[0].kind == Node::Kind::Constant &&
           nodes_[0].value == v;
  }

  std::optional<double> try_eval(std::span<const double> x) const noexcept {
    detail::DomainFault fault;
    double v = eval_impl(x, &fault);
    if (fault.failed) return std::nullopt;
    return v;
  }

  double eval(std::span<const double> x) const {
    detail::DomainFault fault;
    double v = eval_impl(x, &fault);
    if (fault.failed) throw DomainError(fault.operation, fault.operand);
    return v;
  }

  // Evaluation with coordinate `coord` (1-based) overridden by `v`.
  std::optional<double> try_eval_partial(std::span<const double> x, int coord,
                                         double v) const noexcept;
  double eval_partial(std::span<const double> x, int coord, double v) const;

  std::string to_string() const;

  // Structural combinators used by constraint normalization.
  static Expr difference(const Expr& lhs, const Expr& rhs);
  static Expr negated(const Expr& e);

private:
  friend Expr parse_expression(std::string_view, int);
  friend class detail::Parser;

  double eval_impl(std::span<const double> x, detail::DomainFault* fault) const;

  std::int32_t append(Node n) {
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;  // children always precede parents
  int n_vars_ = 0;
  int max_var_ = 0;
};

inline double Expr::eval_impl(std::span<const double> x,
                              detail::DomainFault* fault) const {
  thread_local std::vector<double> values;
  values.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double v = 0.0;
    switch (n.kind) {
      case Node::Kind::Constant:
        v = n.value;
        break;
      case Node::Kind::Variable:
        v = x[static_cast<std::size_t>(n.var - 1)];
        break;
      case Node::Kind::Unary: {
        double a = values[static_cast<std::size_t>(n.a)];
        switch (n.uop) {
          case UnaryOp::Neg: v = -a; break;
          case UnaryOp::Exp: v = std::exp(a); break;
          case UnaryOp::Log:
            if (a <= 0.0) { fault->fail("log of non-positive value", a); return 0.0; }
            v = std::log(a);
            break;
          case UnaryOp::Sqrt:
            if (a < 0.0) { fault->fail("sqrt of negative value", a); return 0.0; }
            v = std::sqrt(a);
            break;
          case UnaryOp::Abs: v = std::fabs(a); break;
          case UnaryOp::Sin: v = std::sin(a); break;
          case UnaryOp::Cos: v = std::cos(a); break;
        }
        if (!std::isfinite(v)) { fault->fail("non-finite unary result", a); return 0.0; }
        break;
      }
      case Node::Kind::Binary: {
        double a = values[static_cast<std::size_t>(n.a)];
        double b = values[static_cast<std::size_t>(n.b)];
        switch (n.bop) {
          case BinaryOp::Add: v = a + b; break;
          case BinaryOp::Sub: v = a - b; break;
          case BinaryOp::Mul: v = a * b; break;
          case BinaryOp::Div:
            if (b == 0.0) { fault->fail("division by zero", a); return 0.0; }
            v = a / b;
            break;
          case BinaryOp::Pow:
            if (a < 0.0 && b != std::floor(b)) {
              fault->fail("non-integer power of negative base", a);
              return 0.0;
            }
            v = std::pow(a, b);
            break;
        }
        if (!std::isfinite(v)) { fault->fail("non-finite binary result", a); return 0.0; }
        break;
      }
    }
    values[i] = v;
  }
  return nodes_.empty() ? 0.0 : values.back();
}

inline std::optional<double> Expr::try_eval_partial(std::span<const double> x,
                                                    int coord,
                                                    double v) const noexcept {
  thread_local std::vector<double> probe;
  probe.assign(x.begin(), x.end());
  probe[static_cast<std::size_t>(coord - 1)] = v;
  return try_eval(probe);
}

inline double Expr::eval_partial(std::span<const double> x, int coord,
                                 double v) const {
  thread_local std::vector<double> probe;
  probe.assign(x.begin(), x.end());
  probe[static_cast<std::size_t>(coord - 1)] = v;
  return eval(probe);
}

inline Expr Expr::difference(const Expr& lhs, const Expr& rhs) {
  Expr out = lhs;
  const std::int32_t offset = static_cast<std::int32_t>(out.nodes_.size());
  for (Node n : rhs.nodes_) {
    if (n.a >= 0) n.a += offset;
    if (n.b >= 0) n.b += offset;
    out.nodes_.push_back(n);
  }
  Node sub;
  sub.kind = Node::Kind::Binary;
  sub.bop = BinaryOp::Sub;
  sub.a = offset - 1;
  sub.b = static_cast<std::int32_t>(out.nodes_.size() - 1);
  out.nodes_.push_back(sub);
  out.max_var_ = std::max(lhs.max_var_, rhs.max_var_);
  out.n_vars_ = std::max(lhs.n_vars_, rhs.n_vars_);
  return out;
}

inline Expr Expr::negated(const Expr& e) {
  Expr out = e;
  Node neg;
  neg.kind = Node::Kind::Unary;
  neg.uop = UnaryOp::Neg;
  neg.a = static_cast<std::int32_t>(out.nodes_.size() - 1);
  out.nodes_.push_back(neg);
  return out;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Parser {
public:
  Parser(std::string_view src, int n_vars) : src_(src), n_vars_(n_vars) {}

  Expr parse() {
    Expr e;
    e.n_vars_ = n_vars_;
    root_ = &e;
    std::int32_t top = parse_sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError(pos_, "unexpected trailing input");
    (void)top;
    return e;
  }

private:
  std::int32_t parse_sum() {
    std::int32_t lhs = parse_product();
    for (;;) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        char op = take();
        std::int32_t rhs = parse_product();
        lhs = binary(op == '+' ? BinaryOp::Add : BinaryOp::Sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_product() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      skip_ws();
      // '**' is power, not multiplication; leave it for parse_power.
      if (peek() == '*' && peek(1) != '*') {
        take();
        lhs = binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (peek() == '/') {
        take();
        lhs = binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_unary() {
    skip_ws();
    if (peek() == '-') {
      take();
      std::int32_t a = parse_unary();
      return unary(UnaryOp::Neg, a);
    }
    if (peek() == '+') {  // unary plus, accepted and dropped
      take();
      return parse_unary();
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t base = parse_atom();
    skip_ws();
    if (peek() == '^' || (peek() == '*' && peek(1) == '*')) {
      pos_ += (peek() == '^') ? 1 : 2;
      // Exponent goes through parse_unary so '2^-3' works and the operator
      // stays right-associative.
      std::int32_t exp = parse_unary();
      return binary(BinaryOp::Pow, base, exp);
    }
    return base;
  }

  std::int32_t parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of expression");
    char c = peek();
    if (c == '(') {
      take();
      std::int32_t inner = parse_sum();
      skip_ws();
      if (peek() != ')') throw ParseError(pos_, "expected ')'");
      take();
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  std::int32_t parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' was not an exponent
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
      throw ParseError(start, "malformed number '" + text + "'");
    Expr::Node n;
    n.kind = Expr::Node::Kind::Constant;
    n.value = v;
    return root_->append(n);
  }

  std::int32_t parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);
    if (name.size() >= 2 && name[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      int index = 0;
      for (std::size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i])))
          throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
        index = index * 10 + (name[i] - '0');
        if (index > 1'000'000) throw ParseError(start, "variable index out of range");
      }
      if (index < 1 || index > n_vars_)
        throw ParseError(start, "variable index out of range: '" + std::string(name) +
                                    "' with " + std::to_string(n_vars_) + " variable(s)");
      Expr::Node n;
      n.kind = Expr::Node::Kind::Variable;
      n.var = index;
      root_->max_var_ = std::max(root_->max_var_, index);
      return root_->append(n);
    }
    UnaryOp op;
    if (name == "exp") op = UnaryOp::Exp;
    else if (name == "log") op = UnaryOp::Log;
    else if (name == "sqrt") op = UnaryOp::Sqrt;
    else if (name == "abs") op = UnaryOp::Abs;
    else if (name == "sin") op = UnaryOp::Sin;
    else if (name == "cos") op = UnaryOp::Cos;
    else throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
    skip_ws();
    if (peek() != '(') throw ParseError(pos_, "expected '(' after function name");
    take();
    std::int32_t arg = parse_sum();
    skip_ws();
    if (peek() != ')') throw ParseError(pos_, "expected ')'");
    take();
    return unary(op, arg);
  }

  std::int32_t unary(UnaryOp op, std::int32_t a) {
    Expr::Node n;
    n.kind = Expr::Node::Kind::Unary;
    n.uop = op;
    n.a = a;
    return root_->append(n);
  }

  std::int32_t binary(BinaryOp op, std::int32_t a, std::int32_t b) {
    Expr::Node n;
    n.kind = Expr::Node::Kind::Binary;
    n.bop = op;
    n.a = a;
    n.b = b;
    return root_->append(n);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char take() { return src_[pos_++]; }

  std::string_view src_;
  int n_vars_;
  std::size_t pos_ = 0;
  Expr* root_ = nullptr;
};

}  // namespace detail

inline Expr parse_expression(std::string_view source, int n_vars) {
  if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ParseError(0, "empty expression");
  if (n_vars < 0) throw ParseError(0, "variable count must be non-negative");
  return detail::Parser(source, n_vars).parse();
}

// Constraint text accepts "E <= 0", "E >= 0", "E1 <= E2", "E1 >= E2" and
// normalizes all of them to a single expression g with the meaning g(x) <= 0.
// A literal-zero side is elided so "E <= 0" yields exactly E. Equalities and
// strict inequalities are rejected.
inline Expr parse_constraint(std::string_view source, int n_vars) {
  std::size_t rel = std::string_view::npos;
  bool is_le = false;
  for (std::size_t i = 0; i < source.size(); ++i) {
    char c = source[i];
    if (c == '<' || c == '>') {
      if (i + 1 >= source.size() || source[i + 1] != '=')
        throw ParseError(i, "strict inequalities are not supported; use <= or >=");
      if (rel != std::string_view::npos)
        throw ParseError(i, "multiple relational operators in one constraint");
      rel = i;
      is_le = (c == '<');
      ++i;
    } else if (c == '=') {
      if (i == 0 || (source[i - 1] != '<' && source[i - 1] != '>'))
        throw ParseError(i, "equality constraints are not supported");
    }
  }
  if (rel == std::string_view::npos)
    throw ParseError(0, "constraint needs a relational operator (<= or >=)");

  Expr lhs = parse_expression(source.substr(0, rel), n_vars);
  Expr rhs;
  {
    std::string_view rtext = source.substr(rel + 2);
    std::size_t offset = rel + 2;
    try {
      rhs = parse_expression(rtext, n_vars);
    } catch (const ParseError& e) {
      throw ParseError(offset + e.position, e.what());
    }
  }

  const Expr& smaller = is_le ? lhs : rhs;   // g <= h form
  const Expr& larger = is_le ? rhs : lhs;
  if (larger.is_constant(0.0)) return smaller;
  if (smaller.is_constant(0.0)) return Expr::negated(larger);
  return Expr::difference(smaller, larger);
}

inline std::string Expr::to_string() const {
  if (nodes_.empty()) return "0";
  std::vector<std::string> text(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::Kind::Constant:
        text[i] = detail::format_number(n.value);
        break;
      case Node::Kind::Variable:
        text[i] = "x" + std::to_string(n.var);
        break;
      case Node::Kind::Unary: {
        const std::string& a = text[static_cast<std::size_t>(n.a)];
        switch (n.uop) {
          case UnaryOp::Neg: text[i] = "(-" + a + ")"; break;
          case UnaryOp::Exp: text[i] = "exp(" + a + ")"; break;
          case UnaryOp::Log: text[i] = "log(" + a + ")"; break;
          case UnaryOp::Sqrt: text[i] = "sqrt(" + a + ")"; break;
          case UnaryOp::Abs: text[i] = "abs(" + a + ")"; break;
          case UnaryOp::Sin: text[i] = "sin(" + a + ")"; break;
          case UnaryOp::Cos: text[i] = "cos(" + a + ")"; break;
        }
        break;
      }
      case Node::Kind::Binary: {
        const std::string& a = text[static_cast<std::size_t>(n.a)];
        const std::string& b = text[static_cast<std::size_t>(n.b)];
        const char* op = "+";
        switch (n.bop) {
          case BinaryOp::Add: op = " + "; break;
          case BinaryOp::Sub: op = " - "; break;
          case BinaryOp::Mul: op = "*"; break;
          case BinaryOp::Div: op = "/"; break;
          case BinaryOp::Pow: op = "^"; break;
        }
        text[i] = "(" + a + op + b + ")";
        break;
      }
    }
  }
  return text.back();
}

}  // namespace blockalt
