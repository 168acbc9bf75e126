#pragma once

// Expression trees for system dynamics, with pointwise evaluation and
// inclusion-preserving interval range bounding. Expressions are stored as a
// flat postorder array, so evaluation is a single loop without recursion.
//
// Grammar for the string form (benchmark files and built-ins):
//   expression := term { ('+' | '-') term }
//   term       := unary { ('*' | '/') unary }
//   unary      := '-' unary | power
//   power      := atom [ '^' nonneg-integer ]
//   atom       := number | 'x'<index> | ('sin'|'cos'|'exp') '(' expression ')'
//               | '(' expression ')'
// Variables are 1-based: x1 .. xn.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nbc/errors.hpp"
#include "nbc/interval.hpp"

namespace nbc {

namespace detail {
class ExprParser;
}

class Expr {
 public:
  enum class Op : uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

  struct Node {
    Op op;
    int32_t a = -1, b = -1;  // child node indices
    double constant = 0.0;   // Const payload
    int32_t index = 0;       // Var index or Pow exponent
  };

  Expr() = default;

  static Expr constant(double c) {
    Expr e;
    e.nodes_.push_back({Op::Const, -1, -1, c, 0});
    return e;
  }

  static Expr variable(int index) {
    if (index < 0) throw InvalidInputError("Expr: negative variable index");
    Expr e;
    e.nodes_.push_back({Op::Var, -1, -1, 0.0, index});
    return e;
  }

  bool empty() const { return nodes_.empty(); }
  size_t node_count() const { return nodes_.size(); }

  // Largest variable index used, plus one.
  int min_dimension() const {
    int d = 0;
    for (const auto& n : nodes_)
      if (n.op == Op::Var) d = std::max(d, n.index + 1);
    return d;
  }

  double eval(const std::vector<double>& x) const {
    std::vector<double> scratch(nodes_.size());
    return eval(x, scratch);
  }

  double eval(const std::vector<double>& x, std::vector<double>& scratch) const {
    scratch.resize(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Const: scratch[i] = n.constant; break;
        case Op::Var:
          if (n.index >= static_cast<int>(x.size()))
            throw InvalidInputError("Expr::eval: variable index exceeds input dimension");
          scratch[i] = x[n.index];
          break;
        case Op::Neg: scratch[i] = -scratch[n.a]; break;
        case Op::Add: scratch[i] = scratch[n.a] + scratch[n.b]; break;
        case Op::Sub: scratch[i] = scratch[n.a] - scratch[n.b]; break;
        case Op::Mul: scratch[i] = scratch[n.a] * scratch[n.b]; break;
        case Op::Div:
          if (scratch[n.b] == 0.0) throw NumericError("Expr::eval: division by zero");
          scratch[i] = scratch[n.a] / scratch[n.b];
          break;
        case Op::Pow: scratch[i] = ipow(scratch[n.a], n.index); break;
        case Op::Sin: scratch[i] = std::sin(scratch[n.a]); break;
        case Op::Cos: scratch[i] = std::cos(scratch[n.a]); break;
        case Op::Exp: scratch[i] = std::exp(scratch[n.a]); break;
      }
    }
    return scratch.back();
  }

  // Interval range bounding: the result contains { eval(x) | x in box }.
  Interval range(const IntervalVector& box) const {
    std::vector<Interval> scratch(nodes_.size());
    return range(box, scratch);
  }

  Interval range(const IntervalVector& box, std::vector<Interval>& scratch) const {
    scratch.resize(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      switch (n.op) {
        case Op::Const: scratch[i] = Interval{n.constant, n.constant}; break;
        case Op::Var:
          if (n.index >= static_cast<int>(box.size()))
            throw InvalidInputError("Expr::range: variable index exceeds box dimension");
          scratch[i] = box[n.index];
          break;
        case Op::Neg: scratch[i] = -scratch[n.a]; break;
        case Op::Add: scratch[i] = scratch[n.a] + scratch[n.b]; break;
        case Op::Sub: scratch[i] = scratch[n.a] - scratch[n.b]; break;
        case Op::Mul: scratch[i] = scratch[n.a] * scratch[n.b]; break;
        case Op::Div: scratch[i] = scratch[n.a] / scratch[n.b]; break;
        case Op::Pow: scratch[i] = int_pow(scratch[n.a], n.index); break;
        case Op::Sin: scratch[i] = int_sin(scratch[n.a]); break;
        case Op::Cos: scratch[i] = int_cos(scratch[n.a]); break;
        case Op::Exp: scratch[i] = int_exp(scratch[n.a]); break;
      }
    }
    return scratch.back();
  }

  friend Expr parse_expr(const std::string& src, int dim);
  friend class detail::ExprParser;

 private:
  int32_t push(Node n) {
    nodes_.push_back(n);
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(const std::string& src, int dim, Expr& out) : src_(src), dim_(dim), out_(out) {}

  int32_t run() {
    const int32_t root = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInputError("expression parse error at position " + std::to_string(pos_) + ": " +
                            what + " in '" + src_ + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  int32_t expression() {
    int32_t lhs = term();
    while (true) {
      if (consume('+')) lhs = out_.push({Expr::Op::Add, lhs, term()});
      else if (consume('-')) lhs = out_.push({Expr::Op::Sub, lhs, term()});
      else return lhs;
    }
  }

  int32_t term() {
    int32_t lhs = unary();
    while (true) {
      if (consume('*')) lhs = out_.push({Expr::Op::Mul, lhs, unary()});
      else if (consume('/')) lhs = out_.push({Expr::Op::Div, lhs, unary()});
      else return lhs;
    }
  }

  int32_t unary() {
    if (consume('-')) return out_.push({Expr::Op::Neg, unary()});
    return power();
  }

  int32_t power() {
    int32_t base = atom();
    if (consume('^')) {
      skip_ws();
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a non-negative integer exponent");
      const int exponent = std::stoi(src_.substr(start, pos_ - start));
      Expr::Node n{Expr::Op::Pow, base, -1};
      n.index = exponent;
      base = out_.push(n);
    }
    return base;
  }

  int32_t atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      const int32_t inner = expression();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character");
  }

  int32_t number() {
    size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(src_.substr(pos_), &consumed);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += consumed;
    Expr::Node n{Expr::Op::Const, -1, -1};
    n.constant = value;
    return out_.push(n);
  }

  int32_t identifier() {
    size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    if (name == "x") {
      start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a variable index after 'x'");
      const int index = std::stoi(src_.substr(start, pos_ - start));
      if (index < 1 || index > dim_) fail("variable index out of range");
      Expr::Node n{Expr::Op::Var, -1, -1};
      n.index = index - 1;
      return out_.push(n);
    }
    Expr::Op op;
    if (name == "sin") op = Expr::Op::Sin;
    else if (name == "cos") op = Expr::Op::Cos;
    else if (name == "exp") op = Expr::Op::Exp;
    else fail("unknown identifier '" + name + "'");
    if (!consume('(')) fail("expected '(' after function name");
    const int32_t inner = expression();
    if (!consume(')')) fail("expected ')'");
    return out_.push({op, inner});
  }

  const std::string& src_;
  int dim_;
  Expr& out_;
  size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(const std::string& src, int dim) {
  Expr e;
  detail::ExprParser parser(src, dim, e);
  parser.run();
  return e;
}

}  // namespace nbc
