#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "fracspec/common.hpp"

namespace fracspec {

// Small arithmetic expression over the variables x, y, r.
//
// Grammar (standard precedence, ^ binds tightest and right-associates):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := primary ('^' factor)?
//   primary:= number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers: x, y, r, pi, and the functions sin, cos, exp, sqrt, abs.
// Anything else is rejected with the offending position.
class Expr {
 public:
  static Expr parse(const std::string& text) {
    Parser p{text, 0};
    Expr e;
    e.text_ = text;
    e.root_ = p.expr(e.nodes_);
    p.skip_ws();
    if (p.pos != text.size())
      throw validation_error(err_at(text, p.pos, "unexpected trailing input"));
    return e;
  }

  double eval(double x, double y, double r) const {
    return eval_node(root_, x, y, r);
  }

  const std::string& text() const { return text_; }

 private:
  enum class Op {
    number,
    var_x,
    var_y,
    var_r,
    add,
    sub,
    mul,
    div,
    pow,
    neg,
    fn_sin,
    fn_cos,
    fn_exp,
    fn_sqrt,
    fn_abs,
  };

  struct Node {
    Op op;
    double value = 0.0;
    int a = -1, b = -1;
  };

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;

  static std::string err_at(const std::string& s, std::size_t pos,
                            const std::string& what) {
    return "expression error at position " + std::to_string(pos + 1) + ": " +
           what + " in \"" + s + "\"";
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    int expr(std::vector<Node>& out) {
      int lhs = term(out);
      for (;;) {
        if (eat('+'))
          lhs = binary(out, Op::add, lhs, term(out));
        else if (eat('-'))
          lhs = binary(out, Op::sub, lhs, term(out));
        else
          return lhs;
      }
    }

    int term(std::vector<Node>& out) {
      int lhs = factor(out);
      for (;;) {
        if (eat('*'))
          lhs = binary(out, Op::mul, lhs, factor(out));
        else if (eat('/'))
          lhs = binary(out, Op::div, lhs, factor(out));
        else
          return lhs;
      }
    }

    int factor(std::vector<Node>& out) {
      if (eat('-')) {
        Node n;
        n.op = Op::neg;
        n.a = factor(out);
        out.push_back(n);
        return static_cast<int>(out.size()) - 1;
      }
      return power(out);
    }

    int power(std::vector<Node>& out) {
      const int base = primary(out);
      if (eat('^')) return binary(out, Op::pow, base, factor(out));
      return base;
    }

    int primary(std::vector<Node>& out) {
      skip_ws();
      if (pos >= s.size())
        throw validation_error(err_at(s, pos, "expected a value"));
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        const int inner = expr(out);
        if (!eat(')'))
          throw validation_error(err_at(s, pos, "expected ')'"));
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
        return number(out);
      if (std::isalpha(static_cast<unsigned char>(c))) return ident(out);
      throw validation_error(
          err_at(s, pos, std::string("unexpected character '") + c + "'"));
    }

    int number(std::vector<Node>& out) {
      const std::size_t start = pos;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s.substr(start), &used);
      } catch (const std::exception&) {
        throw validation_error(err_at(s, start, "malformed number"));
      }
      pos = start + used;
      Node n;
      n.op = Op::number;
      n.value = v;
      out.push_back(n);
      return static_cast<int>(out.size()) - 1;
    }

    int ident(std::vector<Node>& out) {
      const std::size_t start = pos;
      while (pos < s.size() &&
             std::isalpha(static_cast<unsigned char>(s[pos])))
        ++pos;
      const std::string name = s.substr(start, pos - start);
      if (name == "x") return leaf(out, Op::var_x);
      if (name == "y") return leaf(out, Op::var_y);
      if (name == "r") return leaf(out, Op::var_r);
      if (name == "pi") {
        Node n;
        n.op = Op::number;
        n.value = pi;
        out.push_back(n);
        return static_cast<int>(out.size()) - 1;
      }
      Op fn;
      if (name == "sin")
        fn = Op::fn_sin;
      else if (name == "cos")
        fn = Op::fn_cos;
      else if (name == "exp")
        fn = Op::fn_exp;
      else if (name == "sqrt")
        fn = Op::fn_sqrt;
      else if (name == "abs")
        fn = Op::fn_abs;
      else
        throw validation_error(
            err_at(s, start, "unknown identifier '" + name + "'"));
      if (!eat('('))
        throw validation_error(
            err_at(s, pos, "expected '(' after '" + name + "'"));
      Node n;
      n.op = fn;
      n.a = expr(out);
      if (!eat(')'))
        throw validation_error(err_at(s, pos, "expected ')'"));
      out.push_back(n);
      return static_cast<int>(out.size()) - 1;
    }

    int leaf(std::vector<Node>& out, Op op) {
      Node n;
      n.op = op;
      out.push_back(n);
      return static_cast<int>(out.size()) - 1;
    }

    int binary(std::vector<Node>& out, Op op, int a, int b) {
      Node n;
      n.op = op;
      n.a = a;
      n.b = b;
      out.push_back(n);
      return static_cast<int>(out.size()) - 1;
    }
  };

  double eval_node(int id, double x, double y, double r) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::number: return n.value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::var_r: return r;
      case Op::add: return eval_node(n.a, x, y, r) + eval_node(n.b, x, y, r);
      case Op::sub: return eval_node(n.a, x, y, r) - eval_node(n.b, x, y, r);
      case Op::mul: return eval_node(n.a, x, y, r) * eval_node(n.b, x, y, r);
      case Op::div: return eval_node(n.a, x, y, r) / eval_node(n.b, x, y, r);
      case Op::pow:
        return std::pow(eval_node(n.a, x, y, r), eval_node(n.b, x, y, r));
      case Op::neg: return -eval_node(n.a, x, y, r);
      case Op::fn_sin: return std::sin(eval_node(n.a, x, y, r));
      case Op::fn_cos: return std::cos(eval_node(n.a, x, y, r));
      case Op::fn_exp: return std::exp(eval_node(n.a, x, y, r));
      case Op::fn_sqrt: return std::sqrt(eval_node(n.a, x, y, r));
      case Op::fn_abs: return std::abs(eval_node(n.a, x, y, r));
    }
    return 0.0;
  }
};

}  // namespace fracspec
