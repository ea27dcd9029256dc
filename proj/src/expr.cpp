#include "rdslab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <vector>

#include "rdslab/errors.hpp"

namespace rdslab {

struct Expr::Node {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Func };
  Op op = Op::Const;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ConfigError("expression error at offset " + std::to_string(pos) + ": " + msg +
                      " in \"" + s + "\"");
  }

  NodePtr make(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make({Expr::Node::Op::Add, 0, nullptr, lhs, parse_term()});
      } else if (eat('-')) {
        lhs = make({Expr::Node::Op::Sub, 0, nullptr, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        lhs = make({Expr::Node::Op::Mul, 0, nullptr, lhs, parse_factor()});
      } else if (eat('/')) {
        lhs = make({Expr::Node::Op::Div, 0, nullptr, lhs, parse_factor()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    skip_ws();
    if (eat('-')) return make({Expr::Node::Op::Neg, 0, nullptr, parse_factor(), nullptr});
    if (eat('+')) return parse_factor();
    NodePtr base = parse_primary();
    if (eat('^'))  // right-associative
      return make({Expr::Node::Op::Pow, 0, nullptr, base, parse_factor()});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of expression");
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + pos, &end);
      if (end == s.c_str() + pos) fail("bad number");
      pos = static_cast<std::size_t>(end - s.c_str());
      return make({Expr::Node::Op::Const, v, nullptr, nullptr, nullptr});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
      const std::string name = s.substr(start, pos - start);
      if (name == "x") return make({Expr::Node::Op::Var, 0, nullptr, nullptr, nullptr});
      if (name == "pi")
        return make({Expr::Node::Op::Const, 3.14159265358979323846, nullptr, nullptr, nullptr});
      if (name == "e")
        return make({Expr::Node::Op::Const, 2.71828182845904523536, nullptr, nullptr, nullptr});
      static const struct {
        const char* name;
        double (*fn)(double);
      } funcs[] = {{"exp", std::exp}, {"log", std::log},   {"sin", std::sin},
                   {"cos", std::cos}, {"tan", std::tan},   {"sqrt", std::sqrt},
                   {"abs", std::fabs}, {"floor", std::floor}};
      for (const auto& f : funcs) {
        if (name == f.name) {
          if (!eat('(')) fail("expected '(' after function " + name);
          NodePtr arg = parse_expr();
          if (!eat(')')) fail("expected ')'");
          return make({Expr::Node::Op::Func, 0, f.fn, arg, nullptr});
        }
      }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

double eval_node(const Expr::Node& n, double x) {
  using Op = Expr::Node::Op;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x;
    case Op::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case Op::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case Op::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case Op::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case Op::Pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
    case Op::Neg: return -eval_node(*n.lhs, x);
    case Op::Func: return n.fn(eval_node(*n.lhs, x));
  }
  return 0.0;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser p(text);
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  Expr e;
  e.root_ = root;
  e.text_ = text;
  return e;
}

double Expr::eval(double x) const {
  if (!root_) throw Error("evaluating empty expression");
  return eval_node(*root_, x);
}

}  // namespace rdslab
