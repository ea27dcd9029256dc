#pragma once

#include <memory>
#include <string>

namespace rdslab {

// Finite arithmetic expressions in a single variable x: numbers, + - * / ^,
// parentheses, unary minus, and the functions exp, log, sin, cos, tan, sqrt,
// abs, floor. Constants pi and e are recognized.
class Expr {
 public:
  static Expr parse(const std::string& text);

  double eval(double x) const;
  const std::string& text() const { return text_; }

  Expr() = default;

  struct Node;  // defined in the implementation file

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace rdslab
