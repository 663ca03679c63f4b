#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace volterra {

/// A compiled single-variable arithmetic expression.
///
/// Grammar: numbers, the bound variable, the constants `e` and `pi`,
/// binary `+ - * / ^`, unary minus, parentheses and the functions
/// `pow(a,b)`, `exp`, `log`, `sqrt`, `abs`, `sign`, `sin`, `cos`.
/// `^` is right associative and binds tighter than unary minus, so
/// `-x^2` is `-(x^2)`.
class Expr {
 public:
  Expr() = default;

  /// Throws ValidationError with the offending column on malformed input.
  static Expr parse(std::string_view text, std::string_view variable = "x");

  double operator()(double value) const;

  const std::string& source() const noexcept { return source_; }
  const std::string& variable() const noexcept { return variable_; }
  bool empty() const noexcept { return root_ == nullptr; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  std::string variable_;
};

}  // namespace volterra
