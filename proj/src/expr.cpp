#include "volterra/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "volterra/errors.hpp"

namespace volterra {

struct Expr::Node {
  enum class Op { constant, variable, add, sub, mul, div, pow, neg, call };
  enum class Fn { exp, log, sqrt, abs, sign, sin, cos, pow };

  Op op = Op::constant;
  Fn fn = Fn::exp;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double x) const {
    switch (op) {
      case Op::constant:
        return value;
      case Op::variable:
        return x;
      case Op::add:
        return args[0]->eval(x) + args[1]->eval(x);
      case Op::sub:
        return args[0]->eval(x) - args[1]->eval(x);
      case Op::mul:
        return args[0]->eval(x) * args[1]->eval(x);
      case Op::div:
        return args[0]->eval(x) / args[1]->eval(x);
      case Op::pow:
        return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Op::neg:
        return -args[0]->eval(x);
      case Op::call:
        break;
    }
    const double a = args[0]->eval(x);
    switch (fn) {
      case Fn::exp:
        return std::exp(a);
      case Fn::log:
        return std::log(a);
      case Fn::sqrt:
        return std::sqrt(a);
      case Fn::abs:
        return std::fabs(a);
      case Fn::sign:
        return static_cast<double>((a > 0.0) - (a < 0.0));
      case Fn::sin:
        return std::sin(a);
      case Fn::cos:
        return std::cos(a);
      case Fn::pow:
        return std::pow(a, args[1]->eval(x));
    }
    return std::nan("");
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

class Parser {
 public:
  Parser(std::string_view text, std::string_view var) : text_(text), var_(var) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("expression '" + std::string(text_) + "': " + what + " at column " +
                          std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Expr::Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = binary(Expr::Node::Op::add, lhs, term());
      else if (accept('-'))
        lhs = binary(Expr::Node::Op::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(Expr::Node::Op::mul, lhs, unary());
      else if (accept('/'))
        lhs = binary(Expr::Node::Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expr::Node>();
      n->op = Expr::Node::Op::neg;
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Expr::Node::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expression();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    auto n = std::make_shared<Expr::Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    auto n = std::make_shared<Expr::Node>();
    if (name == var_) {
      n->op = Expr::Node::Op::variable;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }

    using Fn = Expr::Node::Fn;
    Fn fn;
    if (name == "exp")
      fn = Fn::exp;
    else if (name == "log")
      fn = Fn::log;
    else if (name == "sqrt")
      fn = Fn::sqrt;
    else if (name == "abs")
      fn = Fn::abs;
    else if (name == "sign")
      fn = Fn::sign;
    else if (name == "sin")
      fn = Fn::sin;
    else if (name == "cos")
      fn = Fn::cos;
    else if (name == "pow")
      fn = Fn::pow;
    else
      fail("unknown identifier '" + std::string(name) + "'");

    if (!accept('(')) fail("expected '(' after " + std::string(name));
    n->op = Expr::Node::Op::call;
    n->fn = fn;
    n->args.push_back(expression());
    if (fn == Fn::pow) {
      if (!accept(',')) fail("pow takes two arguments");
      n->args.push_back(expression());
    }
    if (!accept(')')) fail("expected ')'");
    return n;
  }

  std::string_view text_;
  std::string_view var_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text, std::string_view variable) {
  Expr e;
  e.root_ = Parser(text, variable).parse();
  e.source_ = std::string(text);
  e.variable_ = std::string(variable);
  return e;
}

double Expr::operator()(double value) const {
  if (!root_) throw ValidationError("evaluating an empty expression");
  return root_->eval(value);
}

}  // namespace volterra
