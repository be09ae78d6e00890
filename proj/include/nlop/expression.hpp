#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlop {

class ExpressionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A compiled scalar expression over named variables.  Supported syntax:
// numbers, + - * / ^, parentheses, the constants pi and e, and the functions
// sin cos tan exp log sqrt abs pow min max.
class Expression {
public:
  Expression() = default;
  static Expression compile(const std::string& text, const std::vector<std::string>& variables);

  double eval(std::span<const double> values) const;
  double operator()(double x) const { return eval(std::span<const double>(&x, 1)); }
  double operator()(double x, double y) const {
    const double v[2] = {x, y};
    return eval(std::span<const double>(v, 2));
  }

  bool valid() const { return root_ != nullptr; }
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  std::size_t arity_ = 0;
};

}  // namespace nlop
