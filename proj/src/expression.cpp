#include "nlop/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace nlop {

namespace {

enum class Op {
  Const, Var, Add, Sub, Mul, Div, Pow, Neg,
  Sin, Cos, Tan, Asin, Acos, Atan, Exp, Log, Sqrt, Abs, Min, Max
};

int op_arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var: return 0;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Tan:
    case Op::Asin:
    case Op::Acos:
    case Op::Atan:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Abs: return 1;
    default: return 2;
  }
}

const std::map<std::string, Op>& function_table() {
  static const std::map<std::string, Op> t = {
      {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},   {"asin", Op::Asin},
      {"acos", Op::Acos}, {"atan", Op::Atan}, {"exp", Op::Exp},   {"log", Op::Log},
      {"sqrt", Op::Sqrt}, {"abs", Op::Abs},   {"pow", Op::Pow},   {"min", Op::Min},
      {"max", Op::Max}};
  return t;
}

}  // namespace

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a, b;
};

namespace {

class Parser {
public:
  Parser(const std::string& text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  std::shared_ptr<const Expression::Node> parse() {
    auto n = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ExpressionError("unexpected trailing input at position " + std::to_string(pos_));
    return n;
  }

private:
  using NodePtr = std::shared_ptr<const Expression::Node>;

  NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0, int var = -1) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->value = v;
    n->var = var;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c))
      throw ExpressionError(std::string("expected '") + c + "' at position " + std::to_string(pos_));
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+'))
        n = make(Op::Add, n, term());
      else if (accept('-'))
        n = make(Op::Sub, n, term());
      else
        return n;
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*'))
        n = make(Op::Mul, n, unary());
      else if (accept('/'))
        n = make(Op::Div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExpressionError("unexpected end of expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = text_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start) throw ExpressionError("malformed number at position " + std::to_string(pos_));
      pos_ += static_cast<std::size_t>(end - start);
      return make(Op::Const, nullptr, nullptr, v);
    }
    if (c == '(') {
      ++pos_;
      auto n = expr();
      expect(')');
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ExpressionError(std::string("unexpected character '") + c + "' at position " +
                          std::to_string(pos_));
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (accept('(')) {
      auto it = function_table().find(name);
      if (it == function_table().end()) throw ExpressionError("unknown function '" + name + "'");
      auto a = expr();
      NodePtr b;
      if (op_arity(it->second) == 2) {
        expect(',');
        b = expr();
      }
      expect(')');
      return make(it->second, a, b);
    }
    if (name == "pi") return make(Op::Const, nullptr, nullptr, M_PI);
    if (name == "e") return make(Op::Const, nullptr, nullptr, M_E);
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name)
        return make(Op::Var, nullptr, nullptr, 0.0, static_cast<int>(i));
    throw ExpressionError("unknown identifier '" + name + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, std::span<const double> v) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return v[static_cast<std::size_t>(n.var)];
    case Op::Add: return eval_node(*n.a, v) + eval_node(*n.b, v);
    case Op::Sub: return eval_node(*n.a, v) - eval_node(*n.b, v);
    case Op::Mul: return eval_node(*n.a, v) * eval_node(*n.b, v);
    case Op::Div: return eval_node(*n.a, v) / eval_node(*n.b, v);
    case Op::Pow: return std::pow(eval_node(*n.a, v), eval_node(*n.b, v));
    case Op::Neg: return -eval_node(*n.a, v);
    case Op::Sin: return std::sin(eval_node(*n.a, v));
    case Op::Cos: return std::cos(eval_node(*n.a, v));
    case Op::Tan: return std::tan(eval_node(*n.a, v));
    case Op::Asin: return std::asin(eval_node(*n.a, v));
    case Op::Acos: return std::acos(eval_node(*n.a, v));
    case Op::Atan: return std::atan(eval_node(*n.a, v));
    case Op::Exp: return std::exp(eval_node(*n.a, v));
    case Op::Log: return std::log(eval_node(*n.a, v));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, v));
    case Op::Abs: return std::abs(eval_node(*n.a, v));
    case Op::Min: return std::min(eval_node(*n.a, v), eval_node(*n.b, v));
    case Op::Max: return std::max(eval_node(*n.a, v), eval_node(*n.b, v));
  }
  return 0.0;
}

}  // namespace

Expression Expression::compile(const std::string& text, const std::vector<std::string>& variables) {
  Expression e;
  e.root_ = Parser(text, variables).parse();
  e.text_ = text;
  e.arity_ = variables.size();
  return e;
}

double Expression::eval(std::span<const double> values) const {
  if (!root_) throw ExpressionError("evaluating an empty expression");
  if (values.size() < arity_) throw ExpressionError("missing variable values");
  return eval_node(*root_, values);
}

}  // namespace nlop
