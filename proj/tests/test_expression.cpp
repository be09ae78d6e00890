#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nlop/expression.hpp"

using nlop::Expression;
using nlop::ExpressionError;

TEST_CASE("constants and arithmetic") {
  Expression e = Expression::compile("2 + 3*4 - 10/4", {});
  CHECK(e.eval({}) == doctest::Approx(11.5));
  CHECK(Expression::compile("2^10", {}).eval({}) == doctest::Approx(1024.0));
  CHECK(Expression::compile("pi", {}).eval({}) == doctest::Approx(M_PI));
  CHECK(Expression::compile("-x^2", {"x"})(3.0) == doctest::Approx(-9.0));
}

TEST_CASE("variables by position") {
  Expression e = Expression::compile("x*y + sin(x)", {"x", "y"});
  CHECK(e(2.0, 5.0) == doctest::Approx(10.0 + std::sin(2.0)));
}

TEST_CASE("function library") {
  CHECK(Expression::compile("cos(pi*x/2)", {"x"})(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(Expression::compile("exp(log(x))", {"x"})(7.5) == doctest::Approx(7.5));
  CHECK(Expression::compile("sqrt(abs(x))", {"x"})(-9.0) == doctest::Approx(3.0));
  CHECK(Expression::compile("max(x, 1 - x)", {"x"})(0.25) == doctest::Approx(0.75));
  CHECK(Expression::compile("atan(tan(x))", {"x"})(0.3) == doctest::Approx(0.3));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(Expression::compile("x +", {"x"}), ExpressionError);
  CHECK_THROWS_AS(Expression::compile("y", {"x"}), ExpressionError);
  CHECK_THROWS_AS(Expression::compile("foo(x)", {"x"}), ExpressionError);
  CHECK_THROWS_AS(Expression::compile("", {"x"}), ExpressionError);
}
