#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlop::quad {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// Thrown when an integration routine cannot reach its tolerance; carries the
// last error estimate so callers can report it.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule of the given order (cached after first use).
const GaussRule& gauss_rule(int order);

double gauss(const Fn1& f, double a, double b, int order = 16);

// Composite Gauss over consecutive breakpoints (must be sorted).
double gauss_segments(const Fn1& f, const std::vector<double>& breakpoints, int order = 16);

// Adaptive bisection with an embedded G8/G16 error estimate.
double adaptive(const Fn1& f, double a, double b, double rel_tol = 1e-10,
                double abs_tol = 0.0, int max_depth = 32);

struct TailResult {
  double value = 0.0;
  bool converged = false;
  std::vector<double> shell_sums;  // contribution per dyadic shell, in visit order
};

// integral over (0, a]: shells [a 2^{-k-1}, a 2^{-k}].  Divergence shows up as
// shell sums that fail to decay; the flag is reported rather than thrown.
TailResult dyadic_lower(const Fn1& f, double a, double rel_tol = 1e-10, int max_shells = 64,
                        int order = 16);

// integral over [a, inf): shells [a 2^k, a 2^{k+1}].
TailResult dyadic_upper(const Fn1& f, double a, double rel_tol = 1e-10, int max_shells = 64,
                        int order = 16);

// integral over [a, inf) of a decaying oscillatory integrand whose sign pattern
// alternates on segments of the given half period.  Partial sums over the
// segments are accelerated with iterated averaging (Euler transform).
double oscillatory_tail(const Fn1& f, double a, double half_period, double rel_tol = 1e-10,
                        int max_segments = 120);

struct Box2 {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

double gauss2(const Fn2& f, const Box2& b, int order = 12);

// Adaptive quad-tree refinement on a rectangle.
double adaptive2(const Fn2& f, const Box2& b, double rel_tol = 1e-9, double abs_tol = 0.0,
                 int max_depth = 18);

}  // namespace nlop::quad
