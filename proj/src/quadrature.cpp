#include "nlop/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace nlop::quad {

namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n, starting from the Chebyshev-like estimate.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    r.nodes[i] = -t;
    r.nodes[n - 1 - i] = t;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
  return it->second;
}

double gauss(const Fn1& f, double a, double b, int order) {
  const GaussRule& r = gauss_rule(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

double gauss_segments(const Fn1& f, const std::vector<double>& bps, int order) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i)
    if (bps[i + 1] > bps[i]) s += gauss(f, bps[i], bps[i + 1], order);
  return s;
}

namespace {

double adaptive_rec(const Fn1& f, double a, double b, double rel_tol, double abs_tol, int depth) {
  double coarse = gauss(f, a, b, 8);
  double mid = 0.5 * (a + b);
  double fine = gauss(f, a, mid, 8) + gauss(f, mid, b, 8);
  double err = std::abs(fine - coarse);
  if (err <= std::max(abs_tol, rel_tol * std::abs(fine)) || depth <= 0)
    return fine;
  return adaptive_rec(f, a, mid, rel_tol, 0.5 * abs_tol, depth - 1) +
         adaptive_rec(f, mid, b, rel_tol, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double adaptive(const Fn1& f, double a, double b, double rel_tol, double abs_tol, int max_depth) {
  if (b <= a) return 0.0;
  return adaptive_rec(f, a, b, rel_tol, abs_tol, max_depth);
}

namespace {

TailResult dyadic_run(const Fn1& f, double a, double rel_tol, int max_shells, int order,
                      bool toward_zero) {
  TailResult res;
  double sum = 0.0;
  int small_in_a_row = 0, growing_in_a_row = 0;
  for (int k = 0; k < max_shells; ++k) {
    double lo, hi;
    if (toward_zero) {
      hi = a * std::ldexp(1.0, -k);
      lo = 0.5 * hi;
    } else {
      lo = a * std::ldexp(1.0, k);
      hi = 2.0 * lo;
    }
    double c = gauss(f, lo, hi, order);
    sum += c;
    res.shell_sums.push_back(c);
    if (std::abs(c) <= rel_tol * (std::abs(sum) + 1e-300))
      ++small_in_a_row;
    else
      small_in_a_row = 0;
    if (small_in_a_row >= 2) {
      res.converged = true;
      break;
    }
    std::size_t m = res.shell_sums.size();
    if (m >= 2 && std::abs(c) > std::abs(res.shell_sums[m - 2]))
      ++growing_in_a_row;
    else
      growing_in_a_row = 0;
    if (growing_in_a_row >= 6 && std::abs(c) > 1e6 * (std::abs(res.shell_sums.front()) + 1e-300))
      break;  // clearly divergent, stop accumulating
  }
  // Slow but geometric shell decay: extrapolate the remaining tail instead of
  // misreporting divergence.
  if (!res.converged && res.shell_sums.size() >= 8) {
    std::size_t m = res.shell_sums.size();
    bool decreasing = true;
    double qmax = 0.0;
    for (std::size_t i = m - 6; i < m; ++i) {
      double prev = std::abs(res.shell_sums[i - 1]), cur = std::abs(res.shell_sums[i]);
      if (!(cur < prev) || prev == 0.0) {
        decreasing = false;
        break;
      }
      qmax = std::max(qmax, cur / prev);
    }
    if (decreasing && qmax <= 0.99) {
      sum += res.shell_sums.back() * qmax / (1.0 - qmax);
      res.converged = true;
    }
  }
  res.value = sum;
  return res;
}

}  // namespace

TailResult dyadic_lower(const Fn1& f, double a, double rel_tol, int max_shells, int order) {
  return dyadic_run(f, a, rel_tol, max_shells, order, true);
}

TailResult dyadic_upper(const Fn1& f, double a, double rel_tol, int max_shells, int order) {
  return dyadic_run(f, a, rel_tol, max_shells, order, false);
}

double oscillatory_tail(const Fn1& f, double a, double half_period, double rel_tol,
                        int max_segments) {
  if (!(half_period > 0.0) || !std::isfinite(half_period))
    throw QuadratureError("oscillatory_tail: invalid half period", 0.0);
  // Partial sums of the segment series, then iterated averaging.  The averaged
  // diagonal converges geometrically for asymptotically alternating tails.
  std::vector<double> partial;
  partial.reserve(max_segments);
  double acc = 0.0;
  double prev_diag = 0.0;
  for (int k = 0; k < max_segments; ++k) {
    double lo = a + k * half_period;
    acc += gauss(f, lo, lo + half_period, 16);
    partial.push_back(acc);
    if (k < 3) continue;
    std::vector<double> row = partial;
    int levels = std::min<int>(k, 24);
    for (int j = 0; j < levels && row.size() > 1; ++j) {
      for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
      row.pop_back();
    }
    double diag = row.front();
    if (k > 4 && std::abs(diag - prev_diag) <= rel_tol * (std::abs(diag) + 1e-300))
      return diag;
    prev_diag = diag;
  }
  double est = std::abs(prev_diag) > 0 ? std::abs(prev_diag - partial.back()) : 0.0;
  throw QuadratureError("oscillatory_tail: averaging did not converge", est);
}

double gauss2(const Fn2& f, const Box2& b, int order) {
  const GaussRule& r = gauss_rule(order);
  const double mx = 0.5 * (b.x0 + b.x1), hx = 0.5 * (b.x1 - b.x0);
  const double my = 0.5 * (b.y0 + b.y1), hy = 0.5 * (b.y1 - b.y0);
  double s = 0.0;
  for (int i = 0; i < order; ++i) {
    double x = mx + hx * r.nodes[i];
    double row = 0.0;
    for (int j = 0; j < order; ++j) row += r.weights[j] * f(x, my + hy * r.nodes[j]);
    s += r.weights[i] * row;
  }
  return s * hx * hy;
}

namespace {

double adaptive2_rec(const Fn2& f, const Box2& b, double rel_tol, double abs_tol, int depth) {
  double coarse = gauss2(f, b, 6);
  double xm = 0.5 * (b.x0 + b.x1), ym = 0.5 * (b.y0 + b.y1);
  Box2 q[4] = {{b.x0, xm, b.y0, ym}, {xm, b.x1, b.y0, ym}, {b.x0, xm, ym, b.y1}, {xm, b.x1, ym, b.y1}};
  double fine = 0.0;
  for (const Box2& c : q) fine += gauss2(f, c, 6);
  double err = std::abs(fine - coarse);
  if (err <= std::max(abs_tol, rel_tol * std::abs(fine)) || depth <= 0) return fine;
  double s = 0.0;
  for (const Box2& c : q) s += adaptive2_rec(f, c, rel_tol, 0.25 * abs_tol, depth - 1);
  return s;
}

}  // namespace

double adaptive2(const Fn2& f, const Box2& b, double rel_tol, double abs_tol, int max_depth) {
  if (b.x1 <= b.x0 || b.y1 <= b.y0) return 0.0;
  return adaptive2_rec(f, b, rel_tol, abs_tol, max_depth);
}

}  // namespace nlop::quad
