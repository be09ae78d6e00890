#include "nlop/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nlop/expression.hpp"
#include "nlop/quadrature.hpp"

namespace nlop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("kernel dim must be 1 or 2");
}

double osc_factor(int dim, double t) {
  // angular average of cos(xi . z) over the sphere |z| = r, t = |xi| r
  return dim == 1 ? std::cos(t) : std::cyl_bessel_j(0.0, t);
}

}  // namespace

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Fractional: return "fractional";
    case KernelFamily::LogLaplacian: return "log_laplacian";
    case KernelFamily::LogSchrodinger: return "log_schrodinger";
    case KernelFamily::TruncatedPower: return "truncated_power";
    case KernelFamily::Custom: return "custom";
  }
  return "?";
}

double euler_gamma() { return 0.5772156649015328606065120900824024; }

double digamma_half_integer(int twice_x) {
  if (twice_x < 1) throw std::invalid_argument("digamma_half_integer: argument must be >= 1/2");
  double x, v;
  if (twice_x % 2 == 1) {
    v = -euler_gamma() - 2.0 * std::log(2.0);  // psi(1/2)
    x = 0.5;
  } else {
    v = -euler_gamma();  // psi(1)
    x = 1.0;
  }
  while (2.0 * x < twice_x - 0.5) {
    v += 1.0 / x;
    x += 1.0;
  }
  return v;
}

double sphere_surface(int dim) {
  require_dim(dim);
  return dim == 1 ? 2.0 : 2.0 * M_PI;
}

Kernel Kernel::fractional(int dim, double s) {
  require_dim(dim);
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional: s must lie in (0,1)");
  Kernel k;
  k.family_ = KernelFamily::Fractional;
  k.dim_ = dim;
  k.s_ = s;
  k.sigma_ = 2.0 * s;
  k.norm_ = s * std::pow(4.0, s) * std::tgamma(0.5 * dim + s) /
            (std::pow(M_PI, 0.5 * dim) * std::tgamma(1.0 - s));
  return k;
}

Kernel Kernel::log_laplacian(int dim) {
  require_dim(dim);
  Kernel k;
  k.family_ = KernelFamily::LogLaplacian;
  k.dim_ = dim;
  k.sigma_ = 0.25;  // any positive order is admissible; declare a small one
  k.norm_ = std::tgamma(0.5 * dim) / std::pow(M_PI, 0.5 * dim);
  k.zero_shift_ = 2.0 * std::log(2.0) + digamma_half_integer(dim) - euler_gamma();
  k.support_ = 1.0;
  return k;
}

Kernel Kernel::log_schrodinger(int dim) {
  require_dim(dim);
  Kernel k;
  k.family_ = KernelFamily::LogSchrodinger;
  k.dim_ = dim;
  k.sigma_ = 0.25;
  k.norm_ = std::pow(M_PI, -0.5 * dim);
  return k;
}

Kernel Kernel::truncated_power(int dim, double power, double radius) {
  require_dim(dim);
  if (!(radius > 0.0)) throw std::invalid_argument("truncated_power: radius must be positive");
  if (!(power < 1.0)) throw std::invalid_argument("truncated_power: power must be < 1");
  Kernel k;
  k.family_ = KernelFamily::TruncatedPower;
  k.dim_ = dim;
  k.power_ = power;
  k.sigma_ = std::min(2.0, std::max(power, 0.25));
  k.support_ = radius;
  return k;
}

Kernel Kernel::custom_radial(int dim, RadialFn profile, double sigma, double support_radius,
                             std::vector<double> discontinuities) {
  require_dim(dim);
  if (!profile) throw std::invalid_argument("custom_radial: empty profile");
  if (!(sigma > 0.0 && sigma <= 2.0))
    throw std::invalid_argument("custom_radial: sigma must lie in (0,2]");
  Kernel k;
  k.family_ = KernelFamily::Custom;
  k.dim_ = dim;
  k.sigma_ = sigma;
  k.radial_fn_ = std::move(profile);
  k.support_ = support_radius;
  k.custom_discont_ = std::move(discontinuities);
  return k;
}

Kernel Kernel::custom(int dim, PointFn fn, double sigma, double support_radius) {
  require_dim(dim);
  if (!fn) throw std::invalid_argument("custom: empty callable");
  if (!(sigma > 0.0 && sigma <= 2.0)) throw std::invalid_argument("custom: sigma must lie in (0,2]");
  Kernel k;
  k.family_ = KernelFamily::Custom;
  k.dim_ = dim;
  k.sigma_ = sigma;
  k.point_fn_ = std::move(fn);
  k.support_ = support_radius;
  return k;
}

double Kernel::profile_unwindowed(double r) const {
  switch (family_) {
    case KernelFamily::Fractional:
      return norm_ * std::pow(r, -dim_ - 2.0 * s_);
    case KernelFamily::LogLaplacian:
      return r < support_ ? norm_ * std::pow(r, -dim_) : 0.0;
    case KernelFamily::LogSchrodinger:
      if (r > 700.0) return 0.0;
      if (dim_ == 1) return std::exp(-r) / r;
      if (r < 1e-10) return 1.0 / (M_PI * r * r);  // K_1(r) ~ 1/r
      return std::cyl_bessel_k(1.0, r) / (M_PI * r);
    case KernelFamily::TruncatedPower:
      return r < support_ ? std::pow(r, -dim_ - power_) : 0.0;
    case KernelFamily::Custom:
      if (radial_fn_) return r < support_ ? radial_fn_(r) : 0.0;
      throw std::logic_error("radial profile requested from a non-radial kernel");
  }
  return 0.0;
}

double Kernel::radial(double r) const {
  if (!is_radial()) throw std::logic_error("radial() on a non-radial kernel");
  if (!(r > 0.0)) throw std::domain_error("kernel evaluated at |z| = 0");
  if (r < window_lo_ || r >= window_hi_) return 0.0;
  return profile_unwindowed(r);
}

double Kernel::operator()(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim_)
    throw std::invalid_argument("kernel argument has wrong dimension");
  double r2 = 0.0;
  for (double c : z) r2 += c * c;
  double r = std::sqrt(r2);
  if (!(r > 0.0)) throw std::domain_error("kernel evaluated at z = 0");
  if (r < window_lo_ || r >= window_hi_) return 0.0;
  if (point_fn_) return r < support_ ? point_fn_(z) : 0.0;
  return profile_unwindowed(r);
}

double Kernel::operator()(double z) const {
  return (*this)(std::span<const double>(&z, 1));
}

double Kernel::support_radius() const { return std::min(support_, window_hi_); }

std::vector<double> Kernel::discontinuity_radii() const {
  std::vector<double> out;
  auto maybe = [&](double r) {
    if (r > 0.0 && std::isfinite(r) && r >= window_lo_ && r <= std::min(support_, window_hi_))
      out.push_back(r);
  };
  switch (family_) {
    case KernelFamily::LogLaplacian:
    case KernelFamily::TruncatedPower:
      maybe(support_);
      break;
    case KernelFamily::Custom:
      for (double d : custom_discont_) maybe(d);
      if (std::isfinite(support_)) maybe(support_);
      break;
    default:
      break;
  }
  if (window_lo_ > 0.0) out.push_back(window_lo_);
  if (std::isfinite(window_hi_) && window_hi_ < support_) out.push_back(window_hi_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// angular mean of a possibly non-radial kernel at radius r (window applied)
double angular_mean(const Kernel& k, double r) {
  if (k.is_radial()) return k.radial(r);
  if (r < k.window_lower() || r >= k.support_radius()) return 0.0;
  if (k.dim() == 1) {
    const double zp[1] = {r}, zm[1] = {-r};
    return 0.5 * (k(std::span<const double>(zp, 1)) + k(std::span<const double>(zm, 1)));
  }
  const auto& rule = quad::gauss_rule(32);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double th = M_PI * (rule.nodes[i] + 1.0);  // [0, 2pi)
    const double z[2] = {r * std::cos(th), r * std::sin(th)};
    s += rule.weights[i] * k(std::span<const double>(z, 2));
  }
  return s / 2.0;  // weights sum to 2
}

}  // namespace

double Kernel::tail_mass(double R) const {
  const double lo = std::max({R, window_lo_, 0.0});
  const double hi = std::min(support_, window_hi_);
  if (!(lo < hi)) return 0.0;
  const double S = sphere_surface(dim_);
  switch (family_) {
    case KernelFamily::Fractional: {
      double upper = std::isfinite(hi) ? std::pow(hi, -2.0 * s_) : 0.0;
      return S * norm_ * (std::pow(lo, -2.0 * s_) - upper) / (2.0 * s_);
    }
    case KernelFamily::LogLaplacian:
      return S * norm_ * std::log(hi / lo);
    case KernelFamily::TruncatedPower:
      if (power_ == 0.0) return S * std::log(hi / lo);
      return S * (std::pow(lo, -power_) - std::pow(hi, -power_)) / power_;
    case KernelFamily::LogSchrodinger: {
      double cap = std::min(hi, lo + 720.0);
      return S * quad::adaptive([&](double r) { return std::pow(r, dim_ - 1) * radial(r); }, lo,
                                cap, 1e-12);
    }
    case KernelFamily::Custom: {
      auto f = [&](double r) { return std::pow(r, dim_ - 1) * angular_mean(*this, r); };
      if (std::isfinite(hi)) {
        std::vector<double> bps = discontinuity_radii();
        bps.push_back(lo);
        bps.push_back(hi);
        std::sort(bps.begin(), bps.end());
        bps.erase(std::remove_if(bps.begin(), bps.end(),
                                 [&](double b) { return b < lo || b > hi; }),
                  bps.end());
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < bps.size(); ++i)
          s += quad::adaptive(f, bps[i], bps[i + 1], 1e-11);
        return S * s;
      }
      auto tail = quad::dyadic_upper(f, lo, 1e-11);
      return tail.converged ? S * tail.value : kInf;
    }
  }
  return 0.0;
}

double Kernel::total_mass() const {
  const double hi = std::min(support_, window_hi_);
  if (window_lo_ > 0.0) return tail_mass(window_lo_);
  switch (family_) {
    case KernelFamily::Fractional:
    case KernelFamily::LogLaplacian:
      return kInf;  // r^{-1-sigma} near the origin
    case KernelFamily::TruncatedPower:
      if (power_ >= 0.0) return kInf;
      return sphere_surface(dim_) * std::pow(hi, -power_) / (-power_);
    default:
      break;
  }
  const double a = std::isfinite(hi) ? std::min(1.0, hi) : 1.0;
  const double S = sphere_surface(dim_);
  auto f = [&](double r) { return std::pow(r, dim_ - 1) * angular_mean(*this, r); };
  auto near = quad::dyadic_lower(f, a, 1e-11);
  if (!near.converged) return kInf;
  return S * near.value + tail_mass(a);
}

double Kernel::squared_mass_annulus(double r, double R) const {
  if (!(r > 0.0 && R > r)) throw std::invalid_argument("squared_mass_annulus: need 0 < r < R");
  const double lo = std::max(r, window_lo_);
  const double hi = std::min({R, support_, window_hi_});
  if (!(lo < hi)) return 0.0;
  const double S = sphere_surface(dim_);
  auto f = [&](double t) {
    double v = angular_mean(*this, t);
    return std::pow(t, dim_ - 1) * v * v;
  };
  std::vector<double> bps = discontinuity_radii();
  bps.push_back(lo);
  bps.push_back(hi);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::remove_if(bps.begin(), bps.end(), [&](double b) { return b < lo || b > hi; }),
            bps.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i)
    s += quad::adaptive(f, bps[i], bps[i + 1], 1e-11);
  return S * s;
}

Kernel Kernel::restrict_near(double delta) const {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::domain_error("restrict_near: delta must be positive and finite");
  Kernel k = *this;
  k.window_hi_ = std::min(window_hi_, delta);
  return k;
}

Kernel Kernel::restrict_far(double delta) const {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::domain_error("restrict_far: delta must be positive and finite");
  Kernel k = *this;
  k.window_lo_ = std::max(window_lo_, delta);
  return k;
}

nlohmann::json Kernel::describe() const {
  nlohmann::json params;
  params["sigma"] = sigma_;
  switch (family_) {
    case KernelFamily::Fractional:
      params["s"] = s_;
      break;
    case KernelFamily::TruncatedPower:
      params["power"] = power_;
      params["radius"] = support_;
      break;
    case KernelFamily::Custom:
      if (!expr_text_.empty()) params["expr"] = expr_text_;
      if (std::isfinite(support_)) params["support_radius"] = support_;
      break;
    default:
      break;
  }
  nlohmann::json j;
  j["family"] = to_string(family_);
  j["dim"] = dim_;
  j["params"] = params;
  if (zero_shift_ != 0.0) j["zero_order_shift"] = zero_shift_;
  if (norm_ != 1.0) j["normalization"] = norm_;
  if (window_lo_ > 0.0 || std::isfinite(window_hi_))
    j["window"] = {window_lo_, std::isfinite(window_hi_) ? window_hi_ : -1.0};
  return j;
}

Kernel Kernel::from_json(const nlohmann::json& d) {
  if (!d.is_object()) throw std::invalid_argument("kernel descriptor must be a JSON object");
  if (!d.contains("family") || !d.contains("dim"))
    throw std::invalid_argument("kernel descriptor needs 'family' and 'dim'");
  std::string fam = d.at("family").get<std::string>();
  std::replace(fam.begin(), fam.end(), '-', '_');
  int dim = d.at("dim").get<int>();
  nlohmann::json params = d.value("params", nlohmann::json::object());
  // accept parameters either nested under "params" or at the top level
  for (auto& [key, val] : d.items())
    if (key != "family" && key != "dim" && key != "params" && !params.contains(key))
      params[key] = val;

  Kernel k = [&]() {
    if (fam == "fractional") {
      if (!params.contains("s")) throw std::invalid_argument("fractional kernel needs 's'");
      return fractional(dim, params.at("s").get<double>());
    }
    if (fam == "log_laplacian") return log_laplacian(dim);
    if (fam == "log_schrodinger") return log_schrodinger(dim);
    if (fam == "truncated_power") {
      if (!params.contains("power") || !params.contains("radius"))
        throw std::invalid_argument("truncated_power kernel needs 'power' and 'radius'");
      return truncated_power(dim, params.at("power").get<double>(),
                             params.at("radius").get<double>());
    }
    if (fam == "custom") {
      if (!params.contains("expr") || !params.contains("sigma"))
        throw std::invalid_argument("custom kernel needs 'expr' and 'sigma'");
      std::string text = params.at("expr").get<std::string>();
      double sigma = params.at("sigma").get<double>();
      double support = params.value("support_radius", kInf);
      Kernel c = [&]() {
        try {
          Expression e = Expression::compile(text, {"r"});
          return custom_radial(dim, [e](double r) { return e(r); }, sigma, support);
        } catch (const ExpressionError&) {
          std::vector<std::string> vars = dim == 1 ? std::vector<std::string>{"z"}
                                                   : std::vector<std::string>{"z1", "z2"};
          Expression e = Expression::compile(text, vars);
          return custom(
              dim, [e](std::span<const double> z) { return e.eval(z); }, sigma, support);
        }
      }();
      c.expr_text_ = text;
      return c;
    }
    throw std::invalid_argument("unknown kernel family '" + fam + "'");
  }();

  if (params.contains("sigma") && fam != "custom") k.sigma_ = params.at("sigma").get<double>();
  if (!(k.sigma_ > 0.0 && k.sigma_ <= 2.0))
    throw std::invalid_argument("kernel sigma must lie in (0,2]");
  if (d.contains("window")) {
    auto w = d.at("window");
    double lo = w.at(0).get<double>(), hi = w.at(1).get<double>();
    if (lo > 0.0) k = k.restrict_far(lo);
    if (hi > 0.0) k = k.restrict_near(hi);
  }
  return k;
}

DeltaSplit delta_split(const Kernel& k, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::domain_error("delta_split: delta must be positive and finite");
  DeltaSplit s;
  s.delta = delta;
  s.near = k.restrict_near(delta);
  s.far = k.restrict_far(delta);
  s.c_delta = k.tail_mass(delta);
  return s;
}

LevyIntegral levy_integral(const Kernel& k, double sigma_test) {
  if (!(sigma_test > 0.0 && sigma_test <= 2.0))
    throw std::invalid_argument("levy_integral: sigma_test must lie in (0,2]");
  LevyIntegral out;
  const double S = sphere_surface(k.dim());
  const double hi = k.support_radius();
  const double lo = k.window_lower();
  auto f = [&](double r) {
    return std::pow(r, k.dim() - 1 + sigma_test) * angular_mean(k, r);
  };
  double near = 0.0;
  bool near_ok = true;
  const double edge = std::min(1.0, hi);
  if (lo >= edge) {
    near = 0.0;
  } else if (lo > 0.0) {
    near = quad::adaptive(f, lo, edge, 1e-11);
  } else {
    auto res = quad::dyadic_lower(f, edge, 1e-11);
    near = res.value;
    near_ok = res.converged;
    out.shell_sums = res.shell_sums;
  }
  double far = k.tail_mass(std::max(1.0, lo));
  out.finite = near_ok && std::isfinite(far);
  out.value = S * near + far;
  return out;
}

namespace {

nlohmann::json annulus_json(double r, double R, double v) {
  return nlohmann::json{{"r", r}, {"R", R}, {"value", v}};
}

AssumptionCheck check_even(const Kernel& k, std::uint64_t seed, int samples) {
  AssumptionCheck c;
  std::mt19937_64 eng(seed);
  auto uni = [&]() { return (eng() >> 11) * 0x1.0p-53; };
  const double hi = std::isfinite(k.support_radius()) ? k.support_radius() : 3.0;
  const double lo = std::max(1e-3 * hi, k.window_lower() * (1.0 + 1e-12));
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double r = lo + (hi - lo) * uni();
    double z[2] = {0.0, 0.0};
    if (k.dim() == 1) {
      z[0] = r;
    } else {
      double th = 2.0 * M_PI * uni();
      z[0] = r * std::cos(th);
      z[1] = r * std::sin(th);
    }
    double zm[2] = {-z[0], -z[1]};
    double a = k(std::span<const double>(z, k.dim()));
    double b = k(std::span<const double>(zm, k.dim()));
    double denom = std::abs(a) + std::abs(b) + 1e-300;
    worst = std::max(worst, std::abs(a - b) / denom);
  }
  c.pass = worst <= 1e-12;
  c.evidence = {{"max_relative_asymmetry", worst}, {"samples", samples}};
  return c;
}

AssumptionCheck check_levy(const Kernel& k) {
  AssumptionCheck c;
  LevyIntegral li = levy_integral(k, k.sigma());
  if (li.finite) {
    c.pass = true;
    c.evidence = {{"sigma_tested", k.sigma()}, {"value", li.value}};
    return c;
  }
  // The declared order may be the exact integrability threshold (fractional
  // kernels declare sigma = 2s).  Retry slightly above it.
  double padded = std::min(2.0, k.sigma() + 0.1);
  LevyIntegral li2 = levy_integral(k, padded);
  c.pass = li2.finite;
  c.evidence = {{"sigma_tested", padded},
                {"value", li2.finite ? li2.value : 0.0},
                {"declared_sigma_borderline", true}};
  return c;
}

AssumptionCheck check_non_integrable(const Kernel& k) {
  AssumptionCheck c;
  const double hi = k.support_radius();
  const double a = std::isfinite(hi) ? std::min(1.0, hi) : 1.0;
  nlohmann::json shells = nlohmann::json::array();
  bool diverged = false;
  if (k.window_lower() == 0.0) {
    auto f = [&](double r) { return std::pow(r, k.dim() - 1) * angular_mean(k, r); };
    auto res = quad::dyadic_lower(f, a, 1e-11, 48);
    for (double s : res.shell_sums) shells.push_back(s);
    diverged = !res.converged;
  }
  double tail = k.tail_mass(a);
  if (!std::isfinite(tail)) diverged = true;
  c.pass = diverged;
  c.evidence = {{"total_mass", diverged ? "infinite" : nlohmann::json(k.total_mass())},
                {"origin_shell_sums", shells}};
  return c;
}

AssumptionCheck check_square_annuli(const Kernel& k) {
  AssumptionCheck c;
  const double reach = std::isfinite(k.support_radius()) ? k.support_radius() : 3.0;
  const std::pair<double, double> annuli[] = {{1e-2 * reach, 1e-1 * reach},
                                              {1e-1 * reach, 0.5 * reach},
                                              {0.5 * reach, reach}};
  bool ok = true;
  nlohmann::json rows = nlohmann::json::array();
  for (auto [r, R] : annuli) {
    double v = k.squared_mass_annulus(r, R);
    ok = ok && std::isfinite(v);
    rows.push_back(annulus_json(r, R, v));
  }
  c.pass = ok;
  c.evidence = {{"annuli", rows}};
  return c;
}

AssumptionCheck check_gradient(const Kernel& k) {
  AssumptionCheck c;
  const double expo = 1.0 + k.sigma() + k.dim();
  const double hi = std::min(3.0, std::isfinite(k.support_radius())
                                      ? k.support_radius() * (1.0 - 1e-9)
                                      : 3.0);
  const double lo = std::max(1e-3, k.window_lower() * (1.0 + 1e-6));
  auto discs = k.discontinuity_radii();
  double worst = 0.0, worst_small = 0.0, worst_large = 0.0;
  int used = 0;
  const int n = 240;
  for (int i = 0; i < n; ++i) {
    double r = lo * std::pow(hi / lo, (i + 0.5) / n);
    double eta = 1e-6 * r;
    bool near_disc = false;
    for (double d : discs)
      if (std::abs(r - d) < std::max(1e-3 * d, 16.0 * eta)) near_disc = true;
    if (near_disc) continue;
    double grad;
    if (k.is_radial()) {
      grad = std::abs(k.radial(r + eta) - k.radial(r - eta)) / (2.0 * eta);
    } else {
      // worst axis-aligned difference quotient at a fixed direction sample
      double z[2] = {r, 0.0};
      double g2 = 0.0;
      for (int ax = 0; ax < k.dim(); ++ax) {
        double zp[2] = {z[0], z[1]}, zm[2] = {z[0], z[1]};
        zp[ax] += eta;
        zm[ax] -= eta;
        double d = (k(std::span<const double>(zp, k.dim())) -
                    k(std::span<const double>(zm, k.dim()))) /
                   (2.0 * eta);
        g2 += d * d;
      }
      grad = std::sqrt(g2);
    }
    double ratio = grad * std::pow(r, expo);
    worst = std::max(worst, ratio);
    if (r < 1e-2)
      worst_small = std::max(worst_small, ratio);
    else
      worst_large = std::max(worst_large, ratio);
    ++used;
  }
  c.pass = std::isfinite(worst) && worst_small <= 100.0 * std::max(worst_large, 1e-300) + 1e-300;
  c.evidence = {{"worst_ratio", worst},
                {"bound_exponent", expo},
                {"radii_sampled", used}};
  return c;
}

AssumptionCheck check_smooth(const Kernel& k) {
  AssumptionCheck c;
  const double reach = std::isfinite(k.support_radius()) ? k.support_radius() : 3.0;
  const double scan_hi = std::min(4.0, reach * 1.2);
  const double scan_lo = std::max(1e-2, k.window_lower() * 0.8 + 1e-6);
  std::vector<double> found;
  auto value = [&](double r) { return angular_mean(k, r); };
  const int n = 2500;
  std::vector<double> rs(n), vs(n);
  for (int i = 0; i < n; ++i) {
    rs[i] = scan_lo * std::pow(scan_hi / scan_lo, double(i) / (n - 1));
    vs[i] = value(rs[i]);
  }
  for (int i = 1; i + 1 < n; ++i) {
    double d0 = std::abs(vs[i] - vs[i - 1]);
    double d1 = std::abs(vs[i + 1] - vs[i]);
    double neighbor = (i >= 2 ? std::abs(vs[i - 1] - vs[i - 2]) : d1) +
                      (i + 2 < n ? std::abs(vs[i + 2] - vs[i + 1]) : d0);
    double scale = std::abs(vs[i]) + std::abs(vs[i + 1]) + 1e-300;
    if (d1 > 4.0 * neighbor + 1e-9 * scale && d1 > 1e-6 * scale) {
      // bisect to confirm a persistent jump
      double a = rs[i], b = rs[i + 1];
      double va = vs[i], vb = vs[i + 1];
      double jump0 = std::abs(vb - va);
      for (int it = 0; it < 50 && (b - a) > 1e-13 * b; ++it) {
        double m = 0.5 * (a + b), vm = value(m);
        if (std::abs(vb - vm) >= std::abs(vm - va)) {
          a = m;
          va = vm;
        } else {
          b = m;
          vb = vm;
        }
      }
      if (std::abs(vb - va) > 0.25 * jump0) {
        double r = 0.5 * (a + b);
        if (found.empty() || std::abs(found.back() - r) > 1e-6 * r) found.push_back(r);
      }
    }
  }
  c.pass = found.empty();
  c.evidence = {{"discontinuities", found}, {"scan_range", {scan_lo, scan_hi}}};
  return c;
}

}  // namespace

nlohmann::json AssumptionReport::to_json() const {
  auto pack = [](const AssumptionCheck& c) {
    nlohmann::json j = c.evidence;
    j["pass"] = c.pass;
    return j;
  };
  return nlohmann::json{{"even", pack(even)},
                        {"levy_integrable", pack(levy_integrable)},
                        {"non_integrable", pack(non_integrable)},
                        {"square_integrable_annuli", pack(square_integrable_annuli)},
                        {"gradient_bound", pack(gradient_bound)},
                        {"smooth_away_from_origin", pack(smooth_away_from_origin)}};
}

AssumptionReport check_assumptions(const Kernel& k, std::uint64_t seed, int samples) {
  AssumptionReport r;
  r.even = check_even(k, seed, samples);
  r.levy_integrable = check_levy(k);
  r.non_integrable = check_non_integrable(k);
  r.square_integrable_annuli = check_square_annuli(k);
  r.gradient_bound = check_gradient(k);
  r.smooth_away_from_origin = check_smooth(k);
  return r;
}

double symbol(const Kernel& k, double xi) {
  if (!k.is_radial()) throw std::invalid_argument("symbol: kernel must be radial");
  xi = std::abs(xi);
  const int N = k.dim();
  const double S = sphere_surface(N);
  const bool full_log_laplacian = k.family() == KernelFamily::LogLaplacian &&
                                  k.window_lower() == 0.0 && k.support_radius() == 1.0;
  if (xi == 0.0) {
    if (full_log_laplacian) return -kInf;
    return 0.0;
  }
  auto f = [&](double r) {
    return std::pow(r, N - 1) * (1.0 - osc_factor(N, xi * r)) * k.radial(r);
  };
  const double hi = k.support_radius();
  const double lo = k.window_lower();
  double total = 0.0;

  // near-origin part, below the first breakpoint or oscillation scale
  std::vector<double> bps = k.discontinuity_radii();
  double a0 = std::min({hi, 1.0, 1.0 / xi});
  for (double d : bps) a0 = std::min(a0, d);
  if (lo == 0.0) {
    auto res = quad::dyadic_lower(f, a0, 1e-11);
    if (!res.converged)
      throw quad::QuadratureError("symbol: near-origin integral did not converge",
                                  res.shell_sums.empty() ? 0.0 : res.shell_sums.back());
    total += res.value;
  } else {
    a0 = std::max(a0, lo);
  }

  // middle part up to R0, split at kernel discontinuities
  const double R0 = std::min(hi, std::max({4.0, 2.0 * a0, 6.0 * M_PI / xi}));
  std::vector<double> seg{std::max(a0, lo)};
  for (double d : bps)
    if (d > seg.front() && d < R0) seg.push_back(d);
  seg.push_back(R0);
  std::sort(seg.begin(), seg.end());
  for (std::size_t i = 0; i + 1 < seg.size(); ++i)
    total += quad::adaptive(f, seg[i], seg[i + 1], 1e-11);

  // far part: mass minus the oscillatory integral
  if (hi > R0) {
    double mass = k.tail_mass(R0);
    if (!std::isfinite(mass))
      throw quad::QuadratureError("symbol: kernel tail is not integrable", 0.0);
    total += mass / S;
    auto osc = [&](double r) { return std::pow(r, N - 1) * osc_factor(N, xi * r) * k.radial(r); };
    if (std::isfinite(hi)) {
      int nseg = static_cast<int>((hi - R0) * xi / M_PI) + 1;
      if (nseg > 4000) throw quad::QuadratureError("symbol: oscillatory range too long", 0.0);
      std::vector<double> obps;
      for (int i = 0; i <= nseg; ++i) obps.push_back(R0 + (hi - R0) * i / nseg);
      total -= quad::gauss_segments(osc, obps, 16);
    } else {
      total -= quad::oscillatory_tail(osc, R0, M_PI / xi, 1e-11);
    }
  }
  total *= S;

  if (full_log_laplacian) {
    // exterior term of the operator plus the zero-order shift
    auto ext = [&](double r) { return osc_factor(N, xi * r) / r; };
    double tail = quad::oscillatory_tail(ext, 1.0, M_PI / xi, 1e-11);
    total += -k.normalization() * S * tail + k.zero_order_shift();
  }
  return total;
}

double symbol(const Kernel& k, std::span<const double> xi) {
  double r2 = 0.0;
  for (double c : xi) r2 += c * c;
  return symbol(k, std::sqrt(r2));
}

double symmetric_lower_bound(const TwoPointFn& k, std::span<const double> z, int sample_budget,
                             double box_halfwidth) {
  const int N = static_cast<int>(z.size());
  if (N != 1 && N != 2) throw std::invalid_argument("symmetric_lower_bound: dim must be 1 or 2");
  if (sample_budget < 1) throw std::invalid_argument("symmetric_lower_bound: empty budget");
  const int per_axis = N == 1 ? sample_budget
                              : static_cast<int>(std::ceil(std::sqrt(double(sample_budget))));
  double best = kInf;
  double xp[2], xm[2], x[2];
  const int ny = N == 2 ? per_axis : 1;
  for (int i = 0; i < per_axis; ++i) {
    x[0] = -box_halfwidth + (2.0 * box_halfwidth) * (i + 0.5) / per_axis;
    for (int jj = 0; jj < ny; ++jj) {
      x[1] = -box_halfwidth + (2.0 * box_halfwidth) * (jj + 0.5) / per_axis;
      for (int d = 0; d < N; ++d) {
        xp[d] = x[d] + z[d];
        xm[d] = x[d] - z[d];
      }
      best = std::min(best, k(std::span<const double>(x, N), std::span<const double>(xp, N)));
      best = std::min(best, k(std::span<const double>(x, N), std::span<const double>(xm, N)));
    }
  }
  return best;
}

}  // namespace nlop
