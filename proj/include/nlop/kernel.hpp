#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlop {

enum class KernelFamily { Fractional, LogLaplacian, LogSchrodinger, TruncatedPower, Custom };

std::string to_string(KernelFamily f);

double euler_gamma();
double digamma_half_integer(int twice_x);  // psi(m/2) for positive integer m
double sphere_surface(int dim);            // |S^{N-1}|: 2 for N=1, 2*pi for N=2

// Translation-invariant interaction kernel j(z) on R^N, N in {1,2}.
// Kernels are even and nonnegative; the built-in families are radial.
// `sigma` is the declared integrability order: the smallest exponent such
// that min{1, |z|^t} j(z) is integrable for every t > sigma.
class Kernel {
public:
  using RadialFn = std::function<double(double)>;
  using PointFn = std::function<double(std::span<const double>)>;

  // j(z) = C(N,s) |z|^{-N-2s}, normalized so the symbol is |xi|^{2s}.
  static Kernel fractional(int dim, double s);
  // j(z) = c_N |z|^{-N} on the unit ball; carries the zero-order shift rho_N.
  static Kernel log_laplacian(int dim);
  // j(z) = pi^{-N/2} omega(|z|) |z|^{-N}, omega(r) = 2^{1-N/2} r^{N/2} K_{N/2}(r).
  static Kernel log_schrodinger(int dim);
  // j(z) = |z|^{-N-power} on the ball of the given radius; power < 1.
  static Kernel truncated_power(int dim, double power, double radius);
  static Kernel custom_radial(int dim, RadialFn profile, double sigma,
                              double support_radius = std::numeric_limits<double>::infinity(),
                              std::vector<double> discontinuities = {});
  static Kernel custom(int dim, PointFn fn, double sigma,
                       double support_radius = std::numeric_limits<double>::infinity());

  double operator()(std::span<const double> z) const;
  double operator()(double z) const;  // dim must be 1
  double radial(double r) const;      // radial profile; throws for non-radial kernels

  KernelFamily family() const { return family_; }
  int dim() const { return dim_; }
  double sigma() const { return sigma_; }
  double zero_order_shift() const { return zero_shift_; }
  double normalization() const { return norm_; }
  double fractional_order() const { return s_; }
  double power() const { return power_; }
  bool is_radial() const { return radial_fn_ || family_ != KernelFamily::Custom; }

  // Effective radial support window [window_lower, support_radius).
  double support_radius() const;
  double window_lower() const { return window_lo_; }
  // Radii where the radial profile jumps (includes window edges and the
  // support edge when the profile does not vanish there).
  std::vector<double> discontinuity_radii() const;

  // mass of {|z| > R} (clipped to the window); tail of the Levy measure.
  double tail_mass(double R) const;
  // total mass; +inf when the kernel is not integrable.
  double total_mass() const;
  // integral of j^2 over the annulus r < |z| < R.
  double squared_mass_annulus(double r, double R) const;

  Kernel restrict_near(double delta) const;  // j restricted to |z| < delta
  Kernel restrict_far(double delta) const;   // j restricted to |z| >= delta

  nlohmann::json describe() const;
  static Kernel from_json(const nlohmann::json& descriptor);

  // Inert kernel; every evaluation throws.  Exists so aggregates may hold one.
  Kernel() = default;

private:
  KernelFamily family_ = KernelFamily::Custom;
  int dim_ = 1;
  double sigma_ = 0.0;
  double zero_shift_ = 0.0;
  double norm_ = 1.0;
  double s_ = 0.0;        // fractional order
  double power_ = 0.0;    // truncated power exponent
  double support_ = std::numeric_limits<double>::infinity();  // intrinsic support
  double window_lo_ = 0.0;
  double window_hi_ = std::numeric_limits<double>::infinity();
  RadialFn radial_fn_;
  PointFn point_fn_;
  std::vector<double> custom_discont_;
  std::string expr_text_;  // retained for descriptor round trips

  double profile_unwindowed(double r) const;
};

struct DeltaSplit {
  double delta = 0.0;
  Kernel near;  // 1_{B_delta} j
  Kernel far;   // j - near; bounded, with mass c_delta
  double c_delta = 0.0;
};

// Splits a kernel at radius delta.  c_delta = mass of the far part; it grows
// without bound as delta -> 0 exactly when the kernel is non-integrable.
DeltaSplit delta_split(const Kernel& k, double delta);

struct LevyIntegral {
  bool finite = false;
  double value = 0.0;
  std::vector<double> shell_sums;  // dyadic shells toward the origin
};

// integral of min{1, |z|^{sigma_test}} j(z) dz with divergence detection.
LevyIntegral levy_integral(const Kernel& k, double sigma_test);

struct AssumptionCheck {
  bool pass = false;
  nlohmann::json evidence;
};

struct AssumptionReport {
  AssumptionCheck even;
  AssumptionCheck levy_integrable;
  AssumptionCheck non_integrable;
  AssumptionCheck square_integrable_annuli;
  AssumptionCheck gradient_bound;
  AssumptionCheck smooth_away_from_origin;
  nlohmann::json to_json() const;
};

AssumptionReport check_assumptions(const Kernel& k, std::uint64_t seed = 1234,
                                   int samples = 10000);

// Fourier symbol psi(|xi|) of the operator associated with the kernel,
// computed by quadrature of (1 - cos) against j plus the family's zero-order
// terms.  Radial kernels only.
double symbol(const Kernel& k, double xi);
double symbol(const Kernel& k, std::span<const double> xi);

using TwoPointFn =
    std::function<double(std::span<const double>, std::span<const double>)>;

// inf_x min{k(x, x+z), k(x, x-z)} estimated on a uniform grid over
// [-box_halfwidth, box_halfwidth]^N with about sample_budget points.
double symmetric_lower_bound(const TwoPointFn& k, std::span<const double> z,
                             int sample_budget, double box_halfwidth = 4.0);

}  // namespace nlop
