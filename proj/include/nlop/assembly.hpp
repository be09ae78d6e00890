#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nlop/kernel.hpp"
#include "nlop/mesh.hpp"

namespace nlop {

// Pair weights between lattice cells for a translation-invariant kernel:
//   w(m) = integral of j(z) rho(z - (m1 h1, m2 h2)) dz,
// rho being the cell autocorrelation (a tent per axis).  Entries are cached
// by canonical offset; the singular near-origin entries use polar/dyadic
// quadrature, kernel jump radii are honored as integration breakpoints.
class WeightTable {
public:
  WeightTable(const Mesh& mesh, const Kernel& kernel, double rel_tol = 1e-9);

  double at(int mx, int my = 0) const;
  // w(0): the self pair; finite only for integrable kernels
  double origin() const { return at(0, 0); }
  const Kernel& kernel() const { return kernel_; }
  // largest per-axis offset with a nonzero entry (clipped to the grid window)
  int reach_x() const { return reach_x_; }
  int reach_y() const { return reach_y_; }

private:
  std::array<int, 2> canonical(int mx, int my) const;
  double compute(int mx, int my) const;
  double entry_1d(int m) const;
  double entry_2d(int mx, int my) const;

  Kernel kernel_;
  int dim_;
  double hx_, hy_;
  int nx_, ny_;
  int reach_x_, reach_y_;
  double rel_tol_;
  bool radial_, square_;
  std::vector<double> circles_;  // jump radii of the radial profile
  mutable std::map<std::array<int, 2>, double> cache_;
};

// Discrete Dirichlet form of the operator on the interior cells:
//   u' (D - W) u = 1/2 sum w_ij (u_i - u_j)^2,  A = D - W + diag(kappa).
struct NonlocalForm {
  Eigen::MatrixXd W;      // pair weights, zero diagonal
  Eigen::VectorXd kappa;  // exterior (killing) mass per cell
  Eigen::VectorXd mass;   // cell volumes

  Eigen::MatrixXd interaction_laplacian() const;  // D - W
  Eigen::MatrixXd stiffness() const;              // D - W + diag(kappa)
  // u' A u evaluated from W and kappa directly
  double energy(const Eigen::VectorXd& u) const;
};

// Requires sigma < 1 and a convergent Levy integral at the declared order
// (retried slightly above it when the order is the exact threshold).
NonlocalForm assemble_stiffness(const Mesh& mesh, const Kernel& kernel, double rel_tol = 1e-9);

Eigen::VectorXd assemble_killing(const Mesh& mesh, const Kernel& kernel, double rel_tol = 1e-9);

// Pointwise exterior mass kappa(x) = integral over the complement of the
// domain of j(x - y) dy; radial kernels only.
double killing_density(const Domain& domain, const Kernel& kernel, std::span<const double> x);

struct ConvolutionOperator {
  Eigen::MatrixXd P;        // Galerkin pairing of the convolution
  double kernel_mass = 0;   // L1 norm of h
  double row_sum_norm = 0;  // max_i sum_j P_ij / vol_i, bounded by kernel_mass
};

// h must be integrable and square integrable; both are verified numerically.
ConvolutionOperator assemble_convolution(const Mesh& mesh, const Kernel& h,
                                         double rel_tol = 1e-9);

struct ExteriorPairing {
  std::vector<int> site_mx, site_my;               // lattice coordinates of exterior cells
  std::vector<std::array<double, 2>> site_centers;
  Eigen::MatrixXd E;          // dof x site pair weights
  double truncation_radius = 0;
  double dropped_tail = 0;    // bound on the exterior mass ignored per cell
};

// Pair weights between interior cells and exterior lattice cells within the
// truncation radius (0 = choose automatically from the kernel tail).
ExteriorPairing exterior_pairing(const Mesh& mesh, const Kernel& kernel,
                                 double truncation_radius = 0, double rel_tol = 1e-9);

struct ExteriorLoad {
  Eigen::VectorXd ell;
  double truncation_radius = 0;
  double dropped_tail = 0;
};

// ell_i = sum over exterior cells of g(center) * pair weight; g is sampled at
// cell midpoints (lower accuracy than the interior quadrature) and must be
// bounded on the truncated exterior.
ExteriorLoad exterior_load(const Mesh& mesh, const Kernel& kernel,
                           const std::function<double(std::span<const double>)>& g,
                           double truncation_radius = 0, double rel_tol = 1e-9);

// Midpoint-sampled form for a general symmetric two-point kernel
// k(x, y): w_ij = k(c_i, c_j) vol^2.  Lower accuracy than the
// translation-invariant path; the kernel must vanish beyond `reach`.
NonlocalForm assemble_twopoint(const Mesh& mesh, const TwoPointFn& k, double reach);

}  // namespace nlop
