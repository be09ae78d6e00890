#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "nlop/assembly.hpp"

namespace nlop {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// the shifted operator A - lambda M - P has a nonpositive eigenvalue, so the
// problem loses uniqueness; estimate() reports the offending pencil eigenvalue
class IndefiniteError : public SolverError {
 public:
  IndefiniteError(const std::string& what, double estimate)
      : SolverError(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

enum class EigenMethod { Auto, Dense, Lanczos };

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, M-orthonormal, sign-normalized
  Eigen::VectorXd residuals;     // ||A u - lambda M u|| / ||M u|| per pair
  std::string method;            // "dense" or "lanczos"
  int iterations = 0;
};

struct Solution {
  Eigen::VectorXd u;
  std::string rhs_kind;
  double residual = 0.0;
  int iterations = 0;
};

// Dirichlet eigenpairs of (A, M). count = 0 gives an empty spectrum; count
// beyond the dof count is an error. Auto picks the dense path for small
// problems and shift-invert Lanczos otherwise.
Spectrum solve_eigen(const NonlocalForm& form, int count, double tol = 1e-10,
                     EigenMethod method = EigenMethod::Auto);

// same for a raw symmetric pencil (B, diag(mass)); B need not be definite
Spectrum solve_eigen_pencil(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass, int count,
                            double tol = 1e-10, EigenMethod method = EigenMethod::Auto);

// A u = M f by Jacobi-preconditioned conjugate gradients
Solution solve_poisson(const NonlocalForm& form, const Eigen::VectorXd& f, double tol = 1e-12);

// (A - lambda M - P) u = M f + ell, with P/ell optional; a smallest-eigenvalue
// probe of the shifted pencil runs first and throws IndefiniteError if it is
// not positive definite
Solution solve_general(const NonlocalForm& form, double lambda, const ConvolutionOperator* H,
                       const Eigen::VectorXd& f, const ExteriorLoad* g, double tol = 1e-12);

// smallest eigenvalue of (B, diag(mass)): dense for small n, otherwise a short
// Lanczos estimate (iters steps)
double smallest_pencil_eigenvalue(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass,
                                  int iters = 20);

}  // namespace nlop
