#include "nlop/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace nlop {

namespace {

void sign_normalize(Eigen::MatrixXd& U) {
  for (int c = 0; c < U.cols(); ++c) {
    int idx = 0;
    double best = 0.0;
    for (int i = 0; i < U.rows(); ++i) {
      double a = std::abs(U(i, c));
      if (a > best) {
        best = a;
        idx = i;
      }
    }
    if (U(idx, c) < 0.0) U.col(c) = -U.col(c);
  }
}

Eigen::VectorXd pair_residuals(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass,
                               const Eigen::VectorXd& vals, const Eigen::MatrixXd& vecs) {
  Eigen::VectorXd res(vals.size());
  for (int c = 0; c < vals.size(); ++c) {
    Eigen::VectorXd mu = mass.cwiseProduct(vecs.col(c));
    res[c] = (B * vecs.col(c) - vals[c] * mu).norm() / mu.norm();
  }
  return res;
}

Spectrum dense_pencil(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass, int count) {
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd C = s.asDiagonal() * B * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw SolverError("dense eigendecomposition failed");
  Spectrum sp;
  sp.method = "dense";
  sp.eigenvalues = es.eigenvalues().head(count);
  sp.eigenvectors = s.asDiagonal() * es.eigenvectors().leftCols(count);
  sign_normalize(sp.eigenvectors);
  sp.residuals = pair_residuals(B, mass, sp.eigenvalues, sp.eigenvectors);
  sp.iterations = 1;
  return sp;
}

// shift-invert Lanczos on T = (B + tau M)^{-1} M in the M inner product with
// full reorthogonalization; the largest Ritz values of T give the smallest
// pencil eigenvalues
Spectrum lanczos_pencil(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass, int count,
                        double tol) {
  const int n = static_cast<int>(mass.size());
  const double scale = std::max(1.0, B.diagonal().cwiseAbs().maxCoeff());
  double tau = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  while (llt.info() != Eigen::Success) {
    tau = tau == 0.0 ? 1e-12 * scale : tau * 100.0;
    if (tau > 1e6 * scale) throw SolverError("could not factor the shifted stiffness matrix");
    llt.compute(B + (tau * mass).asDiagonal().toDenseMatrix());
  }
  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.cwiseProduct(mass).dot(b);
  };

  std::mt19937_64 eng(0x5deece66dULL);
  auto u01 = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  Eigen::VectorXd start(n);
  for (int i = 0; i < n; ++i) start[i] = 1.0 + 0.25 * (u01() - 0.5);

  int m_steps = std::min(n, std::max(2 * count + 30, 50));
  int total_iters = 0;
  std::vector<double> history;
  for (int restart = 0; restart < 8; ++restart) {
    Eigen::MatrixXd V(n, m_steps);
    std::vector<double> alpha, beta;
    Eigen::VectorXd v = start / std::sqrt(m_dot(start, start));
    V.col(0) = v;
    Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n);
    double b_prev = 0.0;
    int m_used = m_steps;
    for (int k = 0; k < m_steps; ++k) {
      Eigen::VectorXd w = llt.solve(mass.cwiseProduct(V.col(k)));
      ++total_iters;
      double a = m_dot(w, V.col(k));
      alpha.push_back(a);
      w -= a * V.col(k);
      if (k > 0) w -= b_prev * v_prev;
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) w -= m_dot(w, V.col(j)) * V.col(j);
      double b = std::sqrt(std::max(m_dot(w, w), 0.0));
      if (k + 1 == m_steps || b < 1e-14) {
        m_used = k + 1;
        break;
      }
      beta.push_back(b);
      v_prev = V.col(k);
      b_prev = b;
      V.col(k + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_used, m_used);
    for (int k = 0; k < m_used; ++k) {
      T(k, k) = alpha[k];
      if (k + 1 < m_used) T(k, k + 1) = T(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw SolverError("tridiagonal eigendecomposition failed");
    const int avail = std::min(count, m_used);
    Spectrum sp;
    sp.method = "lanczos";
    sp.eigenvalues.resize(avail);
    sp.eigenvectors.resize(n, avail);
    // the largest theta gives the smallest pencil eigenvalue, so walking the
    // Ritz values downward yields ascending eigenvalues
    for (int c = 0; c < avail; ++c) {
      const int src = m_used - 1 - c;
      double theta = es.eigenvalues()(src);
      sp.eigenvalues[c] = 1.0 / theta - tau;
      sp.eigenvectors.col(c) = V.leftCols(m_used) * es.eigenvectors().col(src);
    }
    sp.residuals = pair_residuals(B, mass, sp.eigenvalues, sp.eigenvectors);
    double worst = avail > 0 ? sp.residuals.maxCoeff() : 0.0;
    history.push_back(worst);
    bool ok = avail == count;
    for (int c = 0; c < avail && ok; ++c)
      if (sp.residuals[c] > tol * std::max(1.0, std::abs(sp.eigenvalues[c]))) ok = false;
    if (ok) {
      sign_normalize(sp.eigenvectors);
      sp.iterations = total_iters;
      return sp;
    }
    if (avail > 0) {
      start = sp.eigenvectors.rowwise().sum();
      for (int i = 0; i < n; ++i) start[i] += 1e-3 * (u01() - 0.5);
    }
    m_steps = std::min(n, m_steps * 2);
  }
  std::ostringstream msg;
  msg << "Lanczos eigensolver did not converge; residual history:";
  for (double r : history) msg << " " << r;
  throw SolverError(msg.str());
}

// conjugate gradients with Jacobi preconditioning; context names the caller
Solution cg_solve(const Eigen::MatrixXd& B, const Eigen::VectorXd& rhs, double tol,
                  const std::string& context) {
  const int n = static_cast<int>(rhs.size());
  Solution sol;
  sol.u = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return sol;
  Eigen::VectorXd diag = B.diagonal();
  for (int i = 0; i < n; ++i)
    if (!(diag[i] > 0.0))
      throw SolverError(context + ": matrix diagonal is not positive at row " +
                        std::to_string(i));
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = r.cwiseQuotient(diag);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const int maxiter = 10 * n;
  int it = 0;
  for (; it < maxiter; ++it) {
    if (r.norm() <= tol * bnorm) break;
    Eigen::VectorXd Bp = B * p;
    const double pBp = p.dot(Bp);
    if (pBp <= 0.0)
      throw SolverError(context + ": matrix is not positive definite (p^T B p = " +
                        std::to_string(pBp) + ")");
    const double a = rz / pBp;
    sol.u += a * p;
    r -= a * Bp;
    z = r.cwiseQuotient(diag);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  sol.residual = (B * sol.u - rhs).norm() / bnorm;
  sol.iterations = it;
  if (sol.residual > 10.0 * tol && it >= maxiter)
    throw SolverError(context + ": conjugate gradients stalled at relative residual " +
                      std::to_string(sol.residual));
  return sol;
}

}  // namespace

Spectrum solve_eigen_pencil(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass, int count,
                            double tol, EigenMethod method) {
  const int n = static_cast<int>(mass.size());
  if (count < 0 || count > n)
    throw std::invalid_argument("solve_eigen: count must lie in [0, dof count]");
  if (count == 0) {
    Spectrum sp;
    sp.method = "none";
    return sp;
  }
  if (method == EigenMethod::Auto)
    method = n <= 512 || 2 * count > n ? EigenMethod::Dense : EigenMethod::Lanczos;
  return method == EigenMethod::Dense ? dense_pencil(B, mass, count)
                                      : lanczos_pencil(B, mass, count, tol);
}

Spectrum solve_eigen(const NonlocalForm& form, int count, double tol, EigenMethod method) {
  return solve_eigen_pencil(form.stiffness(), form.mass, count, tol, method);
}

Solution solve_poisson(const NonlocalForm& form, const Eigen::VectorXd& f, double tol) {
  if (f.size() != form.mass.size())
    throw std::invalid_argument("solve_poisson: load size does not match the dof count");
  Solution sol = cg_solve(form.stiffness(), form.mass.cwiseProduct(f), tol, "solve_poisson");
  sol.rhs_kind = "Mf";
  return sol;
}

Solution solve_general(const NonlocalForm& form, double lambda, const ConvolutionOperator* H,
                       const Eigen::VectorXd& f, const ExteriorLoad* g, double tol) {
  if (f.size() != form.mass.size())
    throw std::invalid_argument("solve_general: load size does not match the dof count");
  Eigen::MatrixXd B = form.stiffness();
  B -= (lambda * form.mass).asDiagonal().toDenseMatrix();
  if (H != nullptr) {
    if (H->P.rows() != B.rows())
      throw std::invalid_argument("solve_general: convolution operator size mismatch");
    B -= H->P;
  }
  Eigen::VectorXd rhs = form.mass.cwiseProduct(f);
  std::string kind = "Mf";
  if (g != nullptr) {
    if (g->ell.size() != rhs.size())
      throw std::invalid_argument("solve_general: exterior load size mismatch");
    rhs += g->ell;
    kind = "Mf+ell";
  }
  const double mu = smallest_pencil_eigenvalue(B, form.mass);
  const double floor = 1e-12 * std::max(1.0, B.diagonal().cwiseAbs().maxCoeff());
  if (mu <= floor)
    throw IndefiniteError("solve_general: shifted operator is not positive definite "
                          "(smallest pencil eigenvalue approximately " +
                              std::to_string(mu) + ")",
                          mu);
  Solution sol = cg_solve(B, rhs, tol, "solve_general");
  sol.rhs_kind = kind;
  return sol;
}

double smallest_pencil_eigenvalue(const Eigen::MatrixXd& B, const Eigen::VectorXd& mass,
                                  int iters) {
  const int n = static_cast<int>(mass.size());
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  if (n <= 512) {
    Eigen::MatrixXd C = s.asDiagonal() * B * s.asDiagonal();
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues()(0);
  }
  // plain Lanczos on the symmetrized matrix; the smallest Ritz value is an
  // upper estimate that settles quickly at this probe accuracy
  std::mt19937_64 eng(0x2545f4914f6cdd1dULL);
  auto u01 = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u01() - 0.5;
  v.normalize();
  const int m = std::min(n, iters);
  Eigen::MatrixXd V(n, m);
  V.col(0) = v;
  std::vector<double> alpha, beta;
  int m_used = m;
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd w = s.cwiseProduct(B * s.cwiseProduct(V.col(k)));
    alpha.push_back(w.dot(V.col(k)));
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) w -= w.dot(V.col(j)) * V.col(j);
    double b = w.norm();
    if (k + 1 == m || b < 1e-14) {
      m_used = k + 1;
      break;
    }
    beta.push_back(b);
    V.col(k + 1) = w / b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_used, m_used);
  for (int k = 0; k < m_used; ++k) {
    T(k, k) = alpha[k];
    if (k + 1 < m_used) T(k, k + 1) = T(k + 1, k) = beta[k];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues()(0);
}

}  // namespace nlop
