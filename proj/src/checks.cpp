#include "nlop/checks.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "nlop/io.hpp"
#include "nlop/rng.hpp"

namespace nlop {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skip: return "skip";
    case CheckStatus::ExpectedFail: return "expected_fail";
    case CheckStatus::Error: return "error";
  }
  return "error";
}

nlohmann::json CheckResult::to_json() const {
  return {{"name", name},           {"status", to_string(status)}, {"reason", reason},
          {"seed", seed},           {"exploratory", exploratory},  {"details", details}};
}

bool VerificationReport::overall() const {
  for (const auto& c : checks)
    if (!c.exploratory && !c.ok()) return false;
  return true;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back(c.to_json());
  return {{"overall", overall()}, {"checks", arr}};
}

namespace {

nlohmann::json make_artifact(const std::string& file, std::vector<std::string> header,
                             std::vector<std::vector<std::string>> rows) {
  return {{"file", file}, {"header", std::move(header)}, {"rows", std::move(rows)}};
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> binomial_signs(int l) {
  // (-1)^{l-k} C(l,k), k = 0..l
  std::vector<double> c(l + 1, 0.0);
  c[0] = 1.0;
  for (int row = 1; row <= l; ++row)
    for (int k = row; k > 0; --k) c[k] += c[k - 1];
  for (int k = 0; k <= l; ++k)
    if ((l - k) % 2) c[k] = -c[k];
  return c;
}

}  // namespace

double difference_quotient_norm(const Eigen::VectorXd& u, const Mesh& mesh,
                                const DifferenceQuotient& dq, const std::vector<int>& dofs) {
  if (dq.order < 1) throw std::invalid_argument("difference order must be at least 1");
  if (dq.axis < 0 || dq.axis >= mesh.dim())
    throw std::invalid_argument("difference axis outside the mesh dimension");
  const double h_axis = dq.axis == 0 ? mesh.hx() : mesh.hy();
  const long steps = std::lround(dq.step / h_axis);
  if (steps < 1 || std::abs(dq.step - steps * h_axis) > 1e-9 * h_axis)
    throw std::invalid_argument("difference step must be a positive multiple of the cell size");
  const auto coeff = binomial_signs(dq.order);
  double acc = 0.0;
  for (int d : dofs) {
    const int cell = mesh.cell_of_dof(d);
    double s = 0.0;
    for (int k = 0; k <= dq.order; ++k) {
      const int target = mesh.neighbor(cell, dq.axis, static_cast<int>(k * steps));
      if (target < 0) throw std::invalid_argument("difference stencil leaves the mesh");
      const int td = mesh.dof_of_cell(target);
      if (td < 0) throw std::invalid_argument("difference stencil leaves the interior");
      s += coeff[k] * u[td];
    }
    acc += s * s;
  }
  return std::sqrt(mesh.cell_volume() * acc);
}

SlopeFit regularity_slope(const Eigen::VectorXd& u, const Mesh& mesh, const std::vector<int>& dofs,
                          const std::vector<int>& steps, int order, int axis) {
  SlopeFit fit;
  const double h_axis = axis == 0 ? mesh.hx() : mesh.hy();
  for (int s : steps) {
    const double h = s * h_axis;
    const double norm = difference_quotient_norm(u, mesh, {axis, h, order}, dofs);
    if (norm > 0.0) {
      fit.h.push_back(h);
      fit.norm.push_back(norm);
    }
  }
  if (fit.h.size() < 3)
    throw std::invalid_argument("slope fit needs at least 3 step sizes with nonzero norms");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.h.size(); ++i) {
    lx.push_back(std::log(fit.h[i]));
    ly.push_back(std::log(fit.norm[i]));
  }
  fit.slope = lsq_slope(lx, ly);
  return fit;
}

CheckResult check_kernel_assumptions(const Kernel& k, std::uint64_t seed) {
  CheckResult res;
  res.name = "kernel_assumptions";
  res.seed = seed;
  AssumptionReport rep = check_assumptions(k, seed);
  res.details = rep.to_json();
  std::vector<std::string> failing;
  if (!rep.even.pass) failing.push_back("even");
  if (!rep.levy_integrable.pass) failing.push_back("levy_integrable");
  if (!rep.non_integrable.pass) failing.push_back("non_integrable");
  if (!rep.square_integrable_annuli.pass) failing.push_back("square_integrable_annuli");
  if (!rep.gradient_bound.pass) failing.push_back("gradient_bound");
  const bool smooth_ok = rep.smooth_away_from_origin.pass;
  if (failing.empty() && smooth_ok) {
    res.status = CheckStatus::Pass;
    return res;
  }
  if (failing.empty() && !k.discontinuity_radii().empty()) {
    res.status = CheckStatus::ExpectedFail;
    res.reason = "smoothness scan flags the kernel's jump radii";
    return res;
  }
  if (!smooth_ok) failing.push_back("smooth_away_from_origin");
  res.status = CheckStatus::Fail;
  std::ostringstream msg;
  msg << "failing assumption checks:";
  for (const auto& f : failing) msg << " " << f;
  res.reason = msg.str();
  return res;
}

CheckResult check_weak_max_principle(const Mesh& mesh, const Kernel& k, const NonlocalForm& form,
                                     int trials, const Eigen::VectorXd& c, std::uint64_t seed,
                                     double truncation_radius) {
  CheckResult res;
  res.name = "weak_max_principle";
  res.seed = seed;
  const int n = mesh.dof_count();
  double cpos = 0.0;
  if (c.size() > 0) {
    if (c.size() != n) throw std::invalid_argument("multiplier field size mismatch");
    cpos = std::max(0.0, c.maxCoeff());
  }
  const double kmin = form.kappa.cwiseQuotient(form.mass).minCoeff();
  if (cpos > 0.0 && !(cpos < kmin)) {
    res.status = CheckStatus::Skip;
    res.reason = "positive multiplier part exceeds the least killing density";
    res.details = {{"c_plus_max", cpos}, {"min_killing_density", kmin}};
    return res;
  }
  ExteriorPairing pairing = exterior_pairing(mesh, k, truncation_radius);
  const int ns = static_cast<int>(pairing.site_centers.size());
  Rng rng(seed);
  int violations = 0;
  double worst_ratio = 0.0;
  bool degenerate_ok = true;
  std::vector<std::vector<std::string>> rows;
  for (int t = 0; t < trials; ++t) {
    NonlocalForm trial_form = form;
    if (c.size() > 0) {
      Eigen::VectorXd ct(n);
      for (int i = 0; i < n; ++i) ct[i] = c[i] * rng.uniform();
      trial_form.kappa -= ct.cwiseProduct(form.mass);
    }
    Eigen::VectorXd f(n);
    if (t == 0)
      f.setOnes();
    else if (t == 1)
      f.setZero();
    else
      for (int i = 0; i < n; ++i) f[i] = rng.uniform();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(ns);
    if (t >= 2)
      for (int s = 0; s < ns; ++s) g[s] = rng.uniform();
    ExteriorLoad load;
    load.ell = pairing.E * g;
    load.truncation_radius = pairing.truncation_radius;
    load.dropped_tail = pairing.dropped_tail;
    Solution sol = solve_general(trial_form, 0.0, nullptr, f, &load, 1e-12);
    const double umin = sol.u.minCoeff();
    const double unorm = sol.u.cwiseAbs().maxCoeff();
    const double eps = 1e-12 * unorm;
    int bad = 0;
    for (int i = 0; i < n; ++i)
      if (sol.u[i] < -eps) ++bad;
    violations += bad;
    if (unorm > 0.0) worst_ratio = std::min(worst_ratio, umin / unorm);
    if (t == 1 && unorm != 0.0) degenerate_ok = false;
    rows.push_back({std::to_string(t), fmt_double(umin), fmt_double(unorm),
                    std::to_string(bad)});
  }
  res.details = {{"trials", trials},
                 {"violations", violations},
                 {"worst_min_to_norm_ratio", worst_ratio},
                 {"negative_entry_tolerance", "1e-12 * max norm"},
                 {"zero_data_gives_zero", degenerate_ok},
                 {"truncation_radius", pairing.truncation_radius},
                 {"dropped_tail_bound", pairing.dropped_tail},
                 {"min_killing_density", kmin}};
  res.details["artifact"] =
      make_artifact("max_principle.csv", {"trial", "min_u", "max_abs_u", "violations"}, rows);
  if (violations == 0 && degenerate_ok) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = violations ? "negative solution entries under nonnegative data"
                            : "zero data did not produce the zero solution";
  }
  return res;
}

CheckResult check_strong_positivity(const Spectrum& sp, const Mesh& mesh, double margin) {
  CheckResult res;
  res.name = "strong_positivity";
  if (sp.eigenvectors.cols() < 1) throw std::invalid_argument("spectrum holds no eigenvectors");
  const Eigen::VectorXd u1 = sp.eigenvectors.col(0);
  const double min_interior = u1.minCoeff();
  Subdomain sub = select_subdomain(mesh, margin);
  double min_margin = std::numeric_limits<double>::infinity();
  for (int d : sub.dofs) min_margin = std::min(min_margin, u1[d]);

  bool sign_change_tested = sp.eigenvectors.cols() >= 2;
  bool sign_change = true;
  if (sign_change_tested) {
    const Eigen::VectorXd u2 = sp.eigenvectors.col(1);
    sign_change = u2.minCoeff() < 0.0 && u2.maxCoeff() > 0.0;
  }

  // point reflection through the bounding-box center maps the dof set onto
  // itself for the symmetric shapes; the ground state must be invariant
  bool mirror_tested = true;
  double mirror_diff = 0.0;
  for (int d = 0; d < mesh.dof_count() && mirror_tested; ++d) {
    auto [ix, iy] = mesh.cell_coords(mesh.cell_of_dof(d));
    const int mcell = mesh.cell_index(mesh.nx() - 1 - ix,
                                      mesh.dim() == 2 ? mesh.ny() - 1 - iy : 0);
    const int md = mesh.dof_of_cell(mcell);
    if (md < 0)
      mirror_tested = false;
    else
      mirror_diff = std::max(mirror_diff, std::abs(u1[d] - u1[md]));
  }
  const double unorm = u1.cwiseAbs().maxCoeff();
  const bool mirror_ok = !mirror_tested || mirror_diff <= 1e-8 * unorm;

  res.details = {{"min_over_margin_subdomain", min_margin},
                 {"min_over_interior", min_interior},
                 {"margin", margin},
                 {"subdomain_dofs", sub.dofs.size()},
                 {"second_mode_changes_sign", sign_change},
                 {"mirror_symmetry_tested", mirror_tested},
                 {"mirror_max_difference", mirror_diff}};
  if (min_margin > 0.0 && min_interior > 0.0 && sign_change && mirror_ok) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    if (!(min_margin > 0.0) || !(min_interior > 0.0))
      res.reason = "ground state is not strictly positive";
    else if (!sign_change)
      res.reason = "second mode does not change sign";
    else
      res.reason = "ground state breaks the mirror symmetry";
  }
  return res;
}

CheckResult check_boundedness_constant(const Domain& dom, const Kernel& k, int n, int trials,
                                       std::uint64_t seed) {
  CheckResult res;
  res.name = "boundedness";
  res.seed = seed;
  AssumptionReport rep = check_assumptions(k, seed);
  if (!rep.non_integrable.pass || !rep.square_integrable_annuli.pass) {
    res.status = CheckStatus::Skip;
    res.reason = "kernel lacks the non-integrability or annular square-integrability assumption";
    res.details = {{"non_integrable", rep.non_integrable.pass},
                   {"square_integrable_annuli", rep.square_integrable_annuli.pass}};
    return res;
  }
  const int kmodes = 4;
  std::vector<double> cests;
  std::vector<std::array<double, 4>> ratios;
  std::vector<std::vector<std::string>> rows;
  for (int level = 0; level < 2; ++level) {
    const int nn = n << level;
    Mesh mesh = Mesh::uniform(dom, nn);
    NonlocalForm form = assemble_stiffness(mesh, k);
    const double vol = mesh.cell_volume();
    Rng rng(seed);
    double cest = 0.0;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd f(mesh.dof_count());
      if (t == 0)
        f.setOnes();
      else
        for (int i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
      Solution sol = solve_poisson(form, f, 1e-12);
      const double uinf = sol.u.cwiseAbs().maxCoeff();
      const double ul2 = std::sqrt(vol * sol.u.squaredNorm());
      const double finf = f.cwiseAbs().maxCoeff();
      cest = std::max(cest, uinf / (finf + ul2));
    }
    cests.push_back(cest);
    Spectrum sp = solve_eigen(form, std::min(kmodes, mesh.dof_count()), 1e-10);
    std::array<double, 4> r{0, 0, 0, 0};
    for (int m = 0; m < sp.eigenvalues.size() && m < kmodes; ++m) {
      const Eigen::VectorXd& um = sp.eigenvectors.col(m);
      r[m] = um.cwiseAbs().maxCoeff() / std::sqrt(vol * um.squaredNorm());
    }
    ratios.push_back(r);
    rows.push_back({std::to_string(nn), fmt_double(cest), fmt_double(r[0]), fmt_double(r[1]),
                    fmt_double(r[2]), fmt_double(r[3])});
  }
  const double growth = cests[1] / cests[0];
  bool finite = std::isfinite(cests[0]) && std::isfinite(cests[1]);
  bool ratios_stable = true;
  for (int m = 0; m < kmodes; ++m) {
    if (!std::isfinite(ratios[0][m]) || !std::isfinite(ratios[1][m])) finite = false;
    const double g = ratios[1][m] / ratios[0][m];
    if (!(g < 2.0 && 1.0 / g < 2.0)) ratios_stable = false;
  }
  res.details = {{"n_levels", {n, 2 * n}},
                 {"c_est", cests},
                 {"growth_ratio", growth},
                 {"eigen_ratios_coarse", ratios[0]},
                 {"eigen_ratios_fine", ratios[1]},
                 {"trials", trials}};
  res.details["artifact"] =
      make_artifact("boundedness.csv", {"n", "c_est", "r1", "r2", "r3", "r4"}, rows);
  if (finite && growth < 2.0 && ratios_stable) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = !finite ? "non-finite bound constant"
                         : growth >= 2.0 ? "bound constant doubled under refinement"
                                         : "eigenfunction sup/L2 ratios unstable";
  }
  return res;
}

CheckResult check_regularity(const Domain& dom, const Kernel& k, int n, double margin,
                             std::uint64_t seed) {
  CheckResult res;
  res.name = "regularity";
  res.seed = seed;
  const double sigma = k.sigma();
  if (!(sigma < 0.5)) {
    res.status = CheckStatus::Skip;
    res.reason = "difference-quotient rates need a kernel of order below one half";
    res.details = {{"sigma", sigma}};
    return res;
  }
  if (dom.dim() != 1) {
    res.status = CheckStatus::Skip;
    res.reason = "two-dimensional runs exceed the dense-solver budget; use a one-dimensional "
                 "configuration";
    return res;
  }
  const double alpha = 1.0 - sigma;
  const int n_eff = std::max(n, 256);
  Mesh mesh = Mesh::uniform(dom, n_eff);
  NonlocalForm form = assemble_stiffness(mesh, k);
  Eigen::VectorXd f = Eigen::VectorXd::Ones(mesh.dof_count());
  Solution sol = solve_poisson(form, f, 1e-12);
  std::vector<int> dofs = mesh.dofs_with_margin(margin);
  if (dofs.empty()) throw EmptySubdomain("regularity margin leaves no interior cells");
  const std::vector<int> steps{2, 4, 8, 16};
  SlopeFit fit1 = regularity_slope(sol.u, mesh, dofs, steps, 1, 0);
  SlopeFit fit2 = regularity_slope(sol.u, mesh, dofs, steps, 2, 0);

  // synthetic control: a product-cosine field vanishing at the boundary
  Eigen::VectorXd control(mesh.dof_count());
  const double cx = 0.5 * (dom.lo()[0] + dom.hi()[0]);
  const double hw = 0.5 * (dom.hi()[0] - dom.lo()[0]);
  for (int d = 0; d < mesh.dof_count(); ++d) {
    const auto ctr = mesh.cell_center(mesh.cell_of_dof(d));
    control[d] = std::cos(0.5 * M_PI * (ctr[0] - cx) / hw);
  }
  SlopeFit fitc = regularity_slope(control, mesh, dofs, steps, 2, 0);

  const double thr1 = alpha - 0.1, thr2 = 2.0 * alpha - 0.2;
  const bool ok1 = fit1.slope >= thr1, ok2 = fit2.slope >= thr2;
  const bool okc = fitc.slope >= 1.95 && fitc.slope <= 2.05;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < fit1.h.size(); ++i)
    rows.push_back({fmt_double(fit1.h[i]), "x", "1", fmt_double(fit1.norm[i])});
  for (std::size_t i = 0; i < fit2.h.size(); ++i)
    rows.push_back({fmt_double(fit2.h[i]), "x", "2", fmt_double(fit2.norm[i])});
  res.details = {{"sigma", sigma},
                 {"alpha", alpha},
                 {"n", n_eff},
                 {"margin", margin},
                 {"first_difference_slope", fit1.slope},
                 {"second_difference_slope", fit2.slope},
                 {"thresholds", {thr1, thr2}},
                 {"control_slope", fitc.slope},
                 {"control_window", {1.95, 2.05}}};
  res.details["artifact"] = make_artifact("regularity.csv", {"h", "direction", "l", "norm"}, rows);
  if (ok1 && ok2 && okc) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = !okc ? "smooth control field missed the quadratic rate"
                      : "fitted difference-quotient exponent below the guaranteed rate";
  }
  return res;
}

CheckResult check_iteration_lemma(const Mesh& mesh, int trials, std::uint64_t seed) {
  CheckResult res;
  res.name = "iteration_lemma";
  res.seed = seed;
  const int dim = mesh.dim();
  const double R = 0.2;
  const std::array<double, 2> x0{0.5 * (mesh.domain().lo()[0] + mesh.domain().hi()[0]),
                                 dim == 2
                                     ? 0.5 * (mesh.domain().lo()[1] + mesh.domain().hi()[1])
                                     : 0.0};
  if (mesh.domain().boundary_distance(std::span<const double>(x0.data(), dim)) < 2.0 * R - 1e-12)
    throw std::invalid_argument("the doubled ball around the center must fit inside the domain");

  Kernel q = Kernel::truncated_power(dim, -dim, R);
  const double q1 = q.total_mass();
  const double q1_closed = dim == 1 ? 2.0 * R : M_PI * R * R;
  const double R2 = 2.0 * R;
  Kernel qq =
      dim == 1
          ? Kernel::custom_radial(1, [R2](double r) { return R2 - r; }, 0.25, R2)
          : Kernel::custom_radial(
                2,
                [R, R2](double r) {
                  return 2.0 * R * R * std::acos(r / R2) -
                         0.5 * r * std::sqrt(std::max(R2 * R2 - r * r, 0.0));
                },
                0.25, R2);

  WeightTable wq(mesh, q), wqq(mesh, qq);
  const int n = mesh.dof_count();
  const double hN = mesh.cell_volume();
  Eigen::MatrixXd Wq(n, n), Wqq(n, n);
  for (int i = 0; i < n; ++i) {
    auto [ix, iy] = mesh.cell_coords(mesh.cell_of_dof(i));
    for (int j = i; j < n; ++j) {
      auto [jx, jy] = mesh.cell_coords(mesh.cell_of_dof(j));
      Wq(i, j) = Wq(j, i) = wq.at(jx - ix, jy - iy);
      Wqq(i, j) = Wqq(j, i) = wqq.at(jx - ix, jy - iy);
    }
  }
  Eigen::VectorXd kq = Eigen::VectorXd::Constant(n, hN * q1) - Wq.rowwise().sum();
  Eigen::VectorXd kqq = Eigen::VectorXd::Constant(n, hN * q1 * q1) - Wqq.rowwise().sum();

  std::vector<int> ball = mesh.dofs_in_ball(x0, R);
  std::vector<char> in_ball(n, 0);
  for (int d : ball) in_ball[d] = 1;
  if (ball.empty()) throw std::invalid_argument("no cells inside the lemma ball");

  Rng rng(seed);
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::string>> rows;
  bool constant_exact = true;
  for (int t = -1; t < trials; ++t) {
    Eigen::VectorXd u(n);
    if (t < 0)
      u.setOnes();
    else
      for (int i = 0; i < n; ++i) u[i] = rng.uniform(-1.0, 1.0);
    double rhs_diff = 0.0, lhs_diff = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d2 = (u[i] - u[j]) * (u[i] - u[j]);
        rhs_diff += Wq(i, j) * d2;
        if (in_ball[i] || in_ball[j]) lhs_diff += Wqq(i, j) * d2;
      }
    if (t < 0) {
      constant_exact = rhs_diff == 0.0 && lhs_diff == 0.0;
      continue;
    }
    double rhs = rhs_diff, lhs = lhs_diff;
    for (int i = 0; i < n; ++i) rhs += kq[i] * u[i] * u[i];
    for (int d : ball) lhs += kqq[d] * u[d] * u[d];
    const double bound = 4.0 * q1 * rhs + 1e-10 * rhs;
    if (lhs > bound) ++violations;
    worst_margin = std::min(worst_margin, bound - lhs);
    if (t < 50)
      rows.push_back({std::to_string(t), fmt_double(lhs), fmt_double(rhs), fmt_double(bound)});
  }
  const bool mass_ok = std::abs(q1 - q1_closed) <= 1e-10 * q1_closed;
  res.details = {{"trials", trials},
                 {"violations", violations},
                 {"q_mass", q1},
                 {"q_mass_closed_form", q1_closed},
                 {"ball_dofs", ball.size()},
                 {"worst_slack", worst_margin},
                 {"constant_field_exact_zero", constant_exact}};
  res.details["artifact"] =
      make_artifact("iteration.csv", {"trial", "lhs", "rhs", "bound"}, rows);
  if (violations == 0 && constant_exact && mass_ok) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = violations ? "iterated-form bound violated"
                            : !mass_ok ? "kernel mass misses its closed form"
                                       : "constant field gave a nonzero difference part";
  }
  return res;
}

CheckResult check_poincare_limit(const Kernel& k, int n, std::uint64_t seed) {
  CheckResult res;
  res.name = "poincare";
  res.seed = seed;
  const int dim = k.dim();
  Domain dom = dim == 1 ? Domain::interval(-1.0, 1.0) : Domain::ball(2, {0.0, 0.0}, 1.0);
  Mesh mesh = Mesh::uniform(dom, n);
  NonlocalForm form = assemble_stiffness(mesh, k);
  Eigen::MatrixXd A = form.stiffness();
  const double vol = mesh.cell_volume();
  const std::vector<double> radii{1.0, 0.5, 0.25, 0.125};
  const double delta = 0.25;
  const double reference = k.tail_mass(delta);
  std::vector<double> lambdas;
  std::vector<std::vector<std::string>> rows;
  for (double rho : radii) {
    std::vector<int> sub = mesh.dofs_in_ball({0.0, 0.0}, rho);
    if (sub.empty()) throw EmptySubdomain("no whole cells inside the ball");
    const int m = static_cast<int>(sub.size());
    Eigen::MatrixXd As(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) As(a, b) = A(sub[a], sub[b]);
    const double lam =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(As / vol).eigenvalues()(0);
    lambdas.push_back(lam);
    rows.push_back({fmt_double(rho), std::to_string(m), fmt_double(lam)});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) monotone = false;
  const bool exceeds = lambdas.back() > reference;
  res.details = {{"radii", radii},
                 {"lambda_1", lambdas},
                 {"delta", delta},
                 {"reference_exterior_mass", reference},
                 {"reference_origin", "analytic mass of the kernel outside radius delta"},
                 {"n", n}};
  res.details["artifact"] = make_artifact("poincare.csv", {"rho", "dofs", "lambda1"}, rows);
  if (monotone && exceeds) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = monotone ? "smallest-ball eigenvalue stays below the exterior-mass reference"
                          : "first eigenvalue failed to grow on shrinking balls";
  }
  return res;
}

CheckResult check_constant_nullspace(const NonlocalForm& form) {
  CheckResult res;
  res.name = "constant_nullspace";
  const int n = static_cast<int>(form.mass.size());
  if (n == 0) throw std::invalid_argument("empty form");

  // connectivity of the positive-weight graph
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = ncomp;
    std::queue<int> bfs;
    bfs.push(s);
    while (!bfs.empty()) {
      int i = bfs.front();
      bfs.pop();
      for (int j = 0; j < n; ++j)
        if (comp[j] < 0 && form.W(i, j) > 0.0) {
          comp[j] = ncomp;
          bfs.push(j);
        }
    }
    ++ncomp;
  }
  if (ncomp > 1) {
    std::vector<int> sizes(ncomp, 0);
    for (int i = 0; i < n; ++i) ++sizes[comp[i]];
    std::ostringstream msg;
    msg << "weight graph splits into " << ncomp << " components (sizes:";
    for (int s = 0; s < ncomp && s < 8; ++s) msg << " " << sizes[s];
    if (ncomp > 8) msg << " ...";
    msg << ")";
    res.status = CheckStatus::Fail;
    res.reason = msg.str();
    res.details = {{"components", ncomp}};
    return res;
  }

  Eigen::MatrixXd L = form.interaction_laplacian();
  const double row_sum_residual =
      (L * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
  const Eigen::VectorXd s = form.mass.cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.asDiagonal() * L * s.asDiagonal());
  const double lam0 = es.eigenvalues()(0);
  const double lam1 = n > 1 ? es.eigenvalues()(1) : std::numeric_limits<double>::infinity();
  Eigen::VectorXd v0 = s.asDiagonal() * es.eigenvectors().col(0);
  const double cosine = std::abs(v0.sum()) / (v0.norm() * std::sqrt(double(n)));

  res.details = {{"smallest_eigenvalue", lam0},
                 {"second_smallest", lam1},
                 {"constant_cosine", cosine},
                 {"row_sum_residual", row_sum_residual},
                 {"components", 1}};
  if (std::abs(lam0) < 1e-10 && cosine > 1.0 - 1e-8 && lam1 > 0.0) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.reason = "interaction part does not have exactly the constants as nullspace";
  }
  return res;
}

CheckResult check_hardy_ratio(const NonlocalForm& form, int trials, std::uint64_t seed) {
  CheckResult res;
  res.name = "hardy";
  res.seed = seed;
  res.exploratory = true;
  const int n = static_cast<int>(form.mass.size());
  Eigen::MatrixXd A = form.stiffness();
  Rng rng(seed);
  double sup = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd phi(n);
    for (int i = 0; i < n; ++i) phi[i] = rng.uniform(-1.0, 1.0);
    const double kill = phi.cwiseProduct(form.kappa).dot(phi);
    const double l2 = phi.cwiseProduct(form.mass).dot(phi);
    const double energy = phi.dot(A * phi);
    sup = std::max(sup, kill / (l2 + energy));
  }
  res.details = {{"trials", trials},
                 {"observed_supremum", sup},
                 {"note", "informational scan; no acceptance threshold is known"}};
  res.status = CheckStatus::Pass;
  res.reason = "exploratory";
  return res;
}

namespace {

const std::vector<std::string>& default_checks() {
  static const std::vector<std::string> names{
      "kernel_assumptions", "weak_max_principle", "strong_positivity",
      "boundedness",        "regularity",         "iteration_lemma",
      "poincare",           "constant_nullspace", "hardy"};
  return names;
}

}  // namespace

VerificationReport run_suite(const SuiteSpec& spec) {
  Domain dom = Domain::from_json(spec.domain_desc);
  Kernel ker = Kernel::from_json(spec.kernel_desc);
  const int dim = dom.dim();

  std::vector<std::string> enabled = spec.checks ? *spec.checks : default_checks();
  for (const auto& name : enabled)
    if (std::find(default_checks().begin(), default_checks().end(), name) ==
        default_checks().end())
      throw std::invalid_argument("unknown check name: " + name);

  // shared mesh/form, built on first demand; an assembly failure is reported
  // by every checker that needs it
  const int n_mesh = dim == 1 ? spec.n : std::min(spec.n, 32);
  struct Shared {
    bool tried = false;
    std::optional<Mesh> mesh;
    std::optional<NonlocalForm> form;
    std::string error;
  } shared;
  auto get_form = [&]() -> NonlocalForm& {
    if (!shared.tried) {
      shared.tried = true;
      try {
        shared.mesh.emplace(Mesh::uniform(dom, n_mesh));
        shared.form.emplace(assemble_stiffness(*shared.mesh, ker, spec.quad_tol));
      } catch (const std::exception& e) {
        shared.error = e.what();
      }
    }
    if (!shared.form) throw std::runtime_error("shared assembly failed: " + shared.error);
    return *shared.form;
  };

  VerificationReport report;
  auto run = [&](const std::string& name, auto&& fn) {
    if (std::find(enabled.begin(), enabled.end(), name) == enabled.end()) return;
    const std::uint64_t seed = spec.seed ^ fnv1a(name);
    CheckResult result;
    try {
      result = fn(seed);
    } catch (const std::exception& e) {
      result = CheckResult{};
      result.name = name;
      result.status = CheckStatus::Error;
      result.reason = e.what();
    }
    result.name = name;
    result.seed = seed;
    if (!spec.output_dir.empty() && result.details.contains("artifact")) {
      const auto& art = result.details["artifact"];
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : art["rows"]) rows.push_back(r.get<std::vector<std::string>>());
      write_csv(spec.output_dir + "/" + art["file"].get<std::string>(),
                art["header"].get<std::vector<std::string>>(), rows);
    }
    report.checks.push_back(std::move(result));
  };

  run("kernel_assumptions", [&](std::uint64_t s) { return check_kernel_assumptions(ker, s); });
  run("weak_max_principle", [&](std::uint64_t s) {
    NonlocalForm& form = get_form();
    const double supp = ker.support_radius();
    double radius = 0.0;
    if (!std::isfinite(supp)) {
      const double dx = dom.hi()[0] - dom.lo()[0];
      const double dy = dim == 2 ? dom.hi()[1] - dom.lo()[1] : 0.0;
      const double diam = std::hypot(dx, dy);
      radius = dim == 1 ? 2.0 * diam : 0.5 * diam;
    }
    return check_weak_max_principle(*shared.mesh, ker, form, spec.trials_max_principle,
                                    Eigen::VectorXd(), s, radius);
  });
  run("strong_positivity", [&](std::uint64_t s) {
    (void)s;
    NonlocalForm& form = get_form();
    Spectrum sp =
        solve_eigen(form, std::min(4, static_cast<int>(form.mass.size())), spec.solver_tol);
    const double ex = dom.hi()[0] - dom.lo()[0];
    const double ey = dim == 2 ? dom.hi()[1] - dom.lo()[1] : ex;
    return check_strong_positivity(sp, *shared.mesh, 0.125 * std::min(ex, ey));
  });
  run("boundedness", [&](std::uint64_t s) {
    const int base = dim == 1 ? spec.n : std::min(spec.n, 24);
    return check_boundedness_constant(dom, ker, base, spec.trials_boundedness, s);
  });
  run("regularity", [&](std::uint64_t s) { return check_regularity(dom, ker, spec.n, 0.25, s); });
  run("iteration_lemma", [&](std::uint64_t s) {
    get_form();
    return check_iteration_lemma(*shared.mesh, spec.trials_iteration, s);
  });
  run("poincare", [&](std::uint64_t s) {
    const int n = dim == 1 ? std::max(spec.n, 256) : std::min(spec.n, 48);
    return check_poincare_limit(ker, n, s);
  });
  run("constant_nullspace", [&](std::uint64_t s) {
    (void)s;
    return check_constant_nullspace(get_form());
  });
  run("hardy", [&](std::uint64_t s) { return check_hardy_ratio(get_form(), 200, s); });
  return report;
}

}  // namespace nlop
