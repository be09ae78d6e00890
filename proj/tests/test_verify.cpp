#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nlop/checks.hpp"

using namespace nlop;

namespace {

Eigen::VectorXd center_field(const Mesh& m, const std::function<double(double)>& f) {
  Eigen::VectorXd u(m.dof_count());
  for (int d = 0; d < m.dof_count(); ++d) u[d] = f(m.cell_center(m.cell_of_dof(d))[0]);
  return u;
}

}  // namespace

TEST_CASE("difference quotients annihilate low-order fields") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 256);
  std::vector<int> dofs = m.dofs_with_margin(0.25);
  REQUIRE_FALSE(dofs.empty());

  Eigen::VectorXd c = Eigen::VectorXd::Constant(m.dof_count(), 3.7);
  CHECK(difference_quotient_norm(c, m, {0, 2.0 * m.cell_size(), 1}, dofs) == 0.0);
  CHECK(difference_quotient_norm(c, m, {0, 4.0 * m.cell_size(), 2}, dofs) == 0.0);

  // affine fields with dyadic slope on a dyadic mesh: second differences are 0
  // in exact floating point
  Eigen::VectorXd a = center_field(m, [](double x) { return 0.5 * x; });
  CHECK(difference_quotient_norm(a, m, {0, 8.0 * m.cell_size(), 2}, dofs) == 0.0);
  CHECK(difference_quotient_norm(a, m, {0, 2.0 * m.cell_size(), 1}, dofs) > 0.0);
}

TEST_CASE("difference quotient guards") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m.dof_count());
  std::vector<int> all(m.dof_count());
  for (int d = 0; d < m.dof_count(); ++d) all[d] = d;
  // the stencil leaves the grid from the rightmost cell
  CHECK_THROWS_AS(difference_quotient_norm(u, m, {0, 2.0 * m.cell_size(), 1}, all),
                  std::invalid_argument);
  std::vector<int> mid = m.dofs_with_margin(0.5);
  CHECK_THROWS_AS(difference_quotient_norm(u, m, {0, 0.3 * m.cell_size(), 1}, mid),
                  std::invalid_argument);
  CHECK_THROWS_AS(difference_quotient_norm(u, m, {0, 2.0 * m.cell_size(), 0}, mid),
                  std::invalid_argument);
}

TEST_CASE("kink field shows the three-halves rate") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 256);
  std::vector<int> dofs = m.dofs_with_margin(0.25);
  Eigen::VectorXd u = center_field(m, [](double x) { return std::abs(x); });
  SlopeFit fit = regularity_slope(u, m, dofs, {2, 4, 8, 16}, 2, 0);
  CHECK(fit.slope == doctest::Approx(1.5).epsilon(0.07));
}

TEST_CASE("smooth field shows the quadratic rate") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 256);
  std::vector<int> dofs = m.dofs_with_margin(0.25);
  Eigen::VectorXd u = center_field(m, [](double x) { return std::cos(0.5 * M_PI * x); });
  SlopeFit fit = regularity_slope(u, m, dofs, {2, 4, 8, 16}, 2, 0);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.025));

  // fewer than 3 usable steps
  CHECK_THROWS_AS(regularity_slope(u, m, dofs, {2, 4}, 2, 0), std::invalid_argument);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(m.dof_count());
  CHECK_THROWS_AS(regularity_slope(c, m, dofs, {2, 4, 8, 16}, 2, 0), std::invalid_argument);
}

TEST_CASE("kernel assumption checker statuses") {
  CheckResult log = check_kernel_assumptions(Kernel::log_laplacian(1), 1);
  CHECK(log.status == CheckStatus::ExpectedFail);  // jump at the support edge
  CHECK(log.ok());

  CheckResult fr = check_kernel_assumptions(Kernel::fractional(1, 0.2), 1);
  CHECK(fr.status == CheckStatus::Pass);

  // an uneven profile fails outright
  Kernel odd = Kernel::custom(
      1, [](std::span<const double> z) { return z[0] > 0.0 ? 1.0 : 0.5; }, 0.25, 1.0);
  CheckResult bad = check_kernel_assumptions(odd, 1);
  CHECK(bad.status == CheckStatus::Fail);
}

TEST_CASE("weak maximum principle checker") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 48);
  Kernel k = Kernel::log_laplacian(1);
  NonlocalForm f = assemble_stiffness(m, k);

  CheckResult res = check_weak_max_principle(m, k, f, 20, Eigen::VectorXd(), 7);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["violations"] == 0);
  CHECK(res.details["zero_data_gives_zero"] == true);

  // nonpositive multipliers keep the sign structure
  Eigen::VectorXd cneg = Eigen::VectorXd::Constant(m.dof_count(), -2.0);
  CheckResult neg = check_weak_max_principle(m, k, f, 10, cneg, 7);
  CHECK(neg.status == CheckStatus::Pass);

  // a positive part above the least killing density trips the gate
  Eigen::VectorXd cbig = Eigen::VectorXd::Constant(m.dof_count(), 1000.0);
  CheckResult gate = check_weak_max_principle(m, k, f, 10, cbig, 7);
  CHECK(gate.status == CheckStatus::Skip);
  CHECK_FALSE(gate.reason.empty());
}

TEST_CASE("weak maximum principle passes with a small positive multiplier") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 32);
  Kernel k = Kernel::fractional(1, 0.2);
  NonlocalForm f = assemble_stiffness(m, k);
  const double kmin = f.kappa.cwiseQuotient(f.mass).minCoeff();
  REQUIRE(kmin > 0.0);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(m.dof_count(), 0.5 * kmin);
  CheckResult res = check_weak_max_principle(m, k, f, 10, c, 11);
  CHECK(res.status == CheckStatus::Pass);
}

TEST_CASE("strong positivity checker") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  NonlocalForm f = assemble_stiffness(m, Kernel::log_laplacian(1));
  Spectrum sp = solve_eigen(f, 2);
  CheckResult res = check_strong_positivity(sp, m, 0.25);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["second_mode_changes_sign"] == true);

  // a doctored ground state with a negative interior entry fails
  Spectrum bad = sp;
  bad.eigenvectors(m.dof_count() / 2, 0) = -0.1;
  CHECK(check_strong_positivity(bad, m, 0.25).status == CheckStatus::Fail);
}

TEST_CASE("boundedness checker") {
  CheckResult res =
      check_boundedness_constant(Domain::interval(-1.0, 1.0), Kernel::log_laplacian(1), 32, 5, 3);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["growth_ratio"].get<double>() < 2.0);

  // integrable kernels miss the divergence hypothesis
  CheckResult skip = check_boundedness_constant(Domain::interval(-1.0, 1.0),
                                                Kernel::truncated_power(1, -1.0, 0.2), 32, 5, 3);
  CHECK(skip.status == CheckStatus::Skip);
}

TEST_CASE("regularity checker gates") {
  CheckResult skip =
      check_regularity(Domain::interval(-1.0, 1.0), Kernel::fractional(1, 0.3), 64, 0.25, 3);
  CHECK(skip.status == CheckStatus::Skip);  // order 0.6 is too large

  CheckResult skip2d =
      check_regularity(Domain::ball(2, {0.0, 0.0}, 1.0), Kernel::fractional(2, 0.2), 16, 0.25, 3);
  CHECK(skip2d.status == CheckStatus::Skip);
}

TEST_CASE("regularity checker measures the solve") {
  CheckResult res =
      check_regularity(Domain::interval(-1.0, 1.0), Kernel::fractional(1, 0.2), 256, 0.25, 3);
  CHECK(res.status == CheckStatus::Pass);
  const double a = res.details["alpha"].get<double>();
  CHECK(a == doctest::Approx(0.6));
  CHECK(res.details["first_difference_slope"].get<double>() >= a - 0.1);
  CHECK(res.details["second_difference_slope"].get<double>() >= 2.0 * a - 0.2);
  const double ctrl = res.details["control_slope"].get<double>();
  CHECK(ctrl >= 1.95);
  CHECK(ctrl <= 2.05);
}

TEST_CASE("iteration lemma checker") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  CheckResult res = check_iteration_lemma(m, 100, 5);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["violations"] == 0);
  CHECK(res.details["q_mass"].get<double>() == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(res.details["constant_field_exact_zero"] == true);

  // the doubled ball must fit: a tiny domain is rejected
  Mesh tiny = Mesh::uniform(Domain::interval(-0.3, 0.3), 16);
  CHECK_THROWS_AS(check_iteration_lemma(tiny, 5, 5), std::invalid_argument);
}

TEST_CASE("poincare checker") {
  CheckResult res = check_poincare_limit(Kernel::log_laplacian(1), 128, 5);
  CHECK(res.status == CheckStatus::Pass);
  auto lams = res.details["lambda_1"].get<std::vector<double>>();
  REQUIRE(lams.size() == 4);
  CHECK(lams[0] < lams[1]);
  CHECK(lams[1] < lams[2]);
  CHECK(lams[2] < lams[3]);
  // the analytic tail of the reference kernel outside 0.25
  CHECK(res.details["reference_exterior_mass"].get<double>() ==
        doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-10));
  CHECK(lams[3] > 2.0 * std::log(4.0));
}

TEST_CASE("constant nullspace checker") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 48);
  NonlocalForm f = assemble_stiffness(m, Kernel::log_laplacian(1));
  CheckResult res = check_constant_nullspace(f);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["smallest_eigenvalue"].get<double>() < 1e-10);
  CHECK(res.details["constant_cosine"].get<double>() > 1.0 - 1e-8);
  CHECK(res.details["second_smallest"].get<double>() > 0.0);

  // interactions below the cell spacing disconnect the weight graph
  auto tiny = [&](std::span<const double> x, std::span<const double> y) {
    return std::abs(x[0] - y[0]) < 0.01 ? 1.0 : 0.0;
  };
  NonlocalForm disc = assemble_twopoint(m, tiny, 0.01);
  CheckResult fail = check_constant_nullspace(disc);
  CHECK(fail.status == CheckStatus::Fail);
  CHECK(fail.reason.find("components") != std::string::npos);
}

TEST_CASE("hardy checker is exploratory") {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 32);
  NonlocalForm f = assemble_stiffness(m, Kernel::log_laplacian(1));
  CheckResult res = check_hardy_ratio(f, 50, 5);
  CHECK(res.exploratory);
  CHECK(res.status == CheckStatus::Pass);
  CHECK(res.details["observed_supremum"].get<double>() >= 0.0);
}

TEST_CASE("report aggregation") {
  VerificationReport rep;
  CheckResult pass;
  pass.name = "a";
  pass.status = CheckStatus::Pass;
  CheckResult skip;
  skip.name = "b";
  skip.status = CheckStatus::Skip;
  rep.checks = {pass, skip};
  CHECK(rep.overall());

  CheckResult fail;
  fail.name = "c";
  fail.status = CheckStatus::Fail;
  rep.checks.push_back(fail);
  CHECK_FALSE(rep.overall());

  // exploratory failures do not count
  rep.checks.back().exploratory = true;
  CHECK(rep.overall());

  nlohmann::json j = rep.to_json();
  CHECK(j["checks"].size() == 3);
  CHECK(j.contains("overall"));
}

TEST_CASE("suite runs, is deterministic, and writes artifacts") {
  SuiteSpec spec;
  spec.domain_desc = {{"shape", "interval"}, {"bounds", {-1.0, 1.0}}};
  spec.kernel_desc = {{"family", "log_laplacian"}, {"dim", 1}};
  spec.n = 48;
  spec.seed = 2024;
  spec.checks = std::vector<std::string>{"kernel_assumptions", "weak_max_principle",
                                         "iteration_lemma", "constant_nullspace", "hardy"};
  spec.trials_max_principle = 10;
  spec.trials_iteration = 50;
  spec.output_dir = "suite_artifacts_test";
  std::filesystem::remove_all(spec.output_dir);
  std::filesystem::create_directories(spec.output_dir);

  VerificationReport rep = run_suite(spec);
  CHECK(rep.checks.size() == 5);
  CHECK(rep.overall());
  for (const auto& c : rep.checks) CHECK(c.ok());
  CHECK(rep.checks[0].status == CheckStatus::ExpectedFail);
  CHECK(std::filesystem::exists(spec.output_dir + "/max_principle.csv"));
  CHECK(std::filesystem::exists(spec.output_dir + "/iteration.csv"));

  VerificationReport again = run_suite(spec);
  CHECK(rep.to_json().dump() == again.to_json().dump());
  std::filesystem::remove_all(spec.output_dir);
}

TEST_CASE("suite edge cases") {
  SuiteSpec spec;
  spec.domain_desc = {{"shape", "interval"}, {"bounds", {-1.0, 1.0}}};
  spec.kernel_desc = {{"family", "log_laplacian"}, {"dim", 1}};
  spec.checks = std::vector<std::string>{};
  VerificationReport empty = run_suite(spec);
  CHECK(empty.checks.empty());
  CHECK(empty.overall());

  spec.checks = std::vector<std::string>{"no_such_check"};
  CHECK_THROWS_AS(run_suite(spec), std::invalid_argument);
}
