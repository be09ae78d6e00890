// End-to-end acceptance runner: one line per criterion, nonzero exit if any
// criterion fails.  Usage: acceptance <path-to-cli>

#include <sys/wait.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "nlop/assembly.hpp"
#include "nlop/checks.hpp"
#include "nlop/config.hpp"
#include "nlop/kernel.hpp"
#include "nlop/mesh.hpp"
#include "nlop/rng.hpp"
#include "nlop/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nlop;

namespace {

std::string g_cli;

int shell(const std::string& args) {
  std::string cmd = g_cli + " " + args + " > /dev/null 2> /dev/null";
  int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnum(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double pair_energy(const NonlocalForm& f, const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) acc += f.W(i, j) * (u[i] - u[j]) * (u[i] - u[j]);
  return acc;
}

// --- criterion 1: discrete energy identities and the near/far reassembly ---
std::string crit_form_identities() {
  struct Case {
    Mesh mesh;
    Kernel kernel;
  };
  std::vector<Case> cases;
  cases.push_back({Mesh::uniform(Domain::interval(-1.0, 1.0), 64), Kernel::log_laplacian(1)});
  cases.push_back({Mesh::uniform(Domain::ball(2, {0.0, 0.0}, 1.0), 16), Kernel::log_laplacian(2)});
  for (const auto& c : cases) {
    NonlocalForm f = assemble_stiffness(c.mesh, c.kernel);
    Eigen::MatrixXd A = f.stiffness();
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym != 0.0) return "stiffness asymmetry " + fnum(asym);
    Eigen::MatrixXd L = f.interaction_laplacian();
    Rng rng(501 + c.mesh.dim());
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXd u(c.mesh.dof_count());
      for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1.0, 1.0);
      const double quad = u.dot(L * u);
      const double pair = pair_energy(f, u);
      if (std::abs(quad - pair) > 1e-12 * std::max(std::abs(pair), 1.0))
        return "energy identity off by " + fnum(std::abs(quad - pair)) + " at trial " +
               std::to_string(t);
    }
  }
  Mesh m1 = Mesh::uniform(Domain::interval(-1.0, 1.0), 64);
  Kernel k1 = Kernel::log_laplacian(1);
  DeltaSplit ds = delta_split(k1, 0.25);
  Eigen::MatrixXd full = assemble_stiffness(m1, k1).stiffness();
  Eigen::MatrixXd sum =
      assemble_stiffness(m1, ds.near).stiffness() + assemble_stiffness(m1, ds.far).stiffness();
  const double err = (sum - full).cwiseAbs().maxCoeff() / full.cwiseAbs().maxCoeff();
  if (err > 1e-6) return "near/far reassembly error " + fnum(err);
  return "";
}

// --- criterion 2: symbols of the two smooth families ---
std::string crit_symbols() {
  Kernel ls = Kernel::log_schrodinger(1);
  for (int i = 1; i <= 20; ++i) {
    const double xi = 0.25 * i;
    const double ref = std::log1p(xi * xi);
    const double sym = symbol(ls, xi);
    if (std::abs(sym - ref) > 1e-4 * std::abs(ref))
      return "log-type symbol off at xi=" + fnum(xi) + ": " + fnum(sym) + " vs " + fnum(ref);
  }
  Kernel fr = Kernel::fractional(1, 0.3);
  std::vector<double> ratios;
  for (int i = 1; i <= 20; ++i) {
    const double xi = 0.25 * i;
    ratios.push_back(symbol(fr, xi) / std::pow(xi, fr.sigma()));
  }
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i)
    if (std::abs(ratios[i] / mean - 1.0) > 1e-4)
      return "power symbol ratio drifts at xi=" + fnum(0.25 * (double(i) + 1.0)) + ": " +
             fnum(ratios[i]) + " vs mean " + fnum(mean);
  return "";
}

// --- criterion 3: principal spectrum on the reference interval ---
std::string crit_eigen_suite() {
  Kernel k = Kernel::log_laplacian(1);
  Mesh m256 = Mesh::uniform(Domain::interval(-1.0, 1.0), 256);
  NonlocalForm f256 = assemble_stiffness(m256, k);
  Spectrum sp = solve_eigen(f256, 4, 1e-10);
  if (!(sp.eigenvalues[0] > 0.0)) return "lambda_1 = " + fnum(sp.eigenvalues[0]);
  const double gap = sp.eigenvalues[1] - sp.eigenvalues[0];
  if (!(gap > 1e-6)) return "spectral gap " + fnum(gap);
  const double minu1 = sp.eigenvectors.col(0).minCoeff();
  if (!(minu1 > 0.0)) return "ground state dips to " + fnum(minu1);

  Eigen::MatrixXd A = f256.stiffness();
  Eigen::MatrixXd M = f256.mass.asDiagonal().toDenseMatrix();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(A, M);
  const double oracle = ges.eigenvalues()(0);
  if (std::abs(sp.eigenvalues[0] - oracle) > 1e-8 * std::abs(oracle))
    return "dense oracle " + fnum(oracle) + " vs " + fnum(sp.eigenvalues[0]);

  Mesh m512 = Mesh::uniform(Domain::interval(-1.0, 1.0), 512);
  Spectrum sp2 = solve_eigen(assemble_stiffness(m512, k), 1, 1e-10);
  const double drift = std::abs(sp2.eigenvalues[0] - sp.eigenvalues[0]) / sp2.eigenvalues[0];
  if (!(drift < 0.02)) return "refinement drift " + fnum(drift);
  return "";
}

// --- criterion 4: weak maximum principle with signed multipliers ---
std::string crit_weak_max_principle() {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 128);
  Kernel k = Kernel::log_laplacian(1);
  NonlocalForm f = assemble_stiffness(m, k);
  Eigen::VectorXd cneg = Eigen::VectorXd::Constant(m.dof_count(), -1.0);
  CheckResult res = check_weak_max_principle(m, k, f, 100, cneg, 4242);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  if (res.details["violations"].get<int>() != 0)
    return std::to_string(res.details["violations"].get<int>()) + " negative entries";
  Eigen::VectorXd cbig = Eigen::VectorXd::Constant(m.dof_count(), 1e6);
  CheckResult gate = check_weak_max_principle(m, k, f, 5, cbig, 4242);
  if (gate.status != CheckStatus::Skip)
    return "oversized multiplier was not skipped (status " + to_string(gate.status) + ")";
  return "";
}

// --- criterion 5: uniform bound constant under refinement ---
std::string crit_boundedness() {
  CheckResult res =
      check_boundedness_constant(Domain::interval(-1.0, 1.0), Kernel::log_laplacian(1), 128, 50,
                                 777);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  const double growth = res.details["growth_ratio"].get<double>();
  if (!(growth < 2.0)) return "constant grew by " + fnum(growth);
  return "";
}

// --- criterion 6: difference-quotient rates for an order-0.4 kernel ---
std::string crit_regularity() {
  CheckResult res =
      check_regularity(Domain::interval(-1.0, 1.0), Kernel::fractional(1, 0.2), 256, 0.25, 99);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  const double s1 = res.details["first_difference_slope"].get<double>();
  const double s2 = res.details["second_difference_slope"].get<double>();
  const double sc = res.details["control_slope"].get<double>();
  if (!(s1 >= 0.5)) return "first-difference exponent " + fnum(s1);
  if (!(s2 >= 1.0)) return "second-difference exponent " + fnum(s2);
  if (!(sc >= 1.95 && sc <= 2.05)) return "control exponent " + fnum(sc);
  return "";
}

// --- criterion 7: iterated small-kernel energy bound ---
std::string crit_iteration_lemma() {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 256);
  CheckResult res = check_iteration_lemma(m, 1000, 31337);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  if (res.details["violations"].get<int>() != 0)
    return std::to_string(res.details["violations"].get<int>()) + " bound violations";
  const double mass = res.details["q_mass"].get<double>();
  if (std::abs(mass - 0.4) > 1e-10) return "indicator mass " + fnum(mass);
  return "";
}

// --- criterion 8: constants span the interaction nullspace ---
std::string crit_nullspace() {
  Mesh m = Mesh::uniform(Domain::interval(-1.0, 1.0), 128);
  NonlocalForm f = assemble_stiffness(m, Kernel::log_laplacian(1));
  CheckResult res = check_constant_nullspace(f);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  const double lam0 = res.details["smallest_eigenvalue"].get<double>();
  const double cosine = res.details["constant_cosine"].get<double>();
  const double lam1 = res.details["second_smallest"].get<double>();
  if (!(std::abs(lam0) < 1e-10)) return "nullspace eigenvalue " + fnum(lam0);
  if (!(cosine > 1.0 - 1e-8)) return "constant cosine " + fnum(cosine);
  if (!(lam1 > 0.0)) return "second eigenvalue " + fnum(lam1);
  return "";
}

// --- criterion 9: eigenvalue growth on shrinking balls ---
std::string crit_poincare() {
  CheckResult res = check_poincare_limit(Kernel::log_laplacian(1), 256, 11);
  if (res.status != CheckStatus::Pass) return "status " + to_string(res.status) + ": " + res.reason;
  auto lams = res.details["lambda_1"].get<std::vector<double>>();
  for (std::size_t i = 1; i < lams.size(); ++i)
    if (!(lams[i] > lams[i - 1])) return "not monotone at radius index " + std::to_string(i);
  const double ref = res.details["reference_exterior_mass"].get<double>();
  if (std::abs(ref - 2.0 * std::log(4.0)) > 1e-12)
    return "reference mass " + fnum(ref) + " vs " + fnum(2.0 * std::log(4.0));
  if (!(lams.back() > ref)) return fnum(lams.back()) + " does not exceed " + fnum(ref);
  return "";
}

// --- criterion 10: byte-identical reruns and exact JSON round trips ---
std::string crit_determinism() {
  fs::path dir = "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  json cfg = {{"domain", {{"shape", "interval"}, {"bounds", {-1.0, 1.0}}}},
              {"kernel", {{"family", "log_laplacian"}, {"dim", 1}}},
              {"n", 64},
              {"seed", 7},
              {"checks", {"kernel_assumptions", "weak_max_principle", "iteration_lemma",
                          "constant_nullspace"}}};
  const std::string cpath = (dir / "config.json").string();
  std::ofstream(cpath) << cfg.dump(2);

  for (const char* sub : {"a", "b"}) {
    if (shell("eigen --config " + cpath + " --count 4 --out " + (dir / sub / "e").string()) != 0)
      return "eigen run failed";
    if (shell("verify --config " + cpath + " --out " + (dir / sub / "v").string()) != 0)
      return "verify run failed";
  }
  for (const char* file : {"e/spectrum.csv", "e/modes.csv", "e/summary.json", "v/report.json",
                           "v/max_principle.csv", "v/iteration.csv"}) {
    if (slurp((dir / "a" / file).string()) != slurp((dir / "b" / file).string()))
      return std::string(file) + " differs between identical runs";
  }

  const std::string text = slurp((dir / "a" / "e" / "summary.json").string());
  json j1 = json::parse(text);
  json j2 = json::parse(j1.dump());
  if (j1 != j2 || j1.dump() != j2.dump()) return "summary does not round-trip exactly";
  fs::remove_all(dir);
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 2;
  }
  g_cli = argv[1];

  struct Criterion {
    const char* label;
    std::function<std::string()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"form identities and near/far reassembly", crit_form_identities},
      {"fourier symbols of the smooth families", crit_symbols},
      {"principal spectrum on the reference interval", crit_eigen_suite},
      {"weak maximum principle with signed multipliers", crit_weak_max_principle},
      {"uniform bound constant under refinement", crit_boundedness},
      {"difference-quotient regularity rates", crit_regularity},
      {"iterated small-kernel energy bound", crit_iteration_lemma},
      {"constants span the interaction nullspace", crit_nullspace},
      {"eigenvalue growth on shrinking balls", crit_poincare},
      {"byte-identical reruns and JSON round trips", crit_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    try {
      detail = criteria[i].fn();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::printf("[PASS] %02zu %s\n", i + 1, criteria[i].label);
    } else {
      std::printf("[FAIL] %02zu %s: %s\n", i + 1, criteria[i].label, detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
