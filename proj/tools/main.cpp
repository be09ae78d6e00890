// Command-line frontend: kernel inspection, eigenproblems, Poisson solves and
// the verification suite.  Exit codes: 0 success, 1 numerical failure,
// 2 usage or config error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlop/assembly.hpp"
#include "nlop/checks.hpp"
#include "nlop/config.hpp"
#include "nlop/expression.hpp"
#include "nlop/io.hpp"
#include "nlop/kernel.hpp"
#include "nlop/mesh.hpp"
#include "nlop/quadrature.hpp"
#include "nlop/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> coord_names(int dim) {
  return dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

std::string resolve_outdir(const std::string& flag, const std::string& from_config) {
  std::string dir = flag.empty() ? from_config : flag;
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

struct KernelInfoOpts {
  std::string name;
  int dim = 0;
  std::optional<double> s, power, radius, sigma, support;
  std::optional<std::string> expr;
  std::uint64_t seed = 1234;
};

int run_kernel_info(const KernelInfoOpts& o) {
  std::string family = o.name;
  std::replace(family.begin(), family.end(), '-', '_');
  json desc = {{"family", family}, {"dim", o.dim}};
  json params = json::object();
  if (o.s) params["s"] = *o.s;
  if (o.power) params["power"] = *o.power;
  if (o.radius) params["radius"] = *o.radius;
  if (o.sigma) params["sigma"] = *o.sigma;
  if (o.support) params["support_radius"] = *o.support;
  if (o.expr) params["expr"] = *o.expr;
  if (!params.empty()) desc["params"] = params;

  nlop::Kernel k = [&] {
    try {
      return nlop::Kernel::from_json(desc);
    } catch (const std::exception& e) {
      std::cerr << "kernel-info: " << e.what() << "\n";
      std::exit(2);
    }
  }();

  json constants = {{"sigma", k.sigma()},
                    {"normalization", k.normalization()},
                    {"zero_order_shift", k.zero_order_shift()}};
  constants["support_radius"] =
      std::isfinite(k.support_radius()) ? json(k.support_radius()) : json("infinite");

  json table = json::array();
  for (double xi : {0.5, 1.0, 2.0}) {
    json row = {{"xi", xi}, {"symbol", nlop::symbol(k, xi)}};
    switch (k.family()) {
      case nlop::KernelFamily::Fractional:
        row["reference"] = std::pow(xi, k.sigma());
        break;
      case nlop::KernelFamily::LogLaplacian:
        row["reference"] = 2.0 * std::log(xi);
        break;
      case nlop::KernelFamily::LogSchrodinger:
        row["reference"] = std::log1p(xi * xi);
        break;
      default:
        break;
    }
    table.push_back(row);
  }

  json out = {{"descriptor", k.describe()},
              {"constants", constants},
              {"assumptions", nlop::check_assumptions(k, o.seed).to_json()},
              {"symbol_table", table}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct RunOpts {
  std::string config;
  std::string out;
  int count = -1;
  std::string method = "auto";
};

nlop::EigenMethod parse_method(const std::string& m) {
  if (m == "dense") return nlop::EigenMethod::Dense;
  if (m == "lanczos") return nlop::EigenMethod::Lanczos;
  return nlop::EigenMethod::Auto;
}

int run_eigen(const RunOpts& o) {
  nlop::ProblemConfig cfg = nlop::ProblemConfig::from_file(o.config);
  const std::string outdir = resolve_outdir(o.out, cfg.output_dir);
  nlop::Domain dom = cfg.domain();
  nlop::Kernel ker = cfg.kernel();
  nlop::Mesh mesh = nlop::Mesh::uniform(dom, cfg.n);
  const int count = o.count >= 0 ? o.count : cfg.eigen_count;
  if (count < 0 || count > mesh.dof_count()) {
    std::cerr << "eigen: count must lie in [0, " << mesh.dof_count()
              << "] for this mesh, got " << count << "\n";
    return 2;
  }
  json summary = {{"n", cfg.n}, {"count", count}, {"dofs", mesh.dof_count()}};
  try {
    nlop::NonlocalForm form = nlop::assemble_stiffness(mesh, ker, cfg.quad_tol);
    nlop::Spectrum sp = nlop::solve_eigen(form, count, cfg.solver_tol, parse_method(o.method));

    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < sp.eigenvalues.size(); ++i)
      rows.push_back({std::to_string(i + 1), nlop::fmt_double(sp.eigenvalues[i]),
                      nlop::fmt_double(sp.residuals[i])});
    nlop::write_csv(outdir + "/spectrum.csv", {"index", "eigenvalue", "residual"}, rows);

    std::vector<std::string> mh{"cell_id", "x"};
    if (mesh.dim() == 2) mh.push_back("y");
    for (int m = 0; m < count; ++m) mh.push_back("u_" + std::to_string(m + 1));
    std::vector<std::vector<std::string>> mrows;
    for (int d = 0; d < mesh.dof_count(); ++d) {
      const int cell = mesh.cell_of_dof(d);
      const auto c = mesh.cell_center(cell);
      std::vector<std::string> row{std::to_string(cell), nlop::fmt_double(c[0])};
      if (mesh.dim() == 2) row.push_back(nlop::fmt_double(c[1]));
      for (int m = 0; m < count; ++m) row.push_back(nlop::fmt_double(sp.eigenvectors(d, m)));
      mrows.push_back(row);
    }
    nlop::write_csv(outdir + "/modes.csv", mh, mrows);

    summary["method"] = sp.method;
    summary["iterations"] = sp.iterations;
    summary["eigenvalues"] = std::vector<double>(sp.eigenvalues.begin(), sp.eigenvalues.end());
    if (count >= 1) {
      summary["lambda_1"] = sp.eigenvalues[0];
      summary["min_u1"] = sp.eigenvectors.col(0).minCoeff();
      summary["max_residual"] = sp.residuals.maxCoeff();
    }
    if (count >= 2) summary["gap"] = sp.eigenvalues[1] - sp.eigenvalues[0];
    nlop::write_json(outdir + "/summary.json", summary);
    std::cout << "wrote " << outdir << "/spectrum.csv, modes.csv, summary.json\n";
    return 0;
  } catch (const nlop::SolverError& e) {
    summary["error"] = {{"type", "solver"}, {"message", e.what()}};
    nlop::write_json(outdir + "/summary.json", summary);
    std::cerr << "eigen: " << e.what() << "\n";
    return 1;
  } catch (const nlop::quad::QuadratureError& e) {
    summary["error"] = {{"type", "quadrature"}, {"message", e.what()}};
    nlop::write_json(outdir + "/summary.json", summary);
    std::cerr << "eigen: " << e.what() << "\n";
    return 1;
  }
}

int run_poisson(const RunOpts& o) {
  nlop::ProblemConfig cfg = nlop::ProblemConfig::from_file(o.config);
  const std::string outdir = resolve_outdir(o.out, cfg.output_dir);
  nlop::Domain dom = cfg.domain();
  nlop::Kernel ker = cfg.kernel();
  nlop::Mesh mesh = nlop::Mesh::uniform(dom, cfg.n);
  const int dim = mesh.dim();

  nlop::Expression fexpr = nlop::Expression::compile(cfg.equation.f, coord_names(dim));
  Eigen::VectorXd f(mesh.dof_count());
  for (int d = 0; d < mesh.dof_count(); ++d) {
    const auto c = mesh.cell_center(mesh.cell_of_dof(d));
    f[d] = fexpr.eval(std::span<const double>(c.data(), dim));
  }

  json summary = {{"n", cfg.n}, {"dofs", mesh.dof_count()}, {"lambda", cfg.equation.lambda}};
  try {
    nlop::NonlocalForm form = nlop::assemble_stiffness(mesh, ker, cfg.quad_tol);

    std::optional<nlop::ConvolutionOperator> H;
    if (cfg.equation.convolution)
      H = nlop::assemble_convolution(mesh, nlop::Kernel::from_json(*cfg.equation.convolution),
                                     cfg.quad_tol);
    std::optional<nlop::ExteriorLoad> load;
    if (cfg.equation.g) {
      nlop::Expression gexpr = nlop::Expression::compile(*cfg.equation.g, coord_names(dim));
      load = nlop::exterior_load(
          mesh, ker, [&](std::span<const double> p) { return gexpr.eval(p); }, 0.0,
          cfg.quad_tol);
    }

    nlop::Solution sol =
        nlop::solve_general(form, cfg.equation.lambda, H ? &*H : nullptr, f,
                            load ? &*load : nullptr, cfg.solver_tol);

    std::vector<std::string> sh{"cell_id", "x"};
    if (dim == 2) sh.push_back("y");
    sh.push_back("u");
    std::vector<std::vector<std::string>> rows;
    for (int d = 0; d < mesh.dof_count(); ++d) {
      const int cell = mesh.cell_of_dof(d);
      const auto c = mesh.cell_center(cell);
      std::vector<std::string> row{std::to_string(cell), nlop::fmt_double(c[0])};
      if (dim == 2) row.push_back(nlop::fmt_double(c[1]));
      row.push_back(nlop::fmt_double(sol.u[d]));
      rows.push_back(row);
    }
    nlop::write_csv(outdir + "/solution.csv", sh, rows);

    const double uinf = sol.u.size() ? sol.u.cwiseAbs().maxCoeff() : 0.0;
    const double ul2 = std::sqrt(mesh.cell_volume() * sol.u.squaredNorm());
    const double finf = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    summary["residual"] = sol.residual;
    summary["iterations"] = sol.iterations;
    summary["rhs_kind"] = sol.rhs_kind;
    summary["u_inf"] = uinf;
    summary["u_l2"] = ul2;
    summary["f_inf"] = finf;
    summary["boundedness_ratio"] = uinf / (finf + ul2);
    if (load) {
      summary["exterior_truncation_radius"] = load->truncation_radius;
      summary["exterior_dropped_tail"] = load->dropped_tail;
    }
    nlop::write_json(outdir + "/summary.json", summary);
    std::cout << "wrote " << outdir << "/solution.csv, summary.json\n";
    return 0;
  } catch (const nlop::IndefiniteError& e) {
    summary["error"] = {{"type", "indefinite"},
                        {"message", e.what()},
                        {"smallest_pencil_eigenvalue", e.estimate()}};
    nlop::write_json(outdir + "/summary.json", summary);
    std::cerr << "poisson: " << e.what() << "\n";
    return 1;
  } catch (const nlop::SolverError& e) {
    summary["error"] = {{"type", "solver"}, {"message", e.what()}};
    nlop::write_json(outdir + "/summary.json", summary);
    std::cerr << "poisson: " << e.what() << "\n";
    return 1;
  } catch (const nlop::quad::QuadratureError& e) {
    summary["error"] = {{"type", "quadrature"}, {"message", e.what()}};
    nlop::write_json(outdir + "/summary.json", summary);
    std::cerr << "poisson: " << e.what() << "\n";
    return 1;
  }
}

int run_verify(const RunOpts& o) {
  nlop::ProblemConfig cfg = nlop::ProblemConfig::from_file(o.config);
  const std::string outdir = resolve_outdir(o.out, cfg.output_dir);
  nlop::SuiteSpec spec;
  spec.domain_desc = cfg.domain_desc;
  spec.kernel_desc = cfg.kernel_desc;
  spec.n = cfg.n;
  spec.seed = cfg.seed;
  spec.checks = cfg.checks;
  spec.output_dir = outdir;
  spec.solver_tol = cfg.solver_tol;
  spec.quad_tol = cfg.quad_tol;
  nlop::VerificationReport report = nlop::run_suite(spec);
  nlop::write_json(outdir + "/report.json", report.to_json());
  for (const auto& c : report.checks)
    std::printf("%-22s %-14s %s\n", c.name.c_str(), nlop::to_string(c.status).c_str(),
                c.reason.c_str());
  std::printf("overall: %s\n", report.overall() ? "pass" : "fail");
  return report.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal operators of small order: assembly, spectra, verification"};
  app.require_subcommand(1);

  KernelInfoOpts ki;
  CLI::App* cki = app.add_subcommand("kernel-info", "print kernel constants and assumption report");
  cki->add_option("--kernel", ki.name, "family: fractional, log-laplacian, log-schrodinger, "
                                       "truncated-power, custom")
      ->required();
  cki->add_option("--dim", ki.dim, "space dimension (1 or 2)")->required();
  cki->add_option("--s", ki.s, "fractional order s");
  cki->add_option("--power", ki.power, "truncated-power exponent");
  cki->add_option("--radius", ki.radius, "truncated-power support radius");
  cki->add_option("--sigma", ki.sigma, "declared order for custom kernels");
  cki->add_option("--support-radius", ki.support, "support radius for custom kernels");
  cki->add_option("--expr", ki.expr, "radial profile expression for custom kernels");
  cki->add_option("--seed", ki.seed, "seed for the assumption sampler");

  RunOpts eo;
  CLI::App* cei = app.add_subcommand("eigen", "solve the Dirichlet eigenproblem");
  cei->add_option("--config", eo.config, "problem config (JSON)")->required();
  cei->add_option("--count", eo.count, "number of eigenpairs (default: from config)");
  cei->add_option("--out", eo.out, "output directory (default: from config)");
  cei->add_option("--method", eo.method, "eigensolver")
      ->check(CLI::IsMember({"auto", "dense", "lanczos"}));

  RunOpts po;
  CLI::App* cpo = app.add_subcommand("poisson", "solve the Dirichlet source problem");
  cpo->add_option("--config", po.config, "problem config (JSON)")->required();
  cpo->add_option("--out", po.out, "output directory (default: from config)");

  RunOpts vo;
  CLI::App* cvo = app.add_subcommand("verify", "run the verification suite");
  cvo->add_option("--config", vo.config, "problem config (JSON)")->required();
  cvo->add_option("--out", vo.out, "output directory (default: from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cki->parsed()) return run_kernel_info(ki);
    if (cei->parsed()) return run_eigen(eo);
    if (cpo->parsed()) return run_poisson(po);
    if (cvo->parsed()) return run_verify(vo);
  } catch (const nlop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlop::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
