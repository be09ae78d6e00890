#include "nlop/config.hpp"

#include <fstream>
#include <set>

#include "nlop/expression.hpp"

namespace nlop {

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

std::vector<std::string> coord_names(int dim) {
  return dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

}  // namespace

ProblemConfig ProblemConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(j,
               {"domain", "kernel", "n", "equation", "tolerances", "checks", "seed", "output_dir",
                "eigen_count"},
               "config");
  ProblemConfig cfg;
  if (!j.contains("domain") || !j.contains("kernel"))
    throw ConfigError("config requires \"domain\" and \"kernel\" blocks");
  cfg.domain_desc = j.at("domain");
  cfg.kernel_desc = j.at("kernel");
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer() || j.at("n").get<int>() <= 0)
      throw ConfigError("\"n\" must be a positive integer");
    cfg.n = j.at("n").get<int>();
  }
  if (j.contains("equation")) {
    const auto& eq = j.at("equation");
    require_keys(eq, {"lambda", "convolution", "f", "g"}, "equation block");
    if (eq.contains("lambda")) cfg.equation.lambda = eq.at("lambda").get<double>();
    if (eq.contains("convolution") && !eq.at("convolution").is_null())
      cfg.equation.convolution = eq.at("convolution");
    if (eq.contains("f")) cfg.equation.f = eq.at("f").get<std::string>();
    if (eq.contains("g") && !eq.at("g").is_null()) cfg.equation.g = eq.at("g").get<std::string>();
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    require_keys(t, {"solver", "quadrature"}, "tolerances block");
    if (t.contains("solver")) cfg.solver_tol = t.at("solver").get<double>();
    if (t.contains("quadrature")) cfg.quad_tol = t.at("quadrature").get<double>();
    if (!(cfg.solver_tol > 0.0) || !(cfg.quad_tol > 0.0))
      throw ConfigError("tolerances must be positive");
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) throw ConfigError("\"checks\" must be an array of names");
    cfg.checks.emplace();
    for (const auto& c : j.at("checks")) cfg.checks->push_back(c.get<std::string>());
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("eigen_count")) {
    cfg.eigen_count = j.at("eigen_count").get<int>();
    if (cfg.eigen_count < 0) throw ConfigError("\"eigen_count\" must be nonnegative");
  }

  // validate every descriptor now rather than mid-compute
  Domain dom = [&] {
    try {
      return Domain::from_json(cfg.domain_desc);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad domain descriptor: ") + e.what());
    }
  }();
  Kernel ker = [&] {
    try {
      return Kernel::from_json(cfg.kernel_desc);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad kernel descriptor: ") + e.what());
    }
  }();
  if (ker.dim() != dom.dim())
    throw ConfigError("kernel dimension does not match the domain dimension");
  if (cfg.equation.convolution) {
    try {
      Kernel h = Kernel::from_json(*cfg.equation.convolution);
      if (h.dim() != dom.dim())
        throw std::invalid_argument("convolution kernel dimension mismatch");
      if (!std::isfinite(h.total_mass()))
        throw std::invalid_argument("convolution kernel must be integrable");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad convolution descriptor: ") + e.what());
    }
  }
  try {
    Expression::compile(cfg.equation.f, coord_names(dom.dim()));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad rhs expression: ") + e.what());
  }
  if (cfg.equation.g) {
    try {
      Expression::compile(*cfg.equation.g, coord_names(dom.dim()));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad exterior expression: ") + e.what());
    }
  }
  return cfg;
}

ProblemConfig ProblemConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace nlop
