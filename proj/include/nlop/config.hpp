#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlop/kernel.hpp"
#include "nlop/mesh.hpp"

namespace nlop {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EquationBlock {
  double lambda = 0.0;
  std::optional<nlohmann::json> convolution;  // kernel descriptor for h, if any
  std::string f = "1";                        // rhs expression in x[, y]
  std::optional<std::string> g;               // exterior data expression, if any
};

// a fully validated problem description; the descriptors are checked against
// their modules at parse time so compute never starts on bad input
struct ProblemConfig {
  nlohmann::json domain_desc;
  nlohmann::json kernel_desc;
  int n = 64;
  EquationBlock equation;
  double solver_tol = 1e-10;
  double quad_tol = 1e-9;
  std::optional<std::vector<std::string>> checks;  // absent = default suite, [] = none
  std::uint64_t seed = 1234;
  std::string output_dir = ".";
  int eigen_count = 6;

  Domain domain() const { return Domain::from_json(domain_desc); }
  Kernel kernel() const { return Kernel::from_json(kernel_desc); }

  static ProblemConfig from_json(const nlohmann::json& j);
  static ProblemConfig from_file(const std::string& path);
};

}  // namespace nlop
