#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace nlop {

// shortest exact decimal form of a double (round-trips bit-exactly)
std::string fmt_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_json(const std::string& path, const nlohmann::json& j);

// (row, col, value) text rows for the nonzero entries
void write_matrix_coo(const std::string& path, const Eigen::MatrixXd& m);
void write_matrix_dense(const std::string& path, const Eigen::MatrixXd& m);

std::string slurp(const std::string& path);

}  // namespace nlop
