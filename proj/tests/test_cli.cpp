#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  const char* p = std::getenv("NLOP_CLI");
  REQUIRE_MESSAGE(p != nullptr, "NLOP_CLI must point at the binary");
  return p;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = cli_path() + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file;
  cmd += " 2> /dev/null";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), path);
  json j;
  in >> j;
  return j;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::path("cli_scratch") / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string config(const json& j) const {
    std::string p = (dir / "config.json").string();
    std::ofstream(p) << j.dump(2);
    return p;
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

json base_config(int n) {
  return {{"domain", {{"shape", "interval"}, {"bounds", {-1.0, 1.0}}}},
          {"kernel", {{"family", "log_laplacian"}, {"dim", 1}}},
          {"n", n}};
}

}  // namespace

TEST_CASE("kernel-info prints constants and the assumption report") {
  Scratch sc("kinfo");
  std::string out = sc.file("out.json");
  CHECK(run("kernel-info --kernel log-laplacian --dim 1", out) == 0);
  json j = read_json(out);
  CHECK(j["constants"]["normalization"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["constants"]["zero_order_shift"].get<double>() ==
        doctest::Approx(-1.1544313298030658).epsilon(1e-12));
  CHECK(j["constants"]["support_radius"].get<double>() == 1.0);
  CHECK(j["assumptions"]["even"]["pass"] == true);
  CHECK(j["assumptions"]["smooth_away_from_origin"]["pass"] == false);
  REQUIRE(j["symbol_table"].size() == 3);
  // symbol at xi = 2 against 2 log 2
  CHECK(j["symbol_table"][2]["symbol"].get<double>() ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-4));
}

TEST_CASE("kernel-info usage errors exit with 2") {
  CHECK(run("kernel-info --kernel log-laplacian") == 2);   // missing --dim
  CHECK(run("kernel-info --kernel no-such-family --dim 1") == 2);
  CHECK(run("kernel-info --kernel fractional --dim 1") == 2);  // fractional needs s
  CHECK(run("") == 2);                                         // a subcommand is required
}

TEST_CASE("eigen writes the spectrum, modes, and summary") {
  Scratch sc("eigen");
  std::string cfg = sc.config(base_config(32));
  CHECK(run("eigen --config " + cfg + " --count 4 --out " + sc.dir.string()) == 0);

  auto spec = read_csv(sc.file("spectrum.csv"));
  REQUIRE(spec.size() == 5);
  CHECK(spec[0] == std::vector<std::string>{"index", "eigenvalue", "residual"});
  double prev = -1e300;
  for (int i = 1; i <= 4; ++i) {
    const double lam = std::stod(spec[i][1]);
    CHECK(lam > prev);
    prev = lam;
    CHECK(std::stod(spec[i][2]) <= 1e-8);
  }

  auto modes = read_csv(sc.file("modes.csv"));
  REQUIRE(modes.size() == 33);  // header + one row per interior cell
  CHECK(modes[0] == std::vector<std::string>{"cell_id", "x", "u_1", "u_2", "u_3", "u_4"});

  json sum = read_json(sc.file("summary.json"));
  CHECK(sum["lambda_1"].get<double>() > 0.0);
  CHECK(sum["gap"].get<double>() > 1e-6);
  CHECK(sum["dofs"] == 32);
  CHECK_FALSE(sum.contains("error"));
}

TEST_CASE("eigen count boundaries") {
  Scratch sc("eigcnt");
  std::string cfg = sc.config(base_config(16));
  CHECK(run("eigen --config " + cfg + " --count 0 --out " + sc.dir.string()) == 0);
  auto spec = read_csv(sc.file("spectrum.csv"));
  CHECK(spec.size() == 1);  // header only
  CHECK(run("eigen --config " + cfg + " --count 17 --out " + sc.dir.string()) == 2);
}

TEST_CASE("poisson solves and reports the bound ratio") {
  Scratch sc("poisson");
  json c = base_config(32);
  c["equation"] = {{"f", "1"}};
  std::string cfg = sc.config(c);
  CHECK(run("poisson --config " + cfg + " --out " + sc.dir.string()) == 0);
  auto rows = read_csv(sc.file("solution.csv"));
  REQUIRE(rows.size() == 33);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) >= 0.0);
  json sum = read_json(sc.file("summary.json"));
  CHECK(sum["residual"].get<double>() <= 1e-8);
  CHECK(sum["u_inf"].get<double>() > 0.0);
  CHECK(sum["boundedness_ratio"].get<double>() > 0.0);
  CHECK(sum["rhs_kind"] == "Mf");
}

TEST_CASE("poisson with zero data returns the zero field") {
  Scratch sc("pzero");
  json c = base_config(24);
  c["equation"] = {{"f", "0"}};
  std::string cfg = sc.config(c);
  CHECK(run("poisson --config " + cfg + " --out " + sc.dir.string()) == 0);
  auto rows = read_csv(sc.file("solution.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) == 0.0);
}

TEST_CASE("poisson past the principal eigenvalue reports indefiniteness") {
  Scratch sc("pindef");
  std::string ecfg = sc.config(base_config(24));
  REQUIRE(run("eigen --config " + ecfg + " --count 1 --out " + sc.dir.string()) == 0);
  const double lam1 = read_json(sc.file("summary.json"))["lambda_1"].get<double>();

  json c = base_config(24);
  c["equation"] = {{"f", "1"}, {"lambda", lam1 + 0.1}};
  std::string cfg = sc.config(c);
  CHECK(run("poisson --config " + cfg + " --out " + sc.dir.string()) == 1);
  json sum = read_json(sc.file("summary.json"));
  REQUIRE(sum.contains("error"));
  CHECK(sum["error"]["type"] == "indefinite");
  CHECK(sum["error"]["smallest_pencil_eigenvalue"].get<double>() < 0.0);
}

TEST_CASE("verify runs a subset and its artifacts are reproducible") {
  Scratch sc("verify");
  json c = base_config(48);
  c["checks"] = {"kernel_assumptions", "weak_max_principle", "constant_nullspace"};
  c["seed"] = 99;
  std::string cfg = sc.config(c);

  std::string out1 = sc.file("run1");
  std::string out2 = sc.file("run2");
  CHECK(run("verify --config " + cfg + " --out " + out1, sc.file("stdout1.txt")) == 0);
  CHECK(run("verify --config " + cfg + " --out " + out2) == 0);

  json rep = read_json(out1 + "/report.json");
  CHECK(rep["overall"] == true);
  REQUIRE(rep["checks"].size() == 3);
  CHECK(rep["checks"][0]["status"] == "expected_fail");
  CHECK(rep["checks"][1]["status"] == "pass");
  CHECK(rep["checks"][2]["status"] == "pass");

  CHECK(slurp(out1 + "/report.json") == slurp(out2 + "/report.json"));
  CHECK(slurp(out1 + "/max_principle.csv") == slurp(out2 + "/max_principle.csv"));

  std::string console = slurp(sc.file("stdout1.txt"));
  CHECK(console.find("overall: pass") != std::string::npos);
}

TEST_CASE("config errors exit with 2") {
  Scratch sc("badcfg");
  std::string bad = sc.file("bad.json");
  std::ofstream(bad) << "{ not json";
  CHECK(run("eigen --config " + bad) == 2);
  CHECK(run("poisson --config " + sc.file("missing.json")) == 2);

  json c = base_config(16);
  c["meshsize"] = 7;
  CHECK(run("eigen --config " + sc.config(c)) == 2);
}
