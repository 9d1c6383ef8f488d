#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli/commands.hpp"
#include "jamopt/scenario.hpp"
#include "jamopt/sweep.hpp"
#include "oracles.hpp"

using namespace jamopt;

namespace {

const std::string kData = JAMOPT_TEST_DATA_DIR;
const std::string kScenarios = JAMOPT_SCENARIO_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome jamopt_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// "key: value" lines of the command output.
std::map<std::string, std::string> fields(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) m[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return m;
}

double number(const std::map<std::string, std::string>& f, const std::string& key) {
  return std::stod(f.at(key));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "jamopt_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("optimize at a low jamming budget jams a single pilot") {
  const auto r = jamopt_cli({"optimize", kScenarios + "/fig2.scenario", "--pw-db=-20"});
  REQUIRE(r.code == cli::kOk);
  const auto f = fields(r.out);
  CHECK(number(f, "zeta_t_1") == 0.0);
  CHECK(number(f, "zeta_t_2") == 0.0);
  CHECK(number(f, "zeta_t_3") == 0.0);
  CHECK(number(f, "zeta_t_4") == 1.0);
  CHECK(f.at("at_zero") == "[zeta_t_1, zeta_t_2, zeta_t_3, zeta_d]");
  CHECK(number(f, "kkt_residual") < 1e-10);
}

TEST_CASE("optimize at a very high budget splits energy evenly between phases") {
  const auto r = jamopt_cli({"optimize", kScenarios + "/fig2.scenario", "--pw-db", "60"});
  REQUIRE(r.code == cli::kOk);
  CHECK(std::abs(number(fields(r.out), "zeta_d") - 0.5) < 1e-2);
}

TEST_CASE("optimize prints equal shares for identical users and writes a usable file") {
  const auto file = scratch("symmetric.alloc");
  const auto r = jamopt_cli({"optimize", kData + "/symmetric.scenario", "--out", file.string()});
  REQUIRE(r.code == cli::kOk);
  const auto f = fields(r.out);
  CHECK(f.at("zeta_t_1") == f.at("zeta_t_2"));
  CHECK(f.at("method").size() > 0);
  const auto alloc = load_allocation(file);
  CHECK(alloc.zeta_t(0) == alloc.zeta_t(1));

  const auto rates = jamopt_cli({"rates", kData + "/symmetric.scenario", "--alloc", "file:" + file.string()});
  CHECK(rates.code == cli::kOk);
}

TEST_CASE("exit codes") {
  CHECK(jamopt_cli({}).code == cli::kConfigError);
  CHECK(jamopt_cli({"frobnicate"}).code == cli::kConfigError);
  CHECK(jamopt_cli({"optimize", "/nonexistent.scenario"}).code == cli::kConfigError);
  const auto bad = jamopt_cli({"optimize", kData + "/bad_key.scenario"});
  CHECK(bad.code == cli::kConfigError);
  CHECK(bad.err.find("jamer") != std::string::npos);
  CHECK(bad.err.find("line 5") != std::string::npos);
  // A sweep scenario needs an explicit point.
  CHECK(jamopt_cli({"optimize", kScenarios + "/fig2.scenario"}).code == cli::kConfigError);
  CHECK(jamopt_cli({"rates", kData + "/symmetric.scenario", "--alloc", "sideways"}).code == cli::kConfigError);
  CHECK(jamopt_cli({"sweep", kData + "/symmetric.scenario"}).code == cli::kConfigError);
  // Optimizing against a silent jammer has no unique answer.
  CHECK(jamopt_cli({"optimize", kData + "/unjammed.scenario"}).code == cli::kConfigError);
  CHECK(jamopt_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("allocation files off the simplex are rejected") {
  const auto r = jamopt_cli({"rates", kData + "/symmetric.scenario", "--alloc", "file:" + kData + "/off_simplex.alloc"});
  CHECK(r.code == cli::kConfigError);
  const auto wrong_size =
      jamopt_cli({"rates", kData + "/symmetric.scenario", "--alloc", "file:" + kData + "/skewed.alloc"});
  CHECK(wrong_size.code == cli::kConfigError);
}

TEST_CASE("rates without jamming do not depend on the allocation") {
  const auto uni = fields(jamopt_cli({"rates", kData + "/unjammed.scenario", "--alloc", "uniform"}).out);
  const auto opt = fields(jamopt_cli({"rates", kData + "/unjammed.scenario", "--alloc", "optimal"}).out);
  const auto file = fields(
      jamopt_cli({"rates", kData + "/unjammed.scenario", "--alloc", "file:" + kData + "/skewed.alloc"}).out);
  for (const char* key : {"R_LB", "R_MC", "R_UB"}) {
    CHECK(uni.at(key) == opt.at(key));
    CHECK(uni.at(key) == file.at(key));
  }
}

TEST_CASE("silent users have zero rate") {
  const auto r = jamopt_cli({"rates", kData + "/silent.scenario", "--alloc", "uniform"});
  REQUIRE(r.code == cli::kOk);
  const auto f = fields(r.out);
  CHECK(number(f, "R_LB") == 0.0);
  CHECK(f.at("R_MC").starts_with("0 +/- 0"));
  CHECK(number(f, "R_UB") == 0.0);
}

TEST_CASE("optimal jamming beats uniform jamming at 30 dB") {
  const auto uni = fields(jamopt_cli({"rates", kScenarios + "/fig1.scenario", "--alloc", "uniform", "--pw-db", "30"}).out);
  const auto opt = fields(jamopt_cli({"rates", kScenarios + "/fig1.scenario", "--alloc", "optimal", "--pw-db", "30"}).out);
  CHECK(number(opt, "R_LB") < number(uni, "R_LB"));
  CHECK(std::stod(opt.at("R_MC")) < std::stod(uni.at("R_MC")));
  CHECK(number(opt, "R_UB") < number(uni, "R_UB"));
}

TEST_CASE("oracle check") {
  const auto good = jamopt_cli({"oracle-check", kData + "/symmetric.scenario", "--grid", "1e-3"});
  CHECK(good.code == cli::kOk);
  CHECK(good.out.find("agree") != std::string::npos);
  const auto flat = jamopt_cli({"oracle-check", kData + "/unjammed.scenario", "--grid", "0.05"});
  CHECK(flat.code == cli::kOk);
  CHECK(flat.out.find("flat objective") != std::string::npos);
  CHECK(jamopt_cli({"oracle-check", kData + "/symmetric.scenario", "--grid", "0"}).code == cli::kConfigError);
}

TEST_CASE("sweep output matches the golden file") {
  const auto stem = scratch("tiny");
  const auto r = jamopt_cli({"sweep", kData + "/tiny.scenario", "--output", stem.string(), "--workers", "2"});
  REQUIRE(r.code == cli::kOk);
  const std::string csv = slurp(stem.string() + ".csv");
  CHECK(csv == slurp(kData + "/tiny.golden.csv"));

  const std::string plot = slurp(stem.string() + ".plot");
  CHECK(plot.find("'tiny.csv'") != std::string::npos);
  CHECK(plot.find("tiny_rates.png") != std::string::npos);
  CHECK(plot.find("tiny_allocation.png") != std::string::npos);
}

TEST_CASE("golden rows agree with hand formulas") {
  const auto rows = csv_rows(slurp(kData + "/tiny.golden.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == csv_columns(2));

  jamopt::testing::Channel ch;
  ch.train_power = {10.0, std::pow(10.0, 0.3)};
  ch.data_power = {10.0, std::pow(10.0, 1.3)};
  ch.train_len = {1, 2};
  ch.block_len = 10;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const double pw = std::pow(10.0, std::stod(row[0]) / 10.0);
    const double rho_unif = jamopt::testing::rho_reference(ch, pw, {0.1, 0.2}, 0.7);
    CHECK(std::stod(row[5]) == doctest::Approx(rho_unif).epsilon(1e-12));
    const double rho_opt = jamopt::testing::rho_reference(ch, pw, {std::stod(row[1]), std::stod(row[2])}, std::stod(row[3]));
    CHECK(std::stod(row[4]) == doctest::Approx(rho_opt).epsilon(1e-12));
    CHECK(std::stod(row[6]) == doctest::Approx(jamopt::testing::rate_lb_reference(ch, rho_opt)).epsilon(1e-12));
    CHECK(std::stod(row[9]) == doctest::Approx(jamopt::testing::rate_ub_reference(ch, rho_opt)).epsilon(1e-12));
    CHECK(std::stod(row[14]) == doctest::Approx(100.0 * (1.0 - std::stod(row[7]) / std::stod(row[11]))).epsilon(1e-12));
  }
}

TEST_CASE("sweeps are reproducible byte for byte") {
  const auto a = scratch("repeat_a");
  const auto b = scratch("repeat_b");
  REQUIRE(jamopt_cli({"sweep", kData + "/tiny.scenario", "--output", a.string(), "--workers", "1"}).code == cli::kOk);
  REQUIRE(jamopt_cli({"sweep", kData + "/tiny.scenario", "--output", b.string(), "--workers", "4"}).code == cli::kOk);
  CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
}

TEST_CASE("sweep rows keep their invariants") {
  const auto spec = load_scenario(kData + "/tiny.scenario");
  const auto cfg = spec.system();
  std::vector<double> grid;
  for (double db = -10.0; db <= 40.0; db += 2.5) grid.push_back(db);
  const auto rows = run_sweep(cfg, grid, spec.mc, 3);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CHECK(r.pw_db == grid[i]);
    double sum = r.zeta_d;
    for (double z : r.zeta_t) sum += z;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    const double hw = std::hypot(r.opt.r_mc_halfwidth, r.unif.r_mc_halfwidth);
    CHECK(r.opt.r_mc <= r.unif.r_mc + 3.0 * hw);
    for (const auto* rep : {&r.opt, &r.unif}) {
      CHECK(rep->r_lb <= rep->r_mc + 3.0 * rep->r_mc_halfwidth);
      CHECK(rep->r_mc - 3.0 * rep->r_mc_halfwidth <= rep->r_ub);
    }
  }
}

}  // TEST_SUITE
