#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bes3/cli.hpp"

using namespace bes3;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"bes3"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "bes3_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run_binary(const std::string& args) {
  const std::string command = std::string("\"") + BES3_CLI_PATH + "\" " + args;
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.15697175) == "0.15697175");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(1e-7) == "1e-07");
}

TEST_CASE("simulate summary rows are deterministic") {
  const auto a = cli({"simulate", "--method", "norm3d", "--r", "1", "--horizon", "1", "--dt", "0.001",
                      "--paths", "100", "--seed", "7", "--summary-only"});
  REQUIRE(a.code == kExitOk);
  const auto rows = lines(a.out);
  REQUIRE(rows.size() == 101);
  CHECK(rows[0] == "path_id,terminal,min,argmin_time");
  CHECK(rows[1].rfind("0,", 0) == 0);
  const auto b = cli({"simulate", "--method", "norm3d", "--r", "1", "--horizon", "1", "--dt", "0.001",
                      "--paths", "100", "--seed", "7", "--summary-only"});
  CHECK(a.out == b.out);
}

TEST_CASE("simulate writes full paths for small batches") {
  const auto run = cli({"simulate", "--method", "euler", "--horizon", "0.1", "--dt", "0.01", "--paths", "3"});
  REQUIRE(run.code == kExitOk);
  const auto rows = lines(run.out);
  CHECK(rows[0] == "path_id,t,value");
  CHECK(rows.size() == 1 + 3 * 11);
  CHECK(rows[1] == "0,0,1");
}

TEST_CASE("simulate defaults to summaries above 1000 paths") {
  const auto run = cli({"simulate", "--horizon", "0.01", "--dt", "0.01", "--paths", "1001"});
  REQUIRE(run.code == kExitOk);
  CHECK(lines(run.out)[0] == "path_id,terminal,min,argmin_time");
  const auto full = cli({"simulate", "--horizon", "0.01", "--dt", "0.01", "--paths", "1001", "--full-paths"});
  CHECK(lines(full.out)[0] == "path_id,t,value");
  CHECK(cli({"simulate", "--paths", "5", "--summary-only", "--full-paths"}).code == kExitUsage);
}

TEST_CASE("simulate rejects bad flags with exit 2") {
  const auto zero = cli({"simulate", "--method", "euler", "--dt", "0"});
  CHECK(zero.code == kExitUsage);
  CHECK(zero.err.find("--dt") != std::string::npos);
  CHECK(cli({"simulate", "--dt", "0.3"}).code == kExitUsage);
  CHECK(cli({"simulate", "--method", "sideways"}).code == kExitUsage);
  CHECK(cli({"simulate", "--bogus-flag", "1"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
}

TEST_CASE("density rows") {
  const auto single = cli({"density", "--r", "1", "--t-min", "1", "--t-max", "1", "--points", "1"});
  REQUIRE(single.code == kExitOk);
  const auto rows = lines(single.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "t,p");
  const auto comma = rows[1].find(',');
  CHECK(rows[1].substr(0, comma) == "1");
  CHECK(std::stod(rows[1].substr(comma + 1)) == doctest::Approx(0.156972).epsilon(1e-6));

  const auto two = lines(cli({"density", "--t-min", "1", "--t-max", "2", "--points", "2"}).out);
  REQUIRE(two.size() == 3);
  CHECK(two[1].rfind("1,", 0) == 0);
  CHECK(two[2].rfind("2,", 0) == 0);

  CHECK(cli({"density", "--t-min", "2", "--t-max", "1"}).code == kExitUsage);
  CHECK(cli({"density", "--t-min", "0", "--t-max", "1"}).code == kExitUsage);
}

TEST_CASE("laplace table") {
  const auto run = cli({"laplace", "--r", "1", "--lambda-max", "2", "--points", "5"});
  REQUIRE(run.code == kExitOk);
  const auto rows = lines(run.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "lambda,closed_form,numeric,error_estimate");
  CHECK(rows[1].rfind("0,1,", 0) == 0);
}

TEST_CASE("verify exit codes") {
  const auto bogus = cli({"verify", "--scenario", "bogus"});
  CHECK(bogus.code == kExitUsage);
  CHECK(bogus.err.find("closed_form_consistency") != std::string::npos);

  const auto pass = cli({"verify", "--scenario", "closed_form_consistency", "--scenario", "normalization"});
  CHECK(pass.code == kExitOk);
  const auto report = nlohmann::json::parse(pass.out);
  CHECK(report["schema"] == 1);
  CHECK(report["seed"] == 7);
  CHECK(report["checks"].size() == 7);
  for (const char* key : {"name", "estimate", "target", "tolerance", "statistic", "threshold", "passed"})
    CHECK(report["checks"][0].contains(key));

  const auto fail = cli({"verify", "--scenario", "doob_scalar", "--mutation", "biased-u"});
  CHECK(fail.code == kExitCheckFailed);

  CHECK(cli({"verify", "--mutation", "sideways"}).code == kExitUsage);
  CHECK(cli({"verify", "--format", "xml"}).code == kExitUsage);
}

TEST_CASE("verify text format and seed sweep") {
  const auto text = cli({"verify", "--scenario", "doob_scalar", "--format", "text"});
  CHECK(text.code == kExitOk);
  CHECK(text.out.find("PASS") != std::string::npos);
  const auto sweep = cli({"verify", "--scenario", "doob_scalar", "--seeds", "2"});
  CHECK(sweep.code == kExitOk);
  const auto json = nlohmann::json::parse(sweep.out);
  CHECK(json["sweep"].size() == 2);
  CHECK(json["sweep"][1]["seed"] == 8);
}

TEST_CASE("unwritable output exits 3") {
  CHECK(cli({"figure1", "--out", "/nonexistent-dir/figure1.csv"}).code == kExitIo);
  CHECK(cli({"density", "--out", "/nonexistent-dir/density.csv"}).code == kExitIo);
}

TEST_CASE("figure1 output") {
  const auto a = cli({"figure1", "--seed", "3"});
  REQUIRE(a.code == kExitOk);
  const auto rows = lines(a.out);
  CHECK(rows.size() == 1202);
  CHECK(rows[0] == "k,value");
  CHECK(rows[1] == "0,6");
  CHECK(cli({"figure1", "--seed", "3"}).out == a.out);
  CHECK(cli({"figure1", "--seed", "4"}).out != a.out);
  CHECK(cli({"figure1", "--steps", "0"}).code == kExitUsage);
}

TEST_CASE("installed binary honours the exit-code contract") {
  const auto dir = scratch_dir();
  const auto first = dir / "fig_a.csv";
  const auto second = dir / "fig_b.csv";
  CHECK(run_binary("figure1 --seed 1 --out " + first.string()) == 0);
  CHECK(run_binary("figure1 --seed 1 --out " + second.string()) == 0);
  CHECK(slurp(first) == slurp(second));
  CHECK(slurp(first).rfind("k,value\n0,6\n", 0) == 0);
  CHECK(run_binary("verify --scenario doob_scalar --mutation biased-u --out " + (dir / "v.json").string() +
                   " 2>/dev/null") == 1);
  CHECK(run_binary("verify --scenario bogus 2>/dev/null") == 2);
  CHECK(run_binary("simulate --dt 0 2>/dev/null") == 2);
  CHECK(run_binary("density --out /nonexistent-dir/x.csv 2>/dev/null") == 3);
  fs::remove_all(dir);
}
