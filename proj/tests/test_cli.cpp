#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdsndp/error.hpp"
#include "cdsndp/io.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cdsndp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cdsndp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdsndp_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path single_od_file() {
  const fs::path p = fs::temp_directory_path() / "cdsndp_cli_single.json";
  save_instance(p, testing::single_od(), UtilitySpec::mnl(0.001, true));
  return p;
}

}  // namespace

TEST_CASE("range and list parsing") {
  const auto r = cli::parse_range("0:20:0.25");
  CHECK(r.lo == 0.0);
  CHECK(r.hi == 20.0);
  CHECK(r.step == 0.25);
  CHECK_THROWS_AS(cli::parse_range("1:2"), InputError);
  CHECK_THROWS_AS(cli::parse_range("3:2:1"), InputError);
  CHECK_THROWS_AS(cli::parse_range("0:5:0"), InputError);
  CHECK_THROWS_AS(cli::parse_range("a:5:1"), InputError);
  CHECK(cli::parse_list("7", 3) == std::vector<double>{7, 7, 7});
  CHECK(cli::parse_list("1,2,3", 3) == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(cli::parse_list("1,2", 3), InputError);
}

TEST_CASE("model setup") {
  const auto in = validate_instance(testing::single_od());
  CHECK_THROWS_AS(cli::setup_model("cd-mnl", in, std::nullopt), InputError);
  CHECK_THROWS_AS(cli::setup_model("cd-probit", in, 0.001), InputError);
  CHECK(cli::setup_model("cd-mixed", in, 0.001).spec.model() == ChoiceModel::MixedLogit);
  CHECK(cli::setup_model("cd-det", in, 0.001).spec.model() == ChoiceModel::Deterministic);
  CHECK(cli::setup_model("cd-mnl", in, 0.001).spec.model() == ChoiceModel::Mnl);
  CHECK(cli::setup_model("sndp", in, std::nullopt).spec.vot == 0.0);
  CHECK(cli::setup_model("benchmark", in, std::nullopt).instance.num_services() == 1);
}

TEST_CASE("summaries ignore missing values") {
  const auto s = cli::summarize({3.0, std::nan(""), 1.0, 2.0});
  CHECK(s.count == 3);
  CHECK(s.min == 1.0);
  CHECK(s.max == 3.0);
  CHECK(s.avg == doctest::Approx(2.0));
  CHECK(cli::summarize({std::nan("")}).count == 0);
}

TEST_CASE("input errors exit with code 4") {
  CHECK(run({"solve", "/nonexistent/instance.json"}).code == cli::kExitInput);
  CHECK(run({"solve"}).code == cli::kExitInput);
  CHECK(run({"frobnicate"}).code == cli::kExitInput);
  CHECK(run({"solve", single_od_file().string(), "--model", "nope"}).code == cli::kExitInput);
  CHECK(run({"solve", single_od_file().string(), "--price-grid", "5:1:1", "--method", "heuristic"}).code ==
        cli::kExitInput);
  CHECK(run({"sweep", "--step", "0"}).code == cli::kExitInput);
  CHECK(run({"--version"}).code == cli::kExitOk);
}

TEST_CASE("sweep emits a plot-ready csv") {
  const auto r = run({"sweep", "--scenario", "toy-uncap", "--strategy", "A", "--lo", "0", "--hi", "20", "--step", "0.25"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("price,profit,profit_S1,profit_S2\n", 0) == 0);
  CHECK(count_lines(r.out) == 1 + 81);
  CHECK(r.err.find("argmax price") != std::string::npos);
  const auto all = run({"sweep", "--scenario", "toy-cap"});
  CHECK(count_lines(all.out) == 1 + 3 * 81);
}

TEST_CASE("solve writes reproducible artifacts") {
  const fs::path inst = single_od_file();
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  for (const auto& dir : {a, b}) {
    const auto r = run({"solve", inst.string(), "--model", "cd-mnl", "--draws", "20", "--seed", "5", "--replications",
                        "3", "--jobs", "2", "--shippers", "200", "--out", dir.string()});
    REQUIRE(r.code == 0);
  }
  for (const char* f : {"results.csv", "summary.json", "solution_0.json", "simulation_2.csv"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // Manifests differ only in the recorded --out argument.
  Json ma = read_json_file(a / "manifest.json"), mb = read_json_file(b / "manifest.json");
  ma.erase("argv");
  mb.erase("argv");
  CHECK(ma == mb);
  const Json summary = read_json_file(a / "summary.json");
  const auto& p = summary["metrics"]["expected_profit"];
  CHECK(p["min"].get<double>() <= p["avg"].get<double>());
  CHECK(p["avg"].get<double>() <= p["max"].get<double>());
  CHECK(p["n"].get<int>() == 3);
  const Json manifest = read_json_file(a / "manifest.json");
  CHECK(manifest["instance"]["hash"] == file_hash(inst));
  CHECK(manifest["seeds"] == Json::array({5, 6, 7}));
  CHECK(count_lines(slurp(a / "results.csv")) == 4);

  // Aggregates are functions of the per-replication rows.
  std::istringstream rows(slurp(a / "results.csv"));
  std::string line;
  std::getline(rows, line);
  double lo = 1e300, hi = -1e300;
  while (std::getline(rows, line)) {
    std::stringstream cells(line);
    std::string cell;
    for (int c = 0; c < 4; ++c) std::getline(cells, cell, ',');
    lo = std::min(lo, std::stod(cell));
    hi = std::max(hi, std::stod(cell));
  }
  CHECK(p["min"].get<double>() == doctest::Approx(lo).epsilon(1e-10));
  CHECK(p["max"].get<double>() == doctest::Approx(hi).epsilon(1e-10));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("heuristic and exact solve through the cli") {
  const fs::path inst = single_od_file();
  const auto exact = run({"solve", inst.string(), "--model", "cd-det", "--no-simulate"});
  const auto heur = run({"solve", inst.string(), "--model", "cd-det", "--method", "heuristic", "--no-simulate"});
  CHECK(exact.code == 0);
  CHECK(heur.code == 0);
  CHECK(heur.err.find("single realization") != std::string::npos);
  CHECK(exact.out.find(",optimal,") != std::string::npos);
}

TEST_CASE("oracle and lp export") {
  const fs::path inst = single_od_file();
  const auto o = run({"oracle", inst.string(), "--model", "cd-det"});
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  const auto s = run({"solve", inst.string(), "--model", "cd-det", "--no-simulate", "--out", scratch("oracle").string()});
  REQUIRE(s.code == 0);
  const double exact = Json::parse(s.out)["metrics"]["expected_profit"]["avg"].get<double>();
  CHECK(std::abs(j["expected_profit"].get<double>() - exact) <= 1.0 * 100.0 + 1e-6);
  CHECK(j["expected_profit"].get<double>() <= exact + 1e-6);
  const fs::path lp = scratch("model.lp");
  CHECK(run({"export-lp", inst.string(), "--model", "cd-mnl", "--draws", "3", "--out", lp.string()}).code == 0);
  const std::string text = slurp(lp);
  CHECK((text.find("Maximize") != std::string::npos || text.find("maximize") != std::string::npos));
  fs::remove(lp);
  fs::remove_all(scratch("oracle"));
}

TEST_CASE("generate follows the row counting rule") {
  const fs::path corridor = scratch("corridor.json");
  {
    std::ofstream f(corridor);
    f << R"({"ods": [
      {"origin": "RTM", "destination": "DUI", "volume": 43000, "seaport": 1,
       "iwt": {"price": 200, "time": 20, "frequency": 5, "accessibility": 1},
       "road": {"price": 400, "time": 4, "accessibility": 1}},
      {"origin": "DUI", "destination": "BON", "volume": 0,
       "road": {"price": 200, "time": 2, "accessibility": 1},
       "rail": {"price": 180, "time": 8, "frequency": 3, "accessibility": 0.5}}]})";
  }
  const auto r1 = run({"generate", corridor.string(), "--vot", "0.002", "--seed", "1"});
  const auto r2 = run({"generate", corridor.string(), "--vot", "0.002", "--seed", "2"});
  REQUIRE(r1.code == 0);
  CHECK(count_lines(r1.out) == 1 + (1 + 4) + 1);
  CHECK(count_lines(r2.out) == count_lines(r1.out));
  CHECK(run({"generate", corridor.string()}).code == cli::kExitInput);
  fs::remove(corridor);
}
