#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>
#include <sstream>
#include <unordered_map>

#include "cdsndp/backend.hpp"
#include "cdsndp/error.hpp"

namespace cdsndp {

namespace fs = std::filesystem;

HighsCliBackend::HighsCliBackend(std::string command) : command_(std::move(command)) {
  if (command_.empty()) {
    const char* env = std::getenv("CDSNDP_HIGHS");
    command_ = env && *env ? env : "highs";
  }
}

bool HighsCliBackend::available() const {
  const std::string probe = command_ + " --version > /dev/null 2>&1";
  return std::system(probe.c_str()) == 0;
}

namespace {

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

struct ParsedSolution {
  std::string model_status;
  bool feasible = false;
  std::unordered_map<std::string, double> columns;
};

ParsedSolution parse_solution(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw SolverError("HiGHS wrote no solution file");
  ParsedSolution sol;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "Model status") {
      std::getline(in, sol.model_status);
    } else if (line == "# Primal solution values") {
      std::getline(in, line);
      sol.feasible = line == "Feasible";
      if (!sol.feasible) continue;
      std::getline(in, line);  // Objective
      std::getline(in, line);  // # Columns N
      std::istringstream hdr(line);
      std::string hash, word;
      long count = 0;
      hdr >> hash >> word >> count;
      for (long i = 0; i < count && std::getline(in, line); ++i) {
        std::istringstream row(line);
        std::string name;
        double value = 0.0;
        row >> name >> value;
        sol.columns[name] = value;
      }
      break;
    }
  }
  return sol;
}

}  // namespace

MilpResult HighsCliBackend::solve(const MilpModel& model, const SolveLimits& limits) {
  model.check();
  const auto t0 = std::chrono::steady_clock::now();
  MilpResult out;
  out.backend = name();

  std::mt19937_64 rng(static_cast<std::uint64_t>(t0.time_since_epoch().count()) ^
                      std::hash<std::thread::id>{}(std::this_thread::get_id()));
  const fs::path dir = fs::temp_directory_path() / ("cdsndp_highs_" + std::to_string(rng()));
  fs::create_directories(dir);
  const fs::path lp = dir / "model.lp", sol = dir / "model.sol", opt = dir / "options.txt", log = dir / "log.txt";
  {
    std::ofstream(lp) << model.to_lp_format();
    std::ofstream o(opt);
    o << "mip_rel_gap = " << limits.gap_tol << "\n";
    o << "mip_abs_gap = 0\n";
  }
  const std::string cmd = command_ + " --model_file " + quote(lp) + " --solution_file " + quote(sol) +
                          " --time_limit " + std::to_string(limits.time_limit) + " --options_file " + quote(opt) +
                          " > " + quote(log) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0 && !fs::exists(sol)) {
    std::ifstream l(log);
    std::stringstream ss;
    ss << l.rdbuf();
    fs::remove_all(dir);
    throw SolverError("HiGHS command failed (" + command_ + "): " + ss.str());
  }
  ParsedSolution parsed = parse_solution(sol);
  fs::remove_all(dir);

  if (parsed.feasible) {
    const auto names = model.lp_column_names();
    out.values.assign(names.size(), 0.0);
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto it = parsed.columns.find(names[j]);
      if (it == parsed.columns.end()) throw SolverError("HiGHS solution misses column " + names[j]);
      double v = it->second;
      if (model.variables()[j].is_integral()) v = std::round(v);
      out.values[j] = v;
    }
    out.objective = model.evaluate(out.values);
  }
  const std::string& ms = parsed.model_status;
  if (ms == "Optimal") {
    out.status = MilpStatus::Optimal;
    out.best_bound = out.objective;
  } else if (ms == "Infeasible") {
    out.status = MilpStatus::Infeasible;
    out.values.clear();
  } else if (ms == "Unbounded" || ms == "Primal infeasible or unbounded") {
    out.status = MilpStatus::Unbounded;
    out.values.clear();
  } else if (ms.find("limit") != std::string::npos) {
    out.status = out.has_solution() ? MilpStatus::TimeLimit : MilpStatus::TimeLimitNoSolution;
    out.best_bound = std::nan("");
    out.gap = std::nan("");
  } else {
    out.status = MilpStatus::Error;
    out.message = "HiGHS model status: " + ms;
  }
  return out;
}

std::unique_ptr<MilpBackend> make_backend(const std::string& name) {
  if (name == "builtin" || name == "bb") return std::make_unique<BranchAndBound>();
  if (name == "highs") return std::make_unique<HighsCliBackend>();
  throw InputError("unknown backend '" + name + "' (expected builtin or highs)");
}

}  // namespace cdsndp
