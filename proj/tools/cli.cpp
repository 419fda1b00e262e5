#include "cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cdsndp/error.hpp"
#include "cdsndp/heuristic.hpp"
#include "cdsndp/illustrative.hpp"
#include "cdsndp/io.hpp"
#include "cdsndp/oracle.hpp"
#include "cdsndp/reformulation.hpp"
#include "cdsndp/simulator.hpp"

namespace fs = std::filesystem;

namespace cdsndp::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double to_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("cannot read " + what + " from '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError("cannot read " + what + " from '" + s + "'");
  return v;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

Range parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw InputError("range must look like lo:hi:step (got '" + text + "')");
  Range r{to_number(parts[0], "range"), to_number(parts[1], "range"), to_number(parts[2], "range")};
  if (!(r.step > 0.0) || r.hi < r.lo) throw InputError("range needs lo <= hi and step > 0 (got '" + text + "')");
  return r;
}

std::vector<double> parse_list(const std::string& text, std::size_t count) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) v.push_back(to_number(p, "list value"));
  if (v.size() == 1) v.assign(count, v[0]);
  if (v.size() != count)
    throw InputError("expected 1 or " + std::to_string(count) + " comma-separated values, got " + std::to_string(v.size()));
  return v;
}

ModelSetup setup_model(const std::string& model, const Instance& instance, std::optional<double> vot) {
  auto need_vot = [&]() {
    if (!vot) throw InputError("model " + model + " needs a value of time (--vot or a utility entry in the instance)");
    return *vot;
  };
  if (model == "benchmark") return {validate_instance(restrict_to_direct_services(instance)), UtilitySpec::cost_only()};
  if (model == "sndp") return {instance, UtilitySpec::cost_only()};
  if (model == "cd-det") return {instance, UtilitySpec::mnl(need_vot(), false)};
  if (model == "cd-mnl") return {instance, UtilitySpec::mnl(need_vot(), true)};
  if (model == "cd-mixed") return {instance, UtilitySpec::mixed_logit(need_vot())};
  throw InputError("unknown model '" + model + "' (benchmark, sndp, cd-det, cd-mnl, cd-mixed)");
}

Stats summarize(const std::vector<double>& values) {
  Stats s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (s.count == 0) s.min = s.max = v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
    ++s.count;
  }
  if (s.count) s.avg = sum / static_cast<double>(s.count);
  return s;
}

namespace {

struct CommonModelFlags {
  std::string instance;
  std::string model = "cd-mnl";
  std::size_t draws = 100;
  std::uint64_t seed = 1;
  std::optional<double> vot;
};

struct SolveFlags : CommonModelFlags {
  std::string method = "exact";
  int replications = 1;
  double time_limit = 3600.0;
  double gap = 1e-6;
  std::string backend = "builtin";
  std::string price_grid, freq_grid, init_price, init_freq;
  bool literal_ap = false;
  bool no_capacity_check = false;
  bool no_simulate = false;
  std::size_t shippers = 1000;
  std::string out;
  int jobs = 1;
};

void add_model_flags(CLI::App* app, CommonModelFlags& f) {
  app->add_option("instance", f.instance, "instance JSON file")->required();
  app->add_option("--model", f.model, "benchmark | sndp | cd-det | cd-mnl | cd-mixed")
      ->check(CLI::IsMember({"benchmark", "sndp", "cd-det", "cd-mnl", "cd-mixed"}));
  app->add_option("--draws", f.draws, "SAA realizations R for stochastic models")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--vot", f.vot, "value of time, k EUR/TEU/h");
}

/// Instance, its utility entries and the VoT to use.
struct Loaded {
  InstanceFile file;
  std::optional<double> vot;
};

Loaded load(const CommonModelFlags& f) {
  Loaded l{load_instance(f.instance), f.vot};
  if (!l.vot && l.file.utility && l.file.utility->vot > 0.0) l.vot = l.file.utility->vot;
  if (!l.vot && l.file.true_utility && l.file.true_utility->vot > 0.0) l.vot = l.file.true_utility->vot;
  return l;
}

struct Replication {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  Solution solution;
  double evaluated_profit = kNaN;
  double kkt = kNaN;
  double ap_objective = kNaN;
  std::size_t iterations = 0;
  std::optional<SimulationReport> sim;
  std::string error;
  bool input_error = false;
};

int exit_code_for(const std::vector<Replication>& reps) {
  bool infeasible = false, timeout = false, failed = false;
  for (const auto& r : reps) {
    if (!r.error.empty()) {
      failed = true;
      continue;
    }
    switch (r.solution.status) {
      case MilpStatus::Optimal: break;
      case MilpStatus::Infeasible: infeasible = true; break;
      case MilpStatus::TimeLimit: timeout = true; break;
      default: failed = true;
    }
  }
  if (infeasible) return kExitInfeasible;
  if (failed) return kExitFailure;
  if (timeout) return kExitTimeout;
  return kExitOk;
}

int cmd_solve(const SolveFlags& f, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const Loaded l = load(f);
  const ModelSetup m = setup_model(f.model, l.file.instance, l.vot);
  const Instance& in = m.instance;
  const bool stochastic = m.spec.is_random();
  const bool heuristic = f.method == "heuristic";
  if (!stochastic && f.draws != 100) err << "note: " << f.model << " is deterministic, --draws ignored (R = 1)\n";
  if (heuristic && !stochastic) err << "note: heuristic on a deterministic model runs with a single realization\n";
  if (f.replications < 1) throw InputError("--replications must be at least 1");
  if (f.jobs < 1) throw InputError("--jobs must be at least 1");

  std::optional<UtilitySpec> true_spec = l.file.true_utility;
  if (!true_spec && l.vot) true_spec = UtilitySpec::weighted_logit_mixture(*l.vot);
  const bool simulate = !f.no_simulate && true_spec.has_value();
  if (!f.no_simulate && !simulate) err << "note: no value of time known, out-of-sample simulation skipped\n";

  HeuristicGrids grids = default_grids(in);
  if (!f.price_grid.empty()) {
    const Range r = parse_range(f.price_grid);
    grids.prices = PriceGrid::range(r.lo, r.hi, r.step);
  }
  if (!f.freq_grid.empty()) {
    const Range r = parse_range(f.freq_grid);
    grids.frequencies = FreqGrid::range(static_cast<int>(std::lround(r.lo)), static_cast<int>(std::lround(r.hi)),
                                        std::max(1, static_cast<int>(std::lround(r.step))));
  }
  HeuristicInit init;
  if (!f.init_price.empty()) init.prices = parse_list(f.init_price, in.num_arcs());
  if (!f.init_freq.empty()) {
    std::vector<int> psi;
    for (double v : parse_list(f.init_freq, in.num_arcs())) psi.push_back(static_cast<int>(std::lround(v)));
    init.frequencies = psi;
  }
  if (heuristic) validate_grids(in, grids);
  make_backend(f.backend);  // fail early on an unknown name

  const auto reps_n = static_cast<std::size_t>(f.replications);
  std::vector<Replication> reps(reps_n);
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r; (r = next++) < reps_n;) {
      Replication& rep = reps[r];
      rep.index = r;
      rep.seed = f.seed + r;
      try {
        auto backend = make_backend(f.backend);
        const Sample sample = sample_for(in, m.spec, f.draws, rep.seed);
        if (heuristic) {
          HeuristicOptions opt;
          opt.aggregated = !f.literal_ap;
          opt.ap_limits.time_limit = f.time_limit;
          opt.ap_limits.gap_tol = f.gap;
          HeuristicResult h = run_heuristic(in, m.spec, sample, grids, init, *backend, opt);
          rep.solution = std::move(h.solution);
          rep.evaluated_profit = h.evaluated_profit;
          rep.ap_objective = h.ap_objective;
          rep.iterations = h.iterations.size();
        } else {
          const CdMilp milp = stochastic ? build_saa_milp(in, m.spec, sample) : build_deterministic_milp(in, m.spec);
          rep.solution = solve(milp, *backend, SolveLimits{f.time_limit, f.gap});
          if (!rep.solution.x.empty()) {
            rep.kkt = verify_kkt(rep.solution, in, m.spec, sample).max_residual();
            rep.evaluated_profit = evaluate_decision(in, m.spec, sample, rep.solution.price, rep.solution.frequency,
                                                     rep.solution.vehicles)
                                       .expected_profit;
          }
        }
        if (simulate && !rep.solution.frequency.empty())
          rep.sim = simulate_population(rep.solution, in, *true_spec,
                                        {f.shippers, rep.seed, !f.no_capacity_check});
      } catch (const InputError& e) {
        rep.error = e.what();
        rep.input_error = true;
      } catch (const std::exception& e) {
        rep.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      err << "replication " << r << " seed " << rep.seed << ": ";
      if (!rep.error.empty())
        err << "error: " << rep.error << '\n';
      else
        err << to_string(rep.solution.status) << ", expected profit " << fmt(rep.solution.expected_profit)
            << (rep.sim ? ", simulated profit " + fmt(rep.sim->profit) : std::string()) << ", "
            << fmt(rep.solution.wall_time) << " s\n";
    }
  };
  {
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(f.jobs), reps_n);
    for (std::size_t t = 0; t + 1 < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }
  for (const auto& r : reps)
    if (r.input_error) throw InputError(r.error);

  // Per-replication rows; wall-clock values go to a separate file so the rest is reproducible.
  std::vector<std::string> columns{"expected_profit", "evaluated_profit", "kkt_residual", "ap_objective",
                                   "simulated_profit", "simulated_share_op"};
  std::vector<std::size_t> priced;
  for (std::size_t a = 0; a < in.num_arcs(); ++a)
    if (in.demand[a] > 0.0) {
      priced.push_back(a);
      columns.push_back("price:" + in.arc_name(a));
    }
  for (const auto& s : in.services)
    for (const auto& v : in.vehicle_types) columns.push_back("freq:" + s.id + ":" + v.id);
  std::vector<std::vector<double>> table(reps_n);
  for (std::size_t r = 0; r < reps_n; ++r) {
    const Replication& rep = reps[r];
    auto& row = table[r];
    const bool ok = rep.error.empty() && !rep.solution.frequency.empty();
    double share = kNaN;
    if (rep.sim) {
      double carried = 0.0, demand = 0.0;
      for (const auto& a : rep.sim->arcs) {
        carried += a.operator_volume;
        demand += a.demand;
      }
      share = demand > 0.0 ? carried / demand : kNaN;
    }
    row = {ok ? rep.solution.expected_profit : kNaN, rep.evaluated_profit, rep.kkt, rep.ap_objective,
           rep.sim ? rep.sim->profit : kNaN, share};
    for (std::size_t a : priced) row.push_back(ok ? rep.solution.price[a] : kNaN);
    for (std::size_t s = 0; s < in.num_services(); ++s)
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k)
        row.push_back(ok ? static_cast<double>(rep.solution.frequency[s][k]) : kNaN);
  }

  Json summary;
  summary["model"] = f.model;
  summary["method"] = f.method;
  summary["replications"] = f.replications;
  summary["draws"] = stochastic ? f.draws : 1;
  summary["metrics"] = Json::object();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> col;
    for (const auto& row : table) col.push_back(row[c]);
    const Stats s = summarize(col);
    if (s.count) summary["metrics"][columns[c]] = {{"min", s.min}, {"avg", s.avg}, {"max", s.max}, {"n", s.count}};
  }

  auto write_results = [&](std::ostream& os) {
    os << "replication,seed,status";
    for (const auto& c : columns) os << ',' << c;
    os << '\n';
    for (std::size_t r = 0; r < reps_n; ++r) {
      os << r << ',' << reps[r].seed << ',' << (reps[r].error.empty() ? to_string(reps[r].solution.status) : "error");
      for (double v : table[r]) os << ',' << fmt(v);
      os << '\n';
    }
  };

  if (f.out.empty()) {
    write_results(out);
  } else {
    const fs::path dir(f.out);
    fs::create_directories(dir);
    {
      std::ofstream os(dir / "results.csv");
      write_results(os);
    }
    write_json_file(dir / "summary.json", summary);
    {
      std::ofstream os(dir / "timings.csv");
      os << "replication,wall_time,nodes,iterations\n";
      for (const auto& rep : reps)
        os << rep.index << ',' << fmt(rep.solution.wall_time) << ',' << rep.solution.nodes << ',' << rep.iterations
           << '\n';
    }
    for (const auto& rep : reps) {
      if (!rep.error.empty() || rep.solution.frequency.empty()) continue;
      Json sj = solution_to_json(rep.solution, in);
      sj.erase("wall_time");
      sj["seed"] = rep.seed;
      sj["evaluated_profit"] = std::isnan(rep.evaluated_profit) ? Json(nullptr) : Json(rep.evaluated_profit);
      write_json_file(dir / ("solution_" + std::to_string(rep.index) + ".json"), sj);
      if (rep.sim) {
        std::ofstream os(dir / ("simulation_" + std::to_string(rep.index) + ".csv"));
        write_simulation_csv(*rep.sim, os);
        write_json_file(dir / ("simulation_" + std::to_string(rep.index) + ".json"), simulation_to_json(*rep.sim));
      }
    }
    Json manifest;
    manifest["tool"] = "cdsndp";
    manifest["version"] = kVersion;
    manifest["command"] = "solve";
    manifest["argv"] = argv;
    manifest["instance"] = {{"path", f.instance}, {"hash", file_hash(f.instance)}};
    manifest["flags"] = {{"model", f.model},
                         {"method", f.method},
                         {"draws", f.draws},
                         {"seed", f.seed},
                         {"replications", f.replications},
                         {"time_limit", f.time_limit},
                         {"gap", f.gap},
                         {"backend", f.backend},
                         {"vot", l.vot ? Json(*l.vot) : Json(nullptr)},
                         {"price_grid", f.price_grid},
                         {"freq_grid", f.freq_grid},
                         {"init_price", f.init_price},
                         {"init_freq", f.init_freq},
                         {"literal_ap", f.literal_ap},
                         {"capacity_check", !f.no_capacity_check},
                         {"simulate", simulate},
                         {"shippers", f.shippers}};
    Json seeds = Json::array();
    for (const auto& rep : reps) seeds.push_back(rep.seed);
    manifest["seeds"] = seeds;
    manifest["seed_rule"] = "seed_r = seed + r; the simulation of replication r uses seed_r";
    manifest["utility"] = utility_to_json(m.spec);
    if (simulate) manifest["true_utility"] = utility_to_json(*true_spec);
    manifest["versions"] = {{"cdsndp", kVersion},
                            {"compiler", __VERSION__},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION}};
    write_json_file(dir / "manifest.json", manifest);
    out << summary.dump(2) << '\n';
  }
  return exit_code_for(reps);
}

struct SweepFlags {
  std::string scenario = "toy-uncap";
  std::string strategy = "all";
  double lo = 0.0, hi = 20.0, step = 0.25;
  std::string out;
};

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  if (!(f.step > 0.0) || f.hi < f.lo) throw InputError("sweep needs lo <= hi and step > 0");
  const bool cap = f.scenario == "toy-cap";
  std::vector<Strategy> strategies;
  if (f.strategy == "all")
    strategies = {Strategy::A, Strategy::B, Strategy::C};
  else
    strategies = {strategy_from_string(f.strategy)};
  std::ofstream file;
  if (!f.out.empty()) {
    file.open(f.out);
    if (!file) throw InputError("cannot write " + f.out);
  }
  std::ostream& os = f.out.empty() ? out : file;
  const bool labelled = strategies.size() > 1;
  os << (labelled ? "strategy," : "") << "price,profit,profit_S1,profit_S2\n";
  for (Strategy s : strategies) {
    const auto sc = toy_scenario(s, cap);
    const auto rows = sweep(sc, f.lo, f.hi, f.step);
    const char name = "ABC"[static_cast<int>(s)];
    for (const auto& r : rows) {
      if (labelled) os << name << ',';
      os << fmt(r.price) << ',' << fmt(r.profit.total) << ','
         << fmt(r.profit.per_shipper.size() > 0 ? r.profit.per_shipper[0] : kNaN) << ','
         << fmt(r.profit.per_shipper.size() > 1 ? r.profit.per_shipper[1] : kNaN) << '\n';
    }
    const double best = argmax_price(rows);
    err << "strategy " << name << ": argmax price " << fmt(best);
    if (illustrative_profit(f.lo, sc).total < 0.0 && illustrative_profit(best, sc).total > 0.0)
      err << ", break-even " << fmt(break_even_price(sc, f.lo, best));
    err << '\n';
  }
  return kExitOk;
}

struct GenerateFlags {
  std::string corridor;
  std::string model = "weighted_logit_mixture";
  std::optional<double> vot;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out, std::ostream& err) {
  const auto ods = load_corridor(f.corridor);
  if (!f.vot) throw InputError("generate needs --vot");
  UtilitySpec spec;
  if (f.model == "weighted_logit_mixture") spec = UtilitySpec::weighted_logit_mixture(*f.vot);
  else if (f.model == "mixed_logit") spec = UtilitySpec::mixed_logit(*f.vot);
  else if (f.model == "mnl") spec = UtilitySpec::mnl(*f.vot, true);
  else throw InputError("unknown generating model '" + f.model + "'");
  const auto data = generate_choice_data(ods, spec, f.seed);
  if (f.out.empty()) {
    write_choice_dataset_csv(data, out);
  } else {
    std::ofstream os(f.out);
    if (!os) throw InputError("cannot write " + f.out);
    write_choice_dataset_csv(data, os);
  }
  err << data.rows.size() << " choice rows for " << data.ods.size() << " ODs\n";
  return kExitOk;
}

struct OracleFlags : CommonModelFlags {
  double grid_step = 1.0;
  std::size_t max_combinations = 10'000'000;
  bool strict_capacity = false;
  std::string out;
};

int cmd_oracle(const OracleFlags& f, std::ostream& out, std::ostream& err) {
  const Loaded l = load(f);
  const ModelSetup m = setup_model(f.model, l.file.instance, l.vot);
  const Sample sample = sample_for(m.instance, m.spec, f.draws, f.seed);
  OracleOptions opt;
  opt.grid_step = f.grid_step;
  opt.max_combinations = f.max_combinations;
  opt.strict_capacity = f.strict_capacity;
  const OracleResult res = brute_force_bilevel(m.instance, m.spec, sample, opt);
  Json j = solution_to_json(res.solution, m.instance);
  j["frequency_plans"] = res.frequency_plans;
  j["combinations"] = res.combinations;
  j["capacity_clipped"] = res.capacity_clipped;
  if (res.capacity_clipped) err << "note: the returned decision needed capacity clipping\n";
  if (f.out.empty())
    out << j.dump(2) << '\n';
  else
    write_json_file(f.out, j);
  return res.solution.status == MilpStatus::Infeasible ? kExitInfeasible : kExitOk;
}

struct ExportFlags : CommonModelFlags {
  std::string out;
};

int cmd_export(const ExportFlags& f, std::ostream& out, std::ostream& err) {
  const Loaded l = load(f);
  const ModelSetup m = setup_model(f.model, l.file.instance, l.vot);
  const CdMilp milp = m.spec.is_random() ? build_saa_milp(m.instance, m.spec, sample_for(m.instance, m.spec, f.draws, f.seed))
                                         : build_deterministic_milp(m.instance, m.spec);
  const std::string text = milp.model.to_lp_format();
  if (f.out.empty()) {
    out << text;
  } else {
    std::ofstream os(f.out);
    if (!os) throw InputError("cannot write " + f.out);
    os << text;
  }
  err << milp.model.num_variables() << " variables, " << milp.model.num_constraints() << " constraints\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Choice-driven service network design and pricing"};
  app.set_version_flag("--version", std::string("cdsndp ") + kVersion);
  app.require_subcommand(1);

  SolveFlags solve_f;
  auto* solve_cmd = app.add_subcommand("solve", "solve an instance, simulate out of sample, write run artifacts");
  add_model_flags(solve_cmd, solve_f);
  solve_cmd->add_option("--method", solve_f.method, "exact | heuristic")->check(CLI::IsMember({"exact", "heuristic"}));
  solve_cmd->add_flag("--heuristic", [&](std::int64_t) { solve_f.method = "heuristic"; }, "same as --method heuristic");
  solve_cmd->add_option("--replications", solve_f.replications, "replication r uses seed + r");
  solve_cmd->add_option("--time-limit", solve_f.time_limit, "seconds per MILP solve");
  solve_cmd->add_option("--gap", solve_f.gap, "relative MIP gap");
  solve_cmd->add_option("--backend", solve_f.backend, "builtin | highs")->check(CLI::IsMember({"builtin", "highs"}));
  solve_cmd->add_option("--price-grid", solve_f.price_grid, "heuristic price grid lo:hi:step");
  solve_cmd->add_option("--freq-grid", solve_f.freq_grid, "heuristic frequency grid lo:hi:step");
  solve_cmd->add_option("--init-price", solve_f.init_price, "heuristic start prices, one value or one per arc");
  solve_cmd->add_option("--init-freq", solve_f.init_freq, "heuristic start frequencies, one value or one per arc");
  solve_cmd->add_flag("--literal-ap", solve_f.literal_ap, "heuristic AP with per-realization flows");
  solve_cmd->add_flag("--no-capacity-check", solve_f.no_capacity_check, "simulation ignores service capacity");
  solve_cmd->add_flag("--no-simulate", solve_f.no_simulate, "skip the out-of-sample simulation");
  solve_cmd->add_option("--shippers", solve_f.shippers, "simulated shippers per arc")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", solve_f.out, "directory for results.csv, summary.json, manifest.json");
  solve_cmd->add_option("--jobs", solve_f.jobs, "replications run concurrently")->check(CLI::PositiveNumber);

  SweepFlags sweep_f;
  auto* sweep_cmd = app.add_subcommand("sweep", "profit curves of the two-shipper pricing example");
  sweep_cmd->add_option("--scenario", sweep_f.scenario)->check(CLI::IsMember({"toy-uncap", "toy-cap"}));
  sweep_cmd->add_option("--strategy", sweep_f.strategy, "A | B | C | all")->check(CLI::IsMember({"A", "B", "C", "all"}));
  sweep_cmd->add_option("--lo", sweep_f.lo);
  sweep_cmd->add_option("--hi", sweep_f.hi);
  sweep_cmd->add_option("--step", sweep_f.step);
  sweep_cmd->add_option("--out", sweep_f.out, "CSV file (default stdout)");

  GenerateFlags gen_f;
  auto* gen_cmd = app.add_subcommand("generate", "synthetic choice observations for a corridor");
  gen_cmd->add_option("corridor", gen_f.corridor, "corridor JSON file")->required();
  gen_cmd->add_option("--model", gen_f.model, "weighted_logit_mixture | mixed_logit | mnl");
  gen_cmd->add_option("--vot", gen_f.vot, "value of time, k EUR/TEU/h");
  gen_cmd->add_option("--seed", gen_f.seed);
  gen_cmd->add_option("--out", gen_f.out, "CSV file (default stdout)");

  OracleFlags oracle_f;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force bilevel optimum of a small instance");
  add_model_flags(oracle_cmd, oracle_f);
  oracle_cmd->add_option("--grid-step", oracle_f.grid_step, "price grid step, EUR/TEU")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--max-combinations", oracle_f.max_combinations);
  oracle_cmd->add_flag("--strict-capacity", oracle_f.strict_capacity, "discard decisions that need clipping");
  oracle_cmd->add_option("--out", oracle_f.out, "JSON file (default stdout)");

  ExportFlags export_f;
  auto* export_cmd = app.add_subcommand("export-lp", "write the single-level MILP in LP format");
  add_model_flags(export_cmd, export_f);
  export_cmd->add_option("--out", export_f.out, "LP file (default stdout)");

  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "cdsndp " << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_f, args, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_f, out, err);
    if (*gen_cmd) return cmd_generate(gen_f, out, err);
    if (*oracle_cmd) return cmd_oracle(oracle_f, out, err);
    if (*export_cmd) return cmd_export(export_f, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cdsndp::cli
