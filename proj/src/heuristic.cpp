#include "cdsndp/heuristic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "cdsndp/error.hpp"
#include "cdsndp/oracle.hpp"

namespace cdsndp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int frequency_cap(const Instance& in, std::size_t s, std::size_t k) {
  const int w = max_cycles(in.services[s], k, in.vehicle_types[k]);
  return std::min(in.max_frequency, w * in.vehicle_types[k].count);
}

}  // namespace

std::vector<std::optional<OdCostEstimate>> estimate_od_costs(const Instance& inst) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  std::vector<std::optional<OdCostEstimate>> out(in.num_arcs());
  for (std::size_t a = 0; a < in.num_arcs(); ++a) {
    for (std::size_t s = 0; s < in.num_services(); ++s) {
      const auto& sv = in.services[s];
      if (sv.legs.size() != 2 || !in.incidence.covers(a, s) || in.num_vehicle_types() == 0) continue;
      double fix = std::numeric_limits<double>::infinity(), var = fix;
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) {
        fix = std::min(fix, sv.fixed_cost[k] / 2.0);
        var = std::min(var, sv.variable_cost[a][k]);
      }
      if (!out[a]) out[a] = OdCostEstimate{};
      out[a]->fixed += fix;
      out[a]->variable += var;
    }
  }
  return out;
}

PriceGrid PriceGrid::range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InputError("price grid needs lo <= hi and a positive step");
  PriceGrid g;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.values.push_back(lo + static_cast<double>(i) * step);
  return g;
}

FreqGrid FreqGrid::range(int lo, int hi, int step) {
  if (step <= 0 || hi < lo) throw InputError("frequency grid needs lo <= hi and a positive step");
  FreqGrid g;
  for (int v = lo; v <= hi; v += step) g.values.push_back(v);
  return g;
}

HeuristicGrids default_grids(const Instance& inst) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  double top = 0.0;
  for (double c : in.price_cap) top = std::max(top, c);
  return {PriceGrid::range(0.0, std::min(500.0, std::floor(top)), 1.0), FreqGrid::range(0, kMaxGridFrequency)};
}

void validate_grids(const Instance& in, const HeuristicGrids& g) {
  const auto& P = g.prices.values;
  const auto& F = g.frequencies.values;
  if (P.empty()) throw InputError("price grid is empty");
  if (F.empty()) throw InputError("frequency grid is empty");
  double top = 0.0;
  for (double c : in.price_cap) top = std::max(top, c);
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (!std::isfinite(P[i]) || P[i] < 0.0) throw InputError("grid prices must be finite and non-negative");
    if (P[i] > top) throw InputError("grid price exceeds every arc's price cap");
    if (i > 0 && !(P[i] > P[i - 1])) throw InputError("price grid must be strictly increasing");
  }
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i] < 0 || F[i] > kMaxGridFrequency) throw InputError("grid frequencies must lie in [0, 35]");
    if (i > 0 && F[i] <= F[i - 1]) throw InputError("frequency grid must be strictly increasing");
  }
}

std::optional<std::size_t> PrecomputedTables::price_index(double price) const {
  const auto& P = grids.prices.values;
  const auto it = std::lower_bound(P.begin(), P.end(), price);
  if (it == P.end() || *it != price) return std::nullopt;
  return static_cast<std::size_t>(it - P.begin());
}

std::optional<std::size_t> PrecomputedTables::freq_index(int psi) const {
  const auto& F = grids.frequencies.values;
  const auto it = std::lower_bound(F.begin(), F.end(), psi);
  if (it == F.end() || *it != psi) return std::nullopt;
  return static_cast<std::size_t>(it - F.begin());
}

PrecomputedTables precompute(const Instance& inst, const UtilitySpec& spec, const Sample& sample,
                             const HeuristicGrids& grids) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  spec.validate();
  validate_grids(in, grids);
  if (sample.realizations == 0) throw InputError("empty sample");
  UtilityEvaluator ev(in, spec, sample);
  const std::size_t A = in.num_arcs(), R = sample.realizations;
  PrecomputedTables t;
  t.grids = grids;
  t.num_freqs = grids.frequencies.values.size();
  t.num_prices = grids.prices.values.size();
  t.costs = estimate_od_costs(in);
  t.demand.assign(A * t.num_freqs * t.num_prices, 0.0);
  t.profit.assign(t.demand.size(), 0.0);
  t.best_price.assign(A, std::vector<double>(t.num_freqs, grids.prices.values.front()));
  t.best_competitor_utility.assign(A, std::vector<double>(R, -std::numeric_limits<double>::infinity()));
  t.best_competitor.assign(A, std::vector<std::size_t>(R, in.num_competitors()));
  t.skipped.assign(A, 0);

  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    for (std::size_t r = 0; r < R; ++r)
      std::tie(t.best_competitor_utility[a][r], t.best_competitor[a][r]) = ev.best_competitor(a, r);
  }
  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    if (!t.costs[a]) {
      t.skipped[a] = 1;
      continue;
    }
    const double share = in.demand[a] / static_cast<double>(R);
    const auto& up = t.best_competitor_utility[a];
    const auto& P = grids.prices.values;
    std::vector<std::size_t> accepting(t.num_prices + 1);
    for (std::size_t fi = 0; fi < t.num_freqs; ++fi) {
      const double psi = grids.frequencies.values[fi];
      // Utility falls with price, so realization r takes the operator on a prefix of the sorted grid.
      std::fill(accepting.begin(), accepting.end(), 0);
      for (std::size_t r = 0; r < R; ++r) {
        const auto end = std::partition_point(P.begin(), P.end(), [&](double p) {
          return ev.operator_utility(a, p, psi, r) >= up[r];
        });
        ++accepting[static_cast<std::size_t>(end - P.begin())];
      }
      std::size_t taking = R - accepting[0];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t pi = 0; pi < t.num_prices; ++pi) {
        const double p = P[pi];
        if (pi > 0) taking -= accepting[pi];
        const double d = share * static_cast<double>(taking);
        const double profit = p * d - psi * t.costs[a]->fixed - d * t.costs[a]->variable;
        t.demand[t.at(a, fi, pi)] = d;
        t.profit[t.at(a, fi, pi)] = profit;
        if (profit > best) {  // ties keep the lowest price
          best = profit;
          t.best_price[a][fi] = p;
        }
      }
    }
  }
  return t;
}

ApModel build_auxiliary_problem(const Instance& inst, std::size_t R, const std::vector<double>& prices,
                                const PrecomputedTables& t, bool aggregated) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs();
  if (R == 0) throw InputError("empty sample");
  if (prices.size() != A) throw InputError("one fixed price per arc is required");
  std::vector<std::size_t> pidx(A, 0);
  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    const auto i = t.price_index(prices[a]);
    if (!i) throw InputError("fixed price on " + in.arc_name(a) + " is not on the price grid");
    pidx[a] = *i;
  }

  ApModel ap;
  ap.aggregated = aggregated;
  ap.realizations = R;
  MilpModel& m = ap.model;
  ApIndex& ix = ap.index;
  m.set_sense(ObjectiveSense::Maximize);
  std::vector<double> start;
  auto var = [&](std::string name, double lo, double hi, VarKind kind, double init) {
    start.push_back(init);
    return m.add_variable(std::move(name), lo, hi, kind, kind == VarKind::Continuous ? 0 : 1);
  };
  const double inv_r = 1.0 / static_cast<double>(R);

  ix.v.assign(S, std::vector<int>(K, -1));
  ix.f = ix.v;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k) {
      const auto& vt = in.vehicle_types[k];
      const std::string tag = in.services[s].id + "_" + vt.id;
      ix.v[s][k] = var("v_" + tag, 0, vt.count, VarKind::Integer, 0);
      ix.f[s][k] = var("f_" + tag, 0, frequency_cap(in, s, k), VarKind::Integer, 0);
      m.add_objective(ix.f[s][k], -in.services[s].fixed_cost[k]);
      m.add_constraint("cycle_" + tag,
                       {{ix.f[s][k], 1.0}, {ix.v[s][k], -static_cast<double>(max_cycles(in.services[s], k, vt))}},
                       Sense::LessEqual, 0.0);
    }
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<LinearTerm> terms;
    for (std::size_t s = 0; s < S; ++s) terms.push_back({ix.v[s][k], 1.0});
    m.add_constraint("fleet_" + in.vehicle_types[k].id, terms, Sense::LessEqual, in.vehicle_types[k].count);
  }

  // Frequency selectors and the demand bound from the tables.
  const auto& F = t.grids.frequencies.values;
  const auto zero = t.freq_index(0);
  ix.g.assign(A, std::vector<int>(F.size(), -1));
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<LinearTerm> pick, link;
    for (std::size_t s = 0; s < S; ++s)
      if (in.incidence.covers(a, s))
        for (std::size_t k = 0; k < K; ++k) link.push_back({ix.f[s][k], 1.0});
    for (std::size_t fi = 0; fi < F.size(); ++fi) {
      const int g = var("g_" + in.arc_name(a) + "_" + std::to_string(F[fi]), 0, 1, VarKind::Binary,
                        zero && *zero == fi ? 1.0 : 0.0);
      ix.g[a][fi] = g;
      pick.push_back({g, 1.0});
      link.push_back({g, -static_cast<double>(F[fi])});
    }
    m.add_constraint("onefreq_" + in.arc_name(a), pick, Sense::LessEqual, 1.0);
    m.add_constraint("freqlink_" + in.arc_name(a), link, Sense::Equal, 0.0);
  }

  const std::size_t RX = aggregated ? 1 : R;
  ix.x.assign(RX, std::vector<std::vector<std::vector<int>>>(A, std::vector<std::vector<int>>(S, std::vector<int>(K, -1))));
  if (!aggregated) ix.z.assign(R, std::vector<int>(A, -1));
  const double weight = aggregated ? 1.0 : inv_r;
  for (std::size_t a = 0; a < A; ++a) {
    const double D = in.demand[a];
    if (!(D > 0.0)) continue;
    std::vector<LinearTerm> mean_flow;
    for (std::size_t r = 0; r < RX; ++r) {
      std::vector<LinearTerm> dem;
      const std::string tag = in.arc_name(a) + (aggregated ? std::string() : "_r" + std::to_string(r));
      for (std::size_t s = 0; s < S; ++s) {
        if (!in.incidence.covers(a, s)) continue;
        int legs = 0;
        for (std::size_t l = 0; l < in.services[s].legs.size(); ++l) legs += in.incidence.uses_leg(a, s, l);
        for (std::size_t k = 0; k < K; ++k) {
          const int x = var("x_" + tag + "_" + in.services[s].id + "_" + in.vehicle_types[k].id, 0, legs * D,
                            VarKind::Continuous, 0);
          ix.x[r][a][s][k] = x;
          m.add_objective(x, weight * (prices[a] - in.services[s].variable_cost[a][k]));
          dem.push_back({x, 1.0});
          mean_flow.push_back({x, weight});
        }
      }
      if (aggregated) {
        if (!dem.empty()) m.add_constraint("demand_" + tag, dem, Sense::LessEqual, D);
      } else {
        const int z = var("z_" + tag, 0, D, VarKind::Continuous, D);
        ix.z[r][a] = z;
        dem.push_back({z, 1.0});
        m.add_constraint("demand_" + tag, dem, Sense::Equal, D);
      }
    }
    if (mean_flow.empty()) continue;
    for (std::size_t fi = 0; fi < F.size(); ++fi) mean_flow.push_back({ix.g[a][fi], -t.d(a, fi, pidx[a])});
    m.add_constraint("dembound_" + in.arc_name(a), mean_flow, Sense::LessEqual, 0.0);
  }

  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < in.services[s].legs.size(); ++l) {
        std::vector<LinearTerm> terms;
        for (std::size_t r = 0; r < RX; ++r)
          for (std::size_t a = 0; a < A; ++a)
            if (ix.x[r][a][s][k] >= 0 && in.incidence.uses_leg(a, s, l)) terms.push_back({ix.x[r][a][s][k], weight});
        if (terms.empty()) continue;
        terms.push_back({ix.f[s][k], -in.vehicle_types[k].capacity});
        m.add_constraint("cap_" + in.services[s].id + "_" + in.vehicle_types[k].id + "_l" + std::to_string(l), terms,
                         Sense::LessEqual, 0.0);
      }
  if (zero) m.set_start(std::move(start));
  m.check();
  return ap;
}

namespace {

std::vector<double> initial_prices(const Instance& in, const PrecomputedTables& t, const HeuristicInit& init) {
  const auto& P = t.grids.prices.values;
  std::vector<double> p(in.num_arcs(), P.front());
  if (init.prices) {
    if (init.prices->size() != in.num_arcs()) throw InputError("initial prices need one value per arc");
    for (std::size_t a = 0; a < in.num_arcs(); ++a) {
      if (!(in.demand[a] > 0.0)) continue;
      if (!t.price_index((*init.prices)[a])) throw InputError("initial price on " + in.arc_name(a) + " is not on the grid");
      p[a] = (*init.prices)[a];
    }
    return p;
  }
  for (std::size_t a = 0; a < in.num_arcs(); ++a) {
    std::optional<double> ref;
    for (const auto& c : in.competitors)
      if (c.mode == Mode::Iwt && c.available(a)) ref = ref ? std::min(*ref, c.per_arc[a]->price) : c.per_arc[a]->price;
    if (!ref) continue;
    double best = P.front();
    for (double v : P)
      if (std::abs(v - *ref) < std::abs(best - *ref)) best = v;
    p[a] = best;
  }
  return p;
}

std::vector<int> initial_freqs(const Instance& in, const PrecomputedTables& t, const HeuristicInit& init) {
  if (init.frequencies) {
    if (init.frequencies->size() != in.num_arcs()) throw InputError("initial frequencies need one value per arc");
    for (int v : *init.frequencies)
      if (!t.freq_index(v)) throw InputError("initial frequency is not on the grid");
    return *init.frequencies;
  }
  return std::vector<int>(in.num_arcs(), t.grids.frequencies.values.front());
}

}  // namespace

HeuristicResult run_heuristic(const Instance& inst, const UtilitySpec& spec, const Sample& sample,
                              const HeuristicGrids& grids, const HeuristicInit& init, MilpBackend& backend,
                              const HeuristicOptions& opt) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  const auto t0 = Clock::now();
  const PrecomputedTables tables = precompute(in, spec, sample, grids);
  const double pre = seconds_since(t0);
  HeuristicResult res = run_heuristic(in, spec, sample, tables, init, backend, opt);
  res.precompute_seconds = pre;
  res.solution.wall_time += pre;
  return res;
}

HeuristicResult run_heuristic(const Instance& inst, const UtilitySpec& spec, const Sample& sample,
                              const PrecomputedTables& t, const HeuristicInit& init, MilpBackend& backend,
                              const HeuristicOptions& opt) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(), R = sample.realizations;
  const auto t0 = Clock::now();
  HeuristicResult res;
  res.skipped_arcs = t.skipped;

  std::vector<double> p = initial_prices(in, t, init);
  std::vector<int> psi = initial_freqs(in, t, init);
  // Prices of arcs without demand are irrelevant; mask them so revisits compare only what matters.
  auto key = [&](const std::vector<double>& pr, const std::vector<int>& fr) {
    std::vector<double> k;
    for (std::size_t a = 0; a < A; ++a) {
      k.push_back(in.demand[a] > 0.0 ? pr[a] : 0.0);
      k.push_back(fr[a]);
    }
    return k;
  };
  std::set<std::vector<double>> visited{key(p, psi)};
  std::vector<MilpResult> raw;
  std::vector<ApModel> models;

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    ApModel ap = build_auxiliary_problem(in, R, p, t, opt.aggregated);
    MilpResult r = backend.solve(ap.model, opt.ap_limits);
    if (!r.has_solution()) throw SolverError("auxiliary problem returned no solution: " + to_string(r.status));

    HeuristicIteration rec;
    rec.prices = p;
    rec.ap_objective = r.objective;
    rec.frequency.assign(S, std::vector<int>(K, 0));
    rec.vehicles = rec.frequency;
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) {
        rec.frequency[s][k] = static_cast<int>(std::lround(r.values[ap.index.f[s][k]]));
        rec.vehicles[s][k] = static_cast<int>(std::lround(r.values[ap.index.v[s][k]]));
      }
    rec.psi.assign(A, 0);
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t fi = 0; fi < t.num_freqs; ++fi)
        if (r.values[ap.index.g[a][fi]] > 0.5) rec.psi[a] = t.grids.frequencies.values[fi];
    if (r.objective > best + 1e-9) {
      best = r.objective;
      res.best_iteration = res.iterations.size();
      raw.clear();
      models.clear();
      raw.push_back(r);
      models.push_back(std::move(ap));
    }
    res.iterations.push_back(rec);

    // Next pair: chosen frequencies and their best prices.
    std::vector<double> np = p;
    for (std::size_t a = 0; a < A; ++a) {
      if (!(in.demand[a] > 0.0)) continue;
      if (const auto fi = t.freq_index(rec.psi[a])) np[a] = t.best_price[a][*fi];
    }
    p = np;
    psi = rec.psi;
    if (!visited.insert(key(p, psi)).second) break;
  }

  // Decode the best visited AP solution.
  const HeuristicIteration& b = res.iterations[res.best_iteration];
  const ApModel& ap = models.front();
  const MilpResult& r = raw.front();
  Solution& sol = res.solution;
  sol.method = "heuristic";
  sol.backend = backend.name();
  sol.status = r.status;
  sol.frequency = b.frequency;
  sol.vehicles = b.vehicles;
  sol.price = b.prices;
  for (std::size_t a = 0; a < A; ++a)
    if (!(in.demand[a] > 0.0)) sol.price[a] = std::numeric_limits<double>::quiet_NaN();
  sol.x.assign(R, std::vector<std::vector<std::vector<double>>>(A, std::vector<std::vector<double>>(S, std::vector<double>(K, 0.0))));
  sol.z.assign(R, std::vector<std::vector<double>>(A, std::vector<double>(in.num_competitors(), 0.0)));
  sol.lambda.assign(R, std::vector<double>(A, 0.0));
  for (std::size_t rr = 0; rr < R; ++rr)
    for (std::size_t a = 0; a < A; ++a) {
      if (!(in.demand[a] > 0.0)) continue;
      double served = 0.0;
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k) {
          const int v = ap.index.x[ap.aggregated ? 0 : rr][a][s][k];
          if (v < 0) continue;
          const double q = std::max(0.0, r.values[v]);
          sol.x[rr][a][s][k] = q;
          served += q;
        }
      const std::size_t h = t.best_competitor[a][rr];
      if (h < in.num_competitors()) sol.z[rr][a][h] = std::max(0.0, in.demand[a] - served);
      sol.lambda[rr][a] = -t.best_competitor_utility[a][rr];
    }
  sol.objective = r.objective;
  sol.best_bound = r.best_bound;
  sol.gap = r.gap;
  sol.nodes = r.nodes;
  sol.expected_profit = direct_profit(in, sol);
  res.ap_objective = r.objective;
  res.ap_seconds = seconds_since(t0);
  sol.wall_time = res.ap_seconds;

  bool clipped = false;
  res.evaluated_profit =
      evaluate_decision(in, spec, sample, b.prices, b.frequency, b.vehicles, 1e-9, &clipped).expected_profit;
  res.evaluation_clipped = clipped;
  return res;
}

}  // namespace cdsndp
