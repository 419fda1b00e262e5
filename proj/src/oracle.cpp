#include "cdsndp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "cdsndp/error.hpp"

namespace cdsndp {

namespace {

int arc_frequency(const Instance& in, std::size_t a, const std::vector<std::vector<int>>& f) {
  int total = 0;
  for (std::size_t s = 0; s < in.num_services(); ++s)
    if (in.incidence.covers(a, s))
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) total += f[s][k];
  return total;
}

}  // namespace

LowerLevelResponse lower_level_response(const Instance& in, const UtilitySpec& spec, const Sample& sample,
                                        const std::vector<double>& prices,
                                        const std::vector<std::vector<int>>& frequency, double tie_tolerance) {
  UtilityEvaluator ev(in, spec, sample);
  const std::size_t R = sample.realizations, A = in.num_arcs(), H = in.num_competitors();
  LowerLevelResponse out;
  out.operator_volume.assign(R, std::vector<double>(A, 0.0));
  out.z.assign(R, std::vector<std::vector<double>>(A, std::vector<double>(H, 0.0)));
  out.lambda.assign(R, std::vector<double>(A, 0.0));
  for (std::size_t a = 0; a < A; ++a) {
    const double D = in.demand[a];
    if (!(D > 0.0)) continue;
    const int F = arc_frequency(in, a, frequency);
    for (std::size_t r = 0; r < R; ++r) {
      const double uo = ev.operator_utility(a, prices[a], F, r);
      const auto [ub, hb] = ev.best_competitor(a, r);
      if (uo >= ub - tie_tolerance) {
        out.operator_volume[r][a] = D;
      } else {
        out.z[r][a][hb] = D;
      }
      out.lambda[r][a] = -std::max(uo, ub);
    }
  }
  return out;
}

bool route_flows(const Instance& in, const std::vector<double>& prices, const std::vector<std::vector<int>>& frequency,
                 const LowerLevelResponse& resp, const std::vector<std::vector<std::size_t>>& best_competitor,
                 Solution& out) {
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(),
                    R = resp.operator_volume.size();
  out.x.assign(R, std::vector<std::vector<std::vector<double>>>(A, std::vector<std::vector<double>>(S, std::vector<double>(K, 0.0))));
  out.z = resp.z;
  out.lambda = resp.lambda;
  if (R == 0) return false;

  std::vector<double> mean(A, 0.0), cmin(A, std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t r = 0; r < R; ++r) mean[a] += resp.operator_volume[r][a];
    mean[a] /= static_cast<double>(R);
    for (std::size_t s = 0; s < S; ++s)
      if (in.incidence.covers(a, s))
        for (std::size_t k = 0; k < K; ++k)
          if (frequency[s][k] > 0) cmin[a] = std::min(cmin[a], in.services[s].variable_cost[a][k]);
  }
  std::vector<std::size_t> order(A);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const double ml = std::isfinite(cmin[l]) ? prices[l] - cmin[l] : -std::numeric_limits<double>::infinity();
    const double mr = std::isfinite(cmin[r]) ? prices[r] - cmin[r] : -std::numeric_limits<double>::infinity();
    return ml > mr;
  });

  std::vector<std::vector<std::vector<double>>> room(S);
  for (std::size_t s = 0; s < S; ++s) {
    room[s].assign(K, std::vector<double>(in.services[s].legs.size(), 0.0));
    for (std::size_t k = 0; k < K; ++k)
      std::fill(room[s][k].begin(), room[s][k].end(), in.vehicle_types[k].capacity * frequency[s][k]);
  }

  bool clipped = false;
  for (std::size_t a : order) {
    if (!(mean[a] > 0.0)) continue;
    std::vector<std::pair<std::size_t, std::size_t>> cand;
    for (std::size_t s = 0; s < S; ++s)
      if (in.incidence.covers(a, s))
        for (std::size_t k = 0; k < K; ++k)
          if (frequency[s][k] > 0) cand.emplace_back(s, k);
    std::stable_sort(cand.begin(), cand.end(), [&](const auto& l, const auto& r) {
      return in.services[l.first].variable_cost[a][l.second] < in.services[r.first].variable_cost[a][r.second];
    });
    double need = mean[a];
    double served_share = 0.0;
    for (const auto& [s, k] : cand) {
      if (need <= 0.0) break;
      double fit = need;
      for (std::size_t l = 0; l < in.services[s].legs.size(); ++l)
        if (in.incidence.uses_leg(a, s, l)) fit = std::min(fit, room[s][k][l]);
      if (fit <= 0.0) continue;
      for (std::size_t l = 0; l < in.services[s].legs.size(); ++l)
        if (in.incidence.uses_leg(a, s, l)) room[s][k][l] -= fit;
      need -= fit;
      const double share = fit / mean[a];
      served_share += share;
      for (std::size_t r = 0; r < R; ++r) out.x[r][a][s][k] = resp.operator_volume[r][a] * share;
    }
    if (need > 1e-9 * (1.0 + mean[a])) {
      clipped = true;
      const double spill = std::max(0.0, 1.0 - served_share);
      for (std::size_t r = 0; r < R; ++r) out.z[r][a][best_competitor[r][a]] += resp.operator_volume[r][a] * spill;
    }
  }
  return clipped;
}

Solution evaluate_decision(const Instance& inst, const UtilitySpec& spec, const Sample& sample,
                           const std::vector<double>& prices, const std::vector<std::vector<int>>& frequency,
                           const std::vector<std::vector<int>>& vehicles, double tie_tolerance, bool* clipped) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  UtilityEvaluator ev(in, spec, sample);
  std::vector<std::vector<std::size_t>> hbest(sample.realizations, std::vector<std::size_t>(in.num_arcs(), 0));
  for (std::size_t r = 0; r < sample.realizations; ++r)
    for (std::size_t a = 0; a < in.num_arcs(); ++a)
      if (in.demand[a] > 0.0) hbest[r][a] = ev.best_competitor(a, r).second;
  Solution sol;
  sol.frequency = frequency;
  sol.vehicles = vehicles;
  sol.price = prices;
  auto resp = lower_level_response(in, spec, sample, prices, frequency, tie_tolerance);
  // Optimistic ties: tied demand stays with the competitor when serving it loses money.
  for (std::size_t a = 0; a < in.num_arcs(); ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    double cmin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < in.num_services(); ++s)
      if (in.incidence.covers(a, s))
        for (std::size_t k = 0; k < in.num_vehicle_types(); ++k)
          if (frequency[s][k] > 0) cmin = std::min(cmin, in.services[s].variable_cost[a][k]);
    if (prices[a] >= cmin) continue;
    const int F = arc_frequency(in, a, frequency);
    for (std::size_t r = 0; r < sample.realizations; ++r) {
      if (resp.operator_volume[r][a] == 0.0) continue;
      if (ev.operator_utility(a, prices[a], F, r) > ev.best_competitor(a, r).first + tie_tolerance) continue;
      resp.z[r][a][hbest[r][a]] += resp.operator_volume[r][a];
      resp.operator_volume[r][a] = 0.0;
    }
  }
  const bool c = route_flows(in, prices, frequency, resp, hbest, sol);
  if (clipped) *clipped = c;
  sol.expected_profit = direct_profit(in, sol);
  sol.objective = sol.expected_profit;
  sol.status = MilpStatus::Optimal;
  sol.method = "oracle";
  return sol;
}

OracleResult brute_force_bilevel(const Instance& inst, const UtilitySpec& spec, const Sample& sample,
                                 const OracleOptions& opt) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  spec.validate();
  const BigMConfig bigm = compute_big_m(in, spec, sample);
  UtilityEvaluator ev(in, spec, sample);
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(), R = sample.realizations;

  // Price grid per arc; the model's upper bound is always added so the operator can price itself out.
  std::vector<std::vector<double>> grid(A);
  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    if (!opt.explicit_grid.empty()) {
      grid[a] = opt.explicit_grid;
    } else {
      if (!(opt.grid_step > 0.0)) throw InputError("oracle grid step must be positive");
      const double hi = opt.grid_hi.value_or(bigm.price_upper[a]);
      const auto n = static_cast<std::size_t>(std::floor((hi - opt.grid_lo) / opt.grid_step + 1e-9));
      for (std::size_t i = 0; i <= n; ++i) grid[a].push_back(opt.grid_lo + static_cast<double>(i) * opt.grid_step);
    }
    grid[a].push_back(bigm.price_upper[a]);
    std::sort(grid[a].begin(), grid[a].end());
    grid[a].erase(std::unique(grid[a].begin(), grid[a].end()), grid[a].end());
  }

  std::vector<std::vector<std::size_t>> hbest(R, std::vector<std::size_t>(A, 0));
  std::vector<std::vector<double>> ubest(R, std::vector<double>(A, 0.0));
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t a = 0; a < A; ++a)
      if (in.demand[a] > 0.0) std::tie(ubest[r][a], hbest[r][a]) = ev.best_competitor(a, r);

  OracleResult best;
  double best_profit = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> freq(S, std::vector<int>(K, 0)), veh(S, std::vector<int>(K, 0));
  std::vector<int> used(K, 0);
  std::size_t plans = 0, combos = 0;

  auto evaluate_plan = [&]() {
    ++plans;
    if (plans > opt.max_combinations) throw InputError("oracle search space exceeds max_combinations");
    double fixed = 0.0;
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) fixed += in.services[s].fixed_cost[k] * freq[s][k];

    // Candidate prices per arc: the highest grid price for each set of served realizations.
    struct Cand {
      double price;
      double value;  // expected margin if routed to the cheapest service
    };
    std::vector<std::vector<Cand>> cands(A);
    std::vector<double> prices(A, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < A; ++a) {
      if (!(in.demand[a] > 0.0)) continue;
      const int F = arc_frequency(in, a, freq);
      double cmin = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < S; ++s)
        if (in.incidence.covers(a, s))
          for (std::size_t k = 0; k < K; ++k)
            if (freq[s][k] > 0) cmin = std::min(cmin, in.services[s].variable_cost[a][k]);
      std::vector<double> by_count(R + 1, std::numeric_limits<double>::quiet_NaN());
      for (double p : grid[a]) {
        std::size_t served = 0;
        for (std::size_t r = 0; r < R; ++r)
          if (ev.operator_utility(a, p, F, r) >= ubest[r][a]) ++served;
        by_count[served] = p;  // grid ascending: keeps the highest price
      }
      for (std::size_t c = 0; c <= R; ++c) {
        if (std::isnan(by_count[c])) continue;
        const double share = static_cast<double>(c) / static_cast<double>(R);
        double value = 0.0;
        if (c > 0) {
          if (!std::isfinite(cmin)) {
            if (opt.strict_capacity) continue;  // nobody can carry it
          } else {
            value = share * in.demand[a] * (by_count[c] - cmin);
          }
        }
        cands[a].push_back({by_count[c], value});
      }
      if (cands[a].empty()) return;  // cannot happen: the price-out candidate always exists
    }

    auto try_prices = [&](const std::vector<double>& p) {
      ++combos;
      Solution sol;
      sol.frequency = freq;
      sol.vehicles = veh;
      sol.price = p;
      const LowerLevelResponse resp = lower_level_response(in, spec, sample, p, freq);
      const bool clipped = route_flows(in, p, freq, resp, hbest, sol);
      if (clipped && opt.strict_capacity) return;
      const double profit = direct_profit(in, sol);
      if (profit > best_profit + 1e-9) {
        best_profit = profit;
        sol.expected_profit = profit;
        best.solution = std::move(sol);
        best.capacity_clipped = clipped;
      }
    };

    // Capacity-free optimum first; it is exact whenever it fits.
    for (std::size_t a = 0; a < A; ++a) {
      if (cands[a].empty()) continue;
      const auto it = std::max_element(cands[a].begin(), cands[a].end(),
                                       [](const Cand& l, const Cand& r) { return l.value < r.value; });
      prices[a] = it->price;
    }
    double separable = -fixed;
    for (std::size_t a = 0; a < A; ++a)
      for (const auto& c : cands[a])
        if (c.price == prices[a]) separable += c.value;
    if (separable <= best_profit + 1e-9) return;  // capacity can only lower it
    Solution probe;
    const LowerLevelResponse resp = lower_level_response(in, spec, sample, prices, freq);
    if (!route_flows(in, prices, freq, resp, hbest, probe)) {
      try_prices(prices);
      return;
    }
    // Capacity binds: enumerate the candidate product.
    std::size_t product = 1;
    for (std::size_t a = 0; a < A; ++a)
      if (!cands[a].empty()) product *= cands[a].size();
    if (combos + product > opt.max_combinations) throw InputError("oracle search space exceeds max_combinations");
    std::vector<double> p = prices;
    std::function<void(std::size_t)> rec = [&](std::size_t a) {
      if (a == A) {
        try_prices(p);
        return;
      }
      if (cands[a].empty()) {
        rec(a + 1);
        return;
      }
      for (const auto& c : cands[a]) {
        p[a] = c.price;
        rec(a + 1);
      }
    };
    rec(0);
  };

  std::function<void(std::size_t)> enumerate = [&](std::size_t idx) {
    if (idx == S * K) {
      evaluate_plan();
      return;
    }
    const std::size_t s = idx / K, k = idx % K;
    const auto& vt = in.vehicle_types[k];
    const int w = max_cycles(in.services[s], k, vt);
    const int cap = std::min(in.max_frequency, w * vt.count);
    for (int f = 0; f <= cap; ++f) {
      const int v = f == 0 ? 0 : (f + w - 1) / w;
      if (used[k] + v > vt.count) break;
      used[k] += v;
      freq[s][k] = f;
      veh[s][k] = v;
      enumerate(idx + 1);
      used[k] -= v;
    }
    freq[s][k] = 0;
    veh[s][k] = 0;
  };
  enumerate(0);

  best.frequency_plans = plans;
  best.combinations = combos;
  best.solution.status = MilpStatus::Optimal;
  best.solution.method = "oracle";
  best.solution.backend = "enumeration";
  for (std::size_t a = 0; a < A; ++a)
    if (!(in.demand[a] > 0.0)) best.solution.price[a] = std::numeric_limits<double>::quiet_NaN();
  return best;
}

}  // namespace cdsndp
