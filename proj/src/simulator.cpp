#include "cdsndp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "cdsndp/error.hpp"

namespace cdsndp {

namespace {

struct Shipper {
  std::size_t arc;
  std::size_t rank_start;  ///< offset into the ranking buffer
};

}  // namespace

SimulationReport simulate_population(const Solution& sol, const Instance& inst, const UtilitySpec& spec,
                                     const SimulationOptions& opt) {
  const Instance in = inst.validated ? inst : validate_instance(inst);
  spec.validate();
  if (opt.shippers_per_arc == 0) throw InputError("population size must be at least 1");
  const std::size_t S = in.num_services(), K = in.num_vehicle_types(), A = in.num_arcs(), H = in.num_competitors();
  if (sol.frequency.size() != S || sol.price.size() != A) throw InputError("solution does not match the instance");
  const std::size_t n = opt.shippers_per_arc;
  const std::size_t alts = H + 1;

  SimulationReport rep;
  rep.population = n;
  rep.seed = opt.seed;
  rep.capacity_check = opt.capacity_check;
  rep.flows.assign(A, std::vector<std::vector<double>>(S, std::vector<double>(K, 0.0)));
  rep.arcs.resize(A);

  // Operator services per arc, cheapest variable cost first.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> offers(A);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t s = 0; s < S; ++s)
      if (in.incidence.covers(a, s))
        for (std::size_t k = 0; k < K; ++k)
          if (sol.frequency[s][k] > 0) offers[a].emplace_back(s, k);
    std::stable_sort(offers[a].begin(), offers[a].end(), [&](const auto& l, const auto& r) {
      return in.services[l.first].variable_cost[a][l.second] < in.services[r.first].variable_cost[a][r.second];
    });
  }

  std::mt19937_64 rng(opt.seed);
  std::extreme_value_distribution<double> gumbel(0.0, 1.0);
  const auto* ln = std::get_if<LognormalCost>(&spec.cost_coeff);
  std::optional<std::lognormal_distribution<double>> lognormal;
  if (ln && ln->sigma > 0.0) lognormal.emplace(ln->mu, ln->sigma);
  const bool random_eps = spec.error_dist == ErrorDistribution::Gumbel;

  // Alternatives of every shipper ranked by utility (0 = operator, 1 + h = competitor h).
  std::vector<Shipper> shippers;
  std::vector<std::size_t> ranking;
  std::vector<std::pair<double, std::size_t>> u(alts);
  for (std::size_t a = 0; a < A; ++a) {
    if (!(in.demand[a] > 0.0)) continue;
    const double freq = sol.arc_frequency(in, a);
    const bool offered = !offers[a].empty() && std::isfinite(sol.price[a]);
    for (std::size_t i = 0; i < n; ++i) {
      Draw d;
      if (ln) d.beta_c = lognormal ? -(*lognormal)(rng) : -std::exp(ln->mu);
      std::size_t m = 0;
      for (std::size_t alt = 0; alt < alts; ++alt) {
        d.epsilon = random_eps ? gumbel(rng) : 0.0;
        if (alt == 0) {
          if (offered) u[m++] = {utility_operator(in.operator_attrs[a], sol.price[a], freq, spec, &d), 0};
        } else {
          const auto& c = in.competitors[alt - 1];
          if (c.available(a))
            u[m++] = {utility_competitor(c.mode, *c.per_arc[a], in.operator_attrs[a].seaport, spec, &d), alt};
        }
      }
      // Highest utility first; ties go to the operator, then to the lowest competitor index.
      std::stable_sort(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(m),
                       [](const auto& l, const auto& r) { return l.first > r.first; });
      shippers.push_back({a, ranking.size()});
      for (std::size_t j = 0; j < m; ++j) ranking.push_back(u[j].second);
      ranking.push_back(alts);  // terminator
    }
  }
  if (opt.capacity_check) std::shuffle(shippers.begin(), shippers.end(), rng);

  std::vector<std::vector<std::vector<double>>> room(S);
  for (std::size_t s = 0; s < S; ++s) {
    room[s].assign(K, std::vector<double>(in.services[s].legs.size(), 0.0));
    for (std::size_t k = 0; k < K; ++k)
      std::fill(room[s][k].begin(), room[s][k].end(), in.vehicle_types[k].capacity * sol.frequency[s][k]);
  }
  std::vector<std::vector<double>> chosen(A, std::vector<double>(alts, 0.0));
  constexpr double kFit = 1e-9;
  for (const Shipper& sh : shippers) {
    const std::size_t a = sh.arc;
    const double q = in.demand[a] / static_cast<double>(n);
    for (std::size_t j = sh.rank_start; ranking[j] != alts; ++j) {
      const std::size_t alt = ranking[j];
      if (alt != 0) {
        chosen[a][alt] += q;
        break;
      }
      bool placed = false;
      for (const auto& [s, k] : offers[a]) {
        bool fits = true;
        if (opt.capacity_check)
          for (std::size_t l = 0; l < in.services[s].legs.size() && fits; ++l)
            if (in.incidence.uses_leg(a, s, l) && room[s][k][l] < q - kFit) fits = false;
        if (!fits) continue;
        for (std::size_t l = 0; l < in.services[s].legs.size(); ++l)
          if (in.incidence.uses_leg(a, s, l)) room[s][k][l] -= q;
        rep.flows[a][s][k] += q;
        placed = true;
        break;
      }
      if (placed) {
        chosen[a][0] += q;
        break;
      }
      rep.arcs[a].spilled += q;
    }
  }

  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k) rep.fixed_cost += in.services[s].fixed_cost[k] * sol.frequency[s][k];
  for (std::size_t a = 0; a < A; ++a) {
    ArcSimulation& r = rep.arcs[a];
    r.arc = in.arc_name(a);
    r.demand = in.demand[a];
    if (!(in.demand[a] > 0.0)) continue;
    const double D = in.demand[a];
    r.share_operator = chosen[a][0] / D;
    for (std::size_t h = 0; h < H; ++h) {
      const double sh = chosen[a][h + 1] / D;
      switch (in.competitors[h].mode) {
        case Mode::Iwt: r.share_iwt += sh; break;
        case Mode::Rail: r.share_rail += sh; break;
        case Mode::Road: r.share_road += sh; break;
      }
    }
    r.operator_volume = chosen[a][0];
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k) {
        const double x = rep.flows[a][s][k];
        if (x == 0.0) continue;
        const double rev = x * sol.price[a], var = x * in.services[s].variable_cost[a][k];
        rep.revenue += rev;
        rep.variable_cost += var;
        r.margin += rev - var;
      }
  }
  rep.profit = rep.revenue - rep.fixed_cost - rep.variable_cost;
  return rep;
}

double recompute_profit(const SimulationReport& rep, const Solution& sol, const Instance& in) {
  double p = 0.0;
  for (std::size_t s = 0; s < in.num_services(); ++s)
    for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) p -= in.services[s].fixed_cost[k] * sol.frequency[s][k];
  for (std::size_t a = 0; a < in.num_arcs(); ++a)
    for (std::size_t s = 0; s < in.num_services(); ++s)
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) {
        const double x = rep.flows[a][s][k];
        if (x != 0.0) p += x * (sol.price[a] - in.services[s].variable_cost[a][k]);
      }
  return p;
}

void write_simulation_csv(const SimulationReport& rep, std::ostream& out) {
  out << "arc,share_op,share_iwt,share_rail,share_road,profit\n";
  const auto old = out.precision(12);
  for (const auto& a : rep.arcs) {
    if (!(a.demand > 0.0)) continue;
    out << a.arc << ',' << a.share_operator << ',' << a.share_iwt << ',' << a.share_rail << ',' << a.share_road << ','
        << a.margin << '\n';
  }
  out << "total,,,,," << rep.profit << '\n';
  out.precision(old);
}

}  // namespace cdsndp
