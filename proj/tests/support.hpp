// Shared instance builders for the unit tests and the acceptance runner.
#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"

namespace cdsndp::testing {

struct RandomInstanceOptions {
  int terminals = 3;
  int services = 2;
  int vehicle_types = 1;
  int max_vehicles = 2;
  int max_frequency = 3;
  bool ample_capacity = true;  ///< one sailing carries all demand
};

inline Instance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& o = {}) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };

  Instance in;
  for (int t = 0; t < o.terminals; ++t) in.terminals.push_back("T" + std::to_string(t));
  for (int i = 0; i < o.terminals; ++i)
    for (int j = 0; j < o.terminals; ++j)
      if (i != j) in.arcs.push_back({i, j});
  const std::size_t A = in.arcs.size();

  double total = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    const double d = u01(rng) < 0.15 ? 0.0 : std::round(uni(10, 120));
    in.demand.push_back(d);
    total += d;
  }
  for (int k = 0; k < o.vehicle_types; ++k) {
    VehicleType vt;
    vt.id = "K" + std::to_string(k);
    vt.count = 1 + pick(o.max_vehicles);
    vt.capacity = o.ample_capacity ? std::ceil(total) + 10.0 * (k + 1) : std::round(uni(20, 80));
    vt.max_operating_time = uni(60, 168);
    in.vehicle_types.push_back(vt);
  }
  // Services: the direct shuttle T0-T1 plus a second cycle.
  std::vector<std::vector<int>> cycles{{0, 1}};
  if (o.services > 1) {
    if (o.terminals >= 3)
      cycles.push_back(pick(2) == 0 ? std::vector<int>{0, 1, 2} : std::vector<int>{1, 2});
    else
      cycles.push_back({1, 0});
  }
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    Service s;
    s.id = "S" + std::to_string(c);
    const auto& cyc = cycles[c];
    for (std::size_t l = 0; l < cyc.size(); ++l) s.legs.push_back({cyc[l], cyc[(l + 1) % cyc.size()]});
    for (int k = 0; k < o.vehicle_types; ++k) {
      s.fixed_cost.push_back(std::round(uni(200, 3000)));
      s.sail_time.push_back(uni(10, 40) * static_cast<double>(cyc.size()));
      s.port_time.push_back(uni(4, 12));
    }
    s.variable_cost.assign(A, std::vector<double>(static_cast<std::size_t>(o.vehicle_types), 0.0));
    for (auto& row : s.variable_cost)
      for (auto& c2 : row) c2 = std::round(uni(10, 90));
    in.services.push_back(s);
  }
  CompetitorAlt road{"road", Mode::Road, {}}, iwt{"iwt", Mode::Iwt, {}};
  for (std::size_t a = 0; a < A; ++a) {
    road.per_arc.push_back(ModeAttributes{std::round(uni(250, 700)), uni(3, 12), 0.0, uni(0, 2)});
    if (u01(rng) < 0.6)
      iwt.per_arc.push_back(ModeAttributes{std::round(uni(80, 300)), uni(10, 40), uni(1, 7), uni(0, 2)});
    else
      iwt.per_arc.push_back(std::nullopt);
    in.operator_attrs.push_back(OperatorAttributes{uni(10, 40), uni(0, 2), pick(2) == 0 ? 1.0 : 0.0});
  }
  in.competitors = {road, iwt};
  in.max_frequency = o.max_frequency;
  return validate_instance(in);
}

/// One loaded OD pair A->B served by the shuttle A-B-A; the return arc has no demand.
inline Instance single_od() {
  Instance in;
  in.terminals = {"A", "B"};
  in.arcs = {{0, 1}, {1, 0}};
  in.demand = {100.0, 0.0};
  in.vehicle_types = {VehicleType{"M8", 1, 200.0, 100.0}};
  Service s;
  s.id = "AB";
  s.legs = {{0, 1}, {1, 0}};
  s.fixed_cost = {500.0};
  s.sail_time = {40.0};
  s.port_time = {10.0};
  s.variable_cost = {{20.0}, {20.0}};
  in.services = {s};
  in.competitors = {CompetitorAlt{"road", Mode::Road, {ModeAttributes{400, 5, 0, 1}, ModeAttributes{400, 5, 0, 1}}},
                    CompetitorAlt{"iwt", Mode::Iwt, {ModeAttributes{150, 20, 2, 1}, std::nullopt}}};
  in.operator_attrs = {OperatorAttributes{20, 1, 1}, OperatorAttributes{20, 1, 1}};
  in.max_frequency = 35;
  return validate_instance(in);
}

/// Deterministic spec with the estimated MNL coefficients and a fixed VoT.
inline UtilitySpec deterministic_spec() { return UtilitySpec::mnl(0.001, false); }

}  // namespace cdsndp::testing
