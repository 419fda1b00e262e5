/**
 * @file simulator.hpp
 * @brief Out-of-sample evaluation: a fresh shipper population chooses among
 * the operator's offer and the competing modes; reports modal shares and the
 * realized operator profit.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"
#include "cdsndp/reformulation.hpp"

namespace cdsndp {

struct SimulationOptions {
  std::size_t shippers_per_arc = 1000;
  std::uint64_t seed = 1;
  /// Shippers are processed in a seeded random order and a full service drops
  /// out of the choice set. Off: every operator choice is carried.
  bool capacity_check = true;
};

struct ArcSimulation {
  std::string arc;
  double demand = 0.0;
  double share_operator = 0.0;
  double share_iwt = 0.0;
  double share_rail = 0.0;
  double share_road = 0.0;
  double operator_volume = 0.0;  ///< TEU carried
  double spilled = 0.0;          ///< TEU that chose the operator but found no room
  double margin = 0.0;           ///< revenue minus variable cost on the arc, EUR
};

struct SimulationReport {
  std::vector<ArcSimulation> arcs;
  std::vector<std::vector<std::vector<double>>> flows;  ///< realized x[arc][s][k]
  double revenue = 0.0;
  double fixed_cost = 0.0;
  double variable_cost = 0.0;
  double profit = 0.0;
  std::size_t population = 0;  ///< shippers per arc
  std::uint64_t seed = 0;
  bool capacity_check = true;
};

/// The solution supplies prices, frequencies and vehicles; flows are ignored.
SimulationReport simulate_population(const Solution& solution, const Instance& instance, const UtilitySpec& true_spec,
                                     const SimulationOptions& options = {});

/// Profit recomputed from the report's flows.
double recompute_profit(const SimulationReport& report, const Solution& solution, const Instance& instance);

/// `arc,share_op,share_iwt,share_rail,share_road,profit` with one row per arc with demand.
void write_simulation_csv(const SimulationReport& report, std::ostream& out);

}  // namespace cdsndp
