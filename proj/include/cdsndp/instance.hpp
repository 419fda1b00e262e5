/**
 * @file instance.hpp
 * @brief Problem instances: terminals, OD arcs, cycle-based services, fleet,
 * demand and exogenous mode attributes.
 *
 * Units are fixed throughout: demand in TEU/week, costs in EUR, times in
 * hours, prices in EUR/TEU.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cdsndp {

/// Directed terminal pair; indices into Instance::terminals.
struct Arc {
  int from = -1;
  int to = -1;

  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Transport modes a competitor can belong to.
enum class Mode { Iwt, Rail, Road };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Exogenous attributes of one alternative on one arc.
struct ModeAttributes {
  double price = 0.0;          ///< EUR/TEU
  double time = 0.0;           ///< h
  double frequency = 0.0;      ///< services/week (ignored for road)
  double accessibility = 0.0;
};

/// A competing alternative; absent entries mean "not offered on this arc".
struct CompetitorAlt {
  std::string name;
  Mode mode = Mode::Road;
  std::vector<std::optional<ModeAttributes>> per_arc;

  bool available(std::size_t arc) const { return arc < per_arc.size() && per_arc[arc].has_value(); }
};

/// Exogenous attributes of the operator's own offer on an arc.
struct OperatorAttributes {
  double time = 0.0;           ///< travel time t^IWT, h
  double accessibility = 0.0;  ///< a^IWT
  double seaport = 0.0;        ///< q_ij, 1 if a seaport is at i or j
};

struct VehicleType {
  std::string id;
  int count = 0;                    ///< V_k
  double capacity = 0.0;            ///< Q_k, TEU
  double max_operating_time = 0.0;  ///< T^max, h/week
};

/// A closed walk of legs run by the operator with any vehicle type.
struct Service {
  std::string id;
  std::vector<Arc> legs;
  std::vector<double> fixed_cost;  ///< per vehicle type, EUR/cycle
  std::vector<double> sail_time;   ///< per vehicle type, h
  std::vector<double> port_time;   ///< per vehicle type, h
  /// variable_cost[arc][k] in EUR/TEU; only meaningful where the service covers the arc.
  std::vector<std::vector<double>> variable_cost;

  double cycle_time(std::size_t k) const { return sail_time.at(k) + port_time.at(k); }
};

/// Leg/arc incidence of the services.
///
/// delta[a][s][l] == 1 iff a container of OD arc a carried by service s
/// travels over leg l; phi[a][s] == 1 iff s visits both ends of a.
struct IncidenceTables {
  std::vector<std::vector<std::vector<char>>> delta;
  std::vector<std::vector<char>> phi;

  bool uses_leg(std::size_t arc, std::size_t service, std::size_t leg) const {
    return delta[arc][service][leg] != 0;
  }
  bool covers(std::size_t arc, std::size_t service) const { return phi[arc][service] != 0; }
  /// Number of legs of s used by arc a (the multiplier of D_ij in the service constraint).
  int legs_used(std::size_t arc, std::size_t service) const;
};

struct Instance {
  std::vector<std::string> terminals;
  std::vector<Arc> arcs;
  std::vector<Service> services;
  std::vector<VehicleType> vehicle_types;
  std::vector<double> demand;                     ///< per arc, TEU/week
  std::vector<CompetitorAlt> competitors;
  std::vector<OperatorAttributes> operator_attrs;  ///< per arc
  int max_frequency = 35;                          ///< cap on every f_sk
  std::vector<double> price_cap;                   ///< per arc; empty means "default"

  /// Populated by validate_instance().
  IncidenceTables incidence;
  bool validated = false;

  std::size_t num_arcs() const { return arcs.size(); }
  std::size_t num_services() const { return services.size(); }
  std::size_t num_vehicle_types() const { return vehicle_types.size(); }
  std::size_t num_competitors() const { return competitors.size(); }

  std::string arc_name(std::size_t arc) const;
  /// Index of the arc (from,to) or -1.
  int find_arc(int from, int to) const;
  int find_terminal(const std::string& id) const;
  /// Largest competitor price on the arc (0 when none is offered).
  double max_competitor_price(std::size_t arc) const;
};

/// Checks every instance invariant, fills default price caps and builds the
/// incidence tables. Idempotent. Throws InputError on the first violation.
Instance validate_instance(Instance raw);

/// W_sk = floor(T^max_k / (t^sail_sk + t^port_sk)). Throws InputError when the cycle time is not positive.
int max_cycles(const Service& service, std::size_t vehicle_type, const VehicleType& vt);
int max_cycles(double max_operating_time, double cycle_time);

/// Traces every OD arc along every service cycle (wrap-around allowed).
IncidenceTables build_incidence(const Instance& instance);

/// Keeps only services with exactly two legs (the direct, path-like services).
Instance restrict_to_direct_services(const Instance& instance);

}  // namespace cdsndp
