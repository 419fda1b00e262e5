/**
 * @file illustrative.hpp
 * @brief Closed-form two-mode pricing example: one IWT carrier against road,
 * binary logit demand, a single price for every shipper.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cdsndp {

struct Shipper {
  double volume = 0.0;  ///< TEU
  double beta_c = 0.0;  ///< cost sensitivity (per EUR in this example)
  double beta_f = 0.0;  ///< frequency weight
  int direction = 0;    ///< shippers sharing a direction share the vessel capacity
};

struct IllustrativeScenario {
  std::vector<Shipper> shippers;
  double iwt_frequency = 5.0;
  double road_price = 15.0;
  double road_asc = 15.0;
  double c_fix = 100.0;  ///< EUR per round trip
  double c_var = 1.0;    ///< EUR per TEU
  std::optional<double> capacity;  ///< TEU per sailing; none means uncapacitated
};

enum class Strategy { A, B, C };

Strategy strategy_from_string(const std::string& name);

/// The two-shipper toy market as seen by the carrier under strategy A
/// (pure cost minimizers), B (homogeneous mean sensitivity) or C (true heterogeneity).
IllustrativeScenario toy_scenario(Strategy strategy, bool capacitated);

struct IllustrativeProfit {
  double total = 0.0;
  std::vector<double> per_shipper;  ///< each shipper carries an equal share of the fixed cost
  std::vector<double> carried;      ///< TEU carried per shipper
};

/// Pi(x) = sum_i carried_i (x - c_var) - f c_fix, with carried_i the logit-expected
/// IWT volume, capped per direction at f * capacity when capacitated.
IllustrativeProfit illustrative_profit(double price, const IllustrativeScenario& scenario);

struct SweepRow {
  double price = 0.0;
  IllustrativeProfit profit;
};

std::vector<SweepRow> sweep(const IllustrativeScenario& scenario, double lo, double hi, double step);

/// Grid point with the highest total profit (lowest price on ties).
double argmax_price(const std::vector<SweepRow>& rows);

/// Smallest price in [lo, hi] at which total profit crosses zero from below (bisection).
double break_even_price(const IllustrativeScenario& scenario, double lo, double hi, double tol = 1e-10);

}  // namespace cdsndp
