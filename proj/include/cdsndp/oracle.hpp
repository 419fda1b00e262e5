/**
 * @file oracle.hpp
 * @brief Brute-force bilevel solver for small instances: enumerate fleet,
 * frequencies and grid prices, answer with the shippers' exact best response.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"
#include "cdsndp/reformulation.hpp"

namespace cdsndp {

/// Shippers' best response for fixed prices and frequencies.
struct LowerLevelResponse {
  std::vector<std::vector<double>> operator_volume;       ///< X[r][arc]
  std::vector<std::vector<std::vector<double>>> z;        ///< [r][arc][h]
  std::vector<std::vector<double>> lambda;                ///< -max utility, [r][arc]
};

/// All of D_ij goes to the alternative with the highest utility; ties go to the
/// operator, then to the lowest competitor index. Capacity is not looked at.
/// U^O within `tie_tolerance` of the best competitor counts as a tie.
LowerLevelResponse lower_level_response(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                                        const std::vector<double>& prices,
                                        const std::vector<std::vector<int>>& frequency,
                                        double tie_tolerance = 0.0);

/// Splits the operator volume over services. Arcs are served in decreasing
/// (p - cheapest variable cost) order and each arc fills its services by
/// increasing variable cost, within the remaining leg capacity (averaged over
/// realizations). Volume that does not fit moves to the best competitor.
/// Returns true when something had to be moved.
bool route_flows(const Instance& instance, const std::vector<double>& prices,
                 const std::vector<std::vector<int>>& frequency, const LowerLevelResponse& response,
                 const std::vector<std::vector<std::size_t>>& best_competitor, Solution& out);

struct OracleOptions {
  double grid_step = 1.0;
  double grid_lo = 0.0;
  std::optional<double> grid_hi;       ///< default: the model's price upper bound per arc
  std::vector<double> explicit_grid;   ///< overrides lo/hi/step when nonempty
  std::size_t max_combinations = 10'000'000;
  /// Discard decisions whose best response does not fit the capacity instead of clipping it.
  bool strict_capacity = false;
};

struct OracleResult {
  Solution solution;
  std::size_t frequency_plans = 0;
  std::size_t combinations = 0;   ///< price combinations evaluated over all plans
  bool capacity_clipped = false;  ///< the returned solution needed clipping
};

/// Profit of a fixed upper-level decision under the exact best response, with
/// flows routed by route_flows. Ties (within tie_tolerance) go to the operator
/// only when the price covers the cheapest variable cost, as the leader would
/// choose. `clipped` reports whether routing had to move volume.
Solution evaluate_decision(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                           const std::vector<double>& prices, const std::vector<std::vector<int>>& frequency,
                           const std::vector<std::vector<int>>& vehicles, double tie_tolerance = 1e-9,
                           bool* clipped = nullptr);

/// Throws InputError when the enumeration exceeds max_combinations.
OracleResult brute_force_bilevel(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                                 const OracleOptions& options = {});

}  // namespace cdsndp
