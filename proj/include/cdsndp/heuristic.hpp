/**
 * @file heuristic.hpp
 * @brief Predetermination heuristic: OD cost estimates, demand/profit/price
 * tables over price and frequency grids, the auxiliary frequency problem and
 * the fixed-point loop over (price, frequency) pairs.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cdsndp/backend.hpp"
#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"
#include "cdsndp/milp_model.hpp"
#include "cdsndp/reformulation.hpp"

namespace cdsndp {

/// Largest frequency a grid may contain.
inline constexpr int kMaxGridFrequency = 35;

struct OdCostEstimate {
  double fixed = 0.0;     ///< EUR per service run, one leg
  double variable = 0.0;  ///< EUR/TEU
};

/// Per arc: estimate from the two-leg services covering it, or nullopt when there are none.
std::vector<std::optional<OdCostEstimate>> estimate_od_costs(const Instance& instance);

struct PriceGrid {
  std::vector<double> values;  ///< EUR/TEU, sorted, unique
  static PriceGrid range(double lo, double hi, double step);
};

struct FreqGrid {
  std::vector<int> values;  ///< sorted, unique
  static FreqGrid range(int lo, int hi, int step = 1);
};

struct HeuristicGrids {
  PriceGrid prices;
  FreqGrid frequencies;
};

/// Integer prices on [0, 500] (cut at the largest price cap) and integer frequencies on [0, 35].
HeuristicGrids default_grids(const Instance& instance);

/// Throws InputError for empty, unsorted or out-of-range grids.
void validate_grids(const Instance& instance, const HeuristicGrids& grids);

struct PrecomputedTables {
  std::size_t num_freqs = 0, num_prices = 0;
  HeuristicGrids grids;
  std::vector<std::optional<OdCostEstimate>> costs;
  std::vector<double> demand;          ///< d, [arc][psi][p] flattened
  std::vector<double> profit;          ///< pi, same layout
  std::vector<std::vector<double>> best_price;        ///< P*[arc][psi]
  std::vector<std::vector<double>> best_competitor_utility;   ///< U'[arc][r]
  std::vector<std::vector<std::size_t>> best_competitor;      ///< h'[arc][r]
  std::vector<char> skipped;           ///< arcs with demand but no cost estimate

  std::size_t at(std::size_t arc, std::size_t psi, std::size_t p) const {
    return (arc * num_freqs + psi) * num_prices + p;
  }
  double d(std::size_t arc, std::size_t psi, std::size_t p) const { return demand[at(arc, psi, p)]; }
  double pi(std::size_t arc, std::size_t psi, std::size_t p) const { return profit[at(arc, psi, p)]; }
  /// Index of a grid value; nullopt when absent.
  std::optional<std::size_t> price_index(double price) const;
  std::optional<std::size_t> freq_index(int psi) const;
};

PrecomputedTables precompute(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                             const HeuristicGrids& grids);

struct ApIndex {
  std::vector<std::vector<int>> v, f;                       ///< [s][k]
  std::vector<std::vector<int>> g;                          ///< [arc][psi]
  /// Literal form: [r][arc][s][k]; aggregated form: one entry [0][arc][s][k] holding the sample mean.
  std::vector<std::vector<std::vector<std::vector<int>>>> x;
  std::vector<std::vector<int>> z;                          ///< [r][arc], literal form only
};

struct ApModel {
  MilpModel model;
  ApIndex index;
  bool aggregated = false;
  std::size_t realizations = 0;
};

/// Auxiliary problem for fixed prices (one per arc, NaN allowed where there is no demand).
/// The aggregated form replaces per-realization flows by their mean, which is
/// an exact projection because every other constraint only sees sample means.
ApModel build_auxiliary_problem(const Instance& instance, std::size_t realizations, const std::vector<double>& prices,
                                const PrecomputedTables& tables, bool aggregated = true);

struct HeuristicInit {
  std::optional<std::vector<double>> prices;  ///< default: competitor IWT price per arc, snapped to the grid
  std::optional<std::vector<int>> frequencies;  ///< default: 0 (or the smallest grid frequency)
};

struct HeuristicOptions {
  bool aggregated = true;
  SolveLimits ap_limits{};
  std::size_t max_iterations = 10'000;
};

struct HeuristicIteration {
  std::vector<double> prices;       ///< prices the AP was solved with
  std::vector<int> psi;             ///< chosen arc frequencies
  std::vector<std::vector<int>> frequency, vehicles;
  double ap_objective = 0.0;
};

struct HeuristicResult {
  Solution solution;            ///< best visited decision, flows from the AP
  double ap_objective = 0.0;    ///< of the returned decision
  double evaluated_profit = 0.0;  ///< same decision under the exact shipper response
  bool evaluation_clipped = false;
  std::size_t best_iteration = 0;
  std::vector<HeuristicIteration> iterations;  ///< last entry is the last visited decision
  double precompute_seconds = 0.0;
  double ap_seconds = 0.0;
  std::vector<char> skipped_arcs;
};

HeuristicResult run_heuristic(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                              const HeuristicGrids& grids, const HeuristicInit& init, MilpBackend& backend,
                              const HeuristicOptions& options = {});

/// Loop over tables that are already computed.
HeuristicResult run_heuristic(const Instance& instance, const UtilitySpec& spec, const Sample& sample,
                              const PrecomputedTables& tables, const HeuristicInit& init, MilpBackend& backend,
                              const HeuristicOptions& options = {});

}  // namespace cdsndp
