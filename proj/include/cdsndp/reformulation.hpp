/**
 * @file reformulation.hpp
 * @brief Single-level MILP of the choice-driven pricing and design problem
 * (KKT conditions of the shippers' problem, big-M complementarity, strong
 * duality revenue, binary frequency expansion) and its sample average
 * counterpart.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdsndp/backend.hpp"
#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"
#include "cdsndp/milp_model.hpp"

namespace cdsndp {

/// Big-M values and variable ranges of one arc in one realization.
struct ArcBigM {
  double m_i = 0.0;               ///< bounds -U^O - lambda
  double m_ii = 0.0;              ///< bounds the operator flow
  std::vector<double> m_ih;       ///< per competitor, bounds -U^h - lambda (0 if unavailable)
  std::vector<double> m_iih;      ///< per competitor, bounds z^h
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double u_op_lo = 0.0;           ///< U^O at the highest price and zero frequency
  double u_op_hi = 0.0;           ///< U^O at price zero and the highest frequency
  double u_best = 0.0;            ///< best competitor utility
  std::size_t h_best = 0;
};

struct BigMConfig {
  /// Price upper bound used in the model: the instance cap, widened to the
  /// smallest price that prices the operator out in every realization when needed.
  std::vector<double> price_upper;
  std::vector<int> freq_upper;                 ///< largest reachable sum of covering frequencies
  std::vector<std::vector<ArcBigM>> per_arc;   ///< [arc][r]; empty for arcs without demand
};

/// Interval-arithmetic big-M values over p in [0, price_upper], f in [0, freq_upper].
BigMConfig compute_big_m(const Instance& instance, const UtilitySpec& spec, const Sample& sample);

/// Indices of model variables; -1 marks a variable that does not exist.
struct CdIndex {
  std::vector<std::vector<int>> v, f;                   ///< [s][k]
  std::vector<std::vector<std::vector<int>>> f_bits;    ///< [s][k][b]
  std::vector<int> p;                                   ///< [arc]
  std::vector<std::vector<std::vector<std::vector<int>>>> x;  ///< [r][arc][s][k]
  std::vector<std::vector<std::vector<int>>> z;         ///< [r][arc][h]
  std::vector<std::vector<int>> lambda, y_i, y_ii;      ///< [r][arc]
  std::vector<std::vector<std::vector<int>>> y_ih, y_iih;  ///< [r][arc][h]
  struct Product {
    int s, k, b, var;
  };
  std::vector<std::vector<std::vector<Product>>> a;     ///< [r][arc] -> products f_skb * sum_sk x
};

/// A built model together with everything needed to read its solution back.
struct CdMilp {
  MilpModel model;
  CdIndex index;
  BigMConfig bigm;
  Instance instance;
  UtilitySpec spec;
  Sample sample;
  std::vector<char> active_arc;  ///< arcs with positive demand
};

/// Deterministic model; throws InputError when the spec carries random terms or beta_c >= 0.
CdMilp build_deterministic_milp(const Instance& instance, const UtilitySpec& spec);
/// SAA model with per-realization flows, duals and flags and shared v, f, p.
CdMilp build_saa_milp(const Instance& instance, const UtilitySpec& spec, const Sample& sample);

/// Upper-level decisions and per-realization lower-level flows.
struct Solution {
  std::vector<std::vector<int>> vehicles;   ///< v[s][k]
  std::vector<std::vector<int>> frequency;  ///< f[s][k]
  std::vector<double> price;                ///< p[arc]; NaN where the arc has no demand
  std::vector<std::vector<std::vector<std::vector<double>>>> x;  ///< [r][arc][s][k]
  std::vector<std::vector<std::vector<double>>> z;               ///< [r][arc][h]
  std::vector<std::vector<double>> lambda;                       ///< [r][arc]
  double expected_profit = 0.0;
  double objective = 0.0;   ///< model objective as reported by the backend
  double best_bound = 0.0;
  double gap = 0.0;
  double wall_time = 0.0;
  long nodes = 0;
  MilpStatus status = MilpStatus::Error;
  std::string backend;
  std::string method = "exact";

  std::size_t realizations() const { return x.size(); }
  /// Sum over covering services of f_sk on the arc.
  int arc_frequency(const Instance& instance, std::size_t arc) const;
  /// Realization-averaged operator volume on the arc.
  double operator_volume(std::size_t arc) const;
};

/// Profit computed from prices and flows: mean_r sum p x - sum cFIX f - mean_r sum cVAR x.
double direct_profit(const Instance& instance, const Solution& solution);

/// Largest violation of fleet, cycle, capacity, service and demand constraints.
double upper_level_violation(const Instance& instance, const Solution& solution);

Solution extract_solution(const CdMilp& milp, const MilpResult& result);

/// Builds nothing; runs the backend on the model and decodes the result.
Solution solve(const CdMilp& milp, MilpBackend& backend, const SolveLimits& limits);

struct KktReport {
  double dual_feasibility = 0.0;  ///< max(0, lambda + U) over operator and competitors
  double complementarity = 0.0;   ///< max |(-U - lambda) * flow|
  double duality = 0.0;           ///< max over arcs and realizations of |-(U^O X + sum U^h z) - D lambda|
  double demand = 0.0;            ///< max |X + sum z - D|
  double max_residual() const;
};

KktReport verify_kkt(const Solution& solution, const Instance& instance, const UtilitySpec& spec,
                     const Sample& sample);

/// Sample for a model name: degenerate for deterministic specs, drawn otherwise.
Sample sample_for(const Instance& instance, const UtilitySpec& spec, std::size_t draws, std::uint64_t seed);

}  // namespace cdsndp
