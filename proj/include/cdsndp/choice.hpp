/**
 * @file choice.hpp
 * @brief Random-utility mode choice: utility specification, operator and
 * competitor utilities, logit shares and seed-reproducible samples.
 *
 * Prices enter utilities in thousands of EUR per TEU. Everything stored in
 * instances and solutions stays in EUR/TEU; the division by 1000 happens
 * only inside the utility functions below.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cdsndp/instance.hpp"

namespace cdsndp {

/// EUR per utility-price unit (prices enter utilities in k EUR/TEU).
inline constexpr double kPriceScale = 1000.0;

struct FixedCost {
  double beta = 0.0;  ///< beta_c^Inter, must be negative
};

/// beta_c^Inter = -exp(N(mu, sigma^2)).
struct LognormalCost {
  double mu = 0.0;
  double sigma = 0.0;
};

using CostCoefficient = std::variant<FixedCost, LognormalCost>;

enum class ErrorDistribution { None, Gumbel };

enum class ChoiceModel { Deterministic, Mnl, MixedLogit };

std::string to_string(ChoiceModel model);
ChoiceModel choice_model_from_string(const std::string& name);

/// Coefficients of the operator/IWT/rail/road utility functions.
struct UtilitySpec {
  double asc_iwt = 0.0;  ///< normalized; the operator shares the IWT constant
  double asc_rail = 0.0;
  double asc_road = 0.0;
  double beta_q = 0.0;        ///< seaport dummy, IWT only
  double beta_f = 0.0;        ///< frequency, intermodal modes
  double beta_a_road = 0.0;
  double beta_a_inter = 0.0;
  double beta_c_road = 0.0;   ///< must be negative
  CostCoefficient cost_coeff = FixedCost{};
  double vot = 0.0;           ///< value of time, k EUR/TEU/h
  ErrorDistribution error_dist = ErrorDistribution::None;

  ChoiceModel model() const;
  bool is_random() const;
  bool has_random_cost() const { return std::holds_alternative<LognormalCost>(cost_coeff); }
  /// Fixed beta_c^Inter, or the lognormal mean -exp(mu + sigma^2/2).
  double mean_beta_c() const;
  double asc(Mode mode) const;

  /// Throws InputError when a sign invariant is violated.
  void validate() const;

  /// Same coefficients with the error terms removed and, for a lognormal
  /// cost coefficient, beta_c replaced by its mean.
  UtilitySpec deterministic_part() const;

  /// Shippers as pure cost minimizers: U = -price (EUR/TEU), nothing else.
  static UtilitySpec cost_only();
  /// Estimated coefficient sets used by the case study (VoT is not published and must be supplied).
  static UtilitySpec weighted_logit_mixture(double vot);
  static UtilitySpec mixed_logit(double vot);
  static UtilitySpec mnl(double vot, bool with_errors = true);
};

/// Random terms of one realization for one alternative on one arc.
struct Draw {
  double epsilon = 0.0;
  std::optional<double> beta_c;  ///< overrides the intermodal cost coefficient when set
};

/// U^O: utility of the operator at a given price (EUR/TEU) and arc frequency.
double utility_operator(const OperatorAttributes& attrs, double price, double frequency,
                        const UtilitySpec& spec, const Draw* draw = nullptr);

/// U^h for a competing alternative of the given mode. `seaport` is the arc's q_ij (used by IWT only).
double utility_competitor(Mode mode, const ModeAttributes& attrs, double seaport,
                          const UtilitySpec& spec, const Draw* draw = nullptr);

/// Softmax with max-subtraction. Requires at least two finite utilities.
std::vector<double> logit_share(std::span<const double> utilities);

/**
 * @brief R realizations of the random utility terms.
 *
 * Alternative 0 is the operator; alternative 1 + h is competitor h of the
 * instance. epsilon is stored [alternative][arc][r] and is all zeros when
 * the spec has no error term; beta_c holds one draw per realization for
 * a lognormal cost coefficient and is empty otherwise.
 */
struct Sample {
  std::size_t realizations = 0;
  std::size_t num_arcs = 0;
  std::size_t num_alternatives = 0;
  std::uint64_t seed = 0;
  std::vector<double> eps;
  std::vector<double> beta_c;

  double epsilon(std::size_t alternative, std::size_t arc, std::size_t r) const {
    return eps[(alternative * num_arcs + arc) * realizations + r];
  }
  Draw draw(std::size_t alternative, std::size_t arc, std::size_t r) const;
  /// beta_c^Inter of realization r under `spec`.
  double intermodal_cost(const UtilitySpec& spec, std::size_t r) const;
};

/// Draws eps ~ Gumbel(0,1) iid and, for a lognormal spec, beta_c = -exp(N(mu, sigma^2)).
/// Identical arguments give a bit-identical sample. Throws InputError for R == 0.
Sample draw_sample(const UtilitySpec& spec, std::size_t realizations, std::uint64_t seed,
                   std::size_t num_arcs, std::size_t num_alternatives);

/// One realization with every random term at zero (the deterministic model).
Sample degenerate_sample(std::size_t num_arcs, std::size_t num_alternatives);

/// Instance-aware evaluation of every alternative's utility in every realization.
class UtilityEvaluator {
 public:
  UtilityEvaluator(const Instance& instance, const UtilitySpec& spec, const Sample& sample);

  std::size_t realizations() const { return sample_->realizations; }

  /// Utility-per-EUR coefficient of the operator price in realization r (beta_c / 1000, negative).
  double price_coefficient(std::size_t r) const;
  double frequency_coefficient() const { return spec_->beta_f; }
  /// Part of U^O that does not depend on price or frequency (Ubar^O_ijr).
  double operator_base(std::size_t arc, std::size_t r) const;
  double operator_utility(std::size_t arc, double price, double frequency, std::size_t r) const;
  /// U^h_ijr; the competitor must be available on the arc.
  double competitor_utility(std::size_t arc, std::size_t competitor, std::size_t r) const;
  /// max_h U^h_ijr and its argmax over the competitors available on the arc.
  std::pair<double, std::size_t> best_competitor(std::size_t arc, std::size_t r) const;

  const Instance& instance() const { return *instance_; }
  const UtilitySpec& spec() const { return *spec_; }
  const Sample& sample() const { return *sample_; }

 private:
  const Instance* instance_;
  const UtilitySpec* spec_;
  const Sample* sample_;
};

/// Corridor description used to generate synthetic choice observations.
struct CorridorOd {
  std::string origin;
  std::string destination;
  double volume = 0.0;   ///< TEU/year
  double seaport = 0.0;  ///< q_ij
  std::optional<ModeAttributes> iwt;
  std::optional<ModeAttributes> rail;
  std::optional<ModeAttributes> road;
};

struct ChoiceRow {
  std::size_t od = 0;
  Mode chosen = Mode::Road;
  std::optional<ModeAttributes> iwt;
  std::optional<ModeAttributes> rail;
  std::optional<ModeAttributes> road;
};

struct ChoiceDataset {
  std::vector<CorridorOd> ods;
  std::vector<ChoiceRow> rows;
};

/// Rows generated for an OD with the given yearly volume: 1 + floor(volume / 10000).
std::size_t choice_rows_for_volume(double volume);

/// Simulates one utility-maximizing choice per row with fresh beta_c and eps draws.
ChoiceDataset generate_choice_data(const std::vector<CorridorOd>& corridor, const UtilitySpec& true_spec,
                                   std::uint64_t seed);

}  // namespace cdsndp
