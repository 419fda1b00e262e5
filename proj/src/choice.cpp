#include "cdsndp/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cdsndp/error.hpp"

namespace cdsndp {

std::string to_string(ChoiceModel model) {
  switch (model) {
    case ChoiceModel::Deterministic:
      return "deterministic";
    case ChoiceModel::Mnl:
      return "mnl";
    case ChoiceModel::MixedLogit:
      return "mixed_logit";
  }
  return "?";
}

ChoiceModel choice_model_from_string(const std::string& name) {
  if (name == "deterministic") return ChoiceModel::Deterministic;
  if (name == "mnl") return ChoiceModel::Mnl;
  if (name == "mixed_logit") return ChoiceModel::MixedLogit;
  throw InputError("unknown utility model '" + name + "' (expected deterministic, mnl or mixed_logit)");
}

ChoiceModel UtilitySpec::model() const {
  if (has_random_cost()) return ChoiceModel::MixedLogit;
  return error_dist == ErrorDistribution::Gumbel ? ChoiceModel::Mnl : ChoiceModel::Deterministic;
}

bool UtilitySpec::is_random() const { return has_random_cost() || error_dist != ErrorDistribution::None; }

double UtilitySpec::mean_beta_c() const {
  if (const auto* f = std::get_if<FixedCost>(&cost_coeff)) return f->beta;
  const auto& ln = std::get<LognormalCost>(cost_coeff);
  return -std::exp(ln.mu + 0.5 * ln.sigma * ln.sigma);
}

double UtilitySpec::asc(Mode mode) const {
  switch (mode) {
    case Mode::Iwt:
      return asc_iwt;
    case Mode::Rail:
      return asc_rail;
    case Mode::Road:
      return asc_road;
  }
  return 0.0;
}

void UtilitySpec::validate() const {
  const double all[] = {asc_iwt, asc_rail, asc_road, beta_q, beta_f, beta_a_road, beta_a_inter, beta_c_road, vot};
  for (double v : all)
    if (!std::isfinite(v)) throw InputError("utility coefficients must be finite");
  if (!(beta_c_road < 0.0)) throw InputError("beta_c_road must be strictly negative");
  if (beta_f < 0.0) throw InputError("beta_f must be non-negative");
  if (vot < 0.0) throw InputError("value of time must be non-negative");
  if (const auto* f = std::get_if<FixedCost>(&cost_coeff)) {
    if (!(f->beta < 0.0) || !std::isfinite(f->beta)) throw InputError("beta_c_inter must be strictly negative");
  } else {
    const auto& ln = std::get<LognormalCost>(cost_coeff);
    if (!std::isfinite(ln.mu) || !std::isfinite(ln.sigma) || ln.sigma < 0.0)
      throw InputError("lognormal cost coefficient needs finite mu and sigma >= 0");
  }
}

UtilitySpec UtilitySpec::deterministic_part() const {
  UtilitySpec out = *this;
  out.error_dist = ErrorDistribution::None;
  out.cost_coeff = FixedCost{mean_beta_c()};
  return out;
}

UtilitySpec UtilitySpec::cost_only() {
  UtilitySpec s;
  s.beta_c_road = -kPriceScale;
  s.cost_coeff = FixedCost{-kPriceScale};
  return s;
}

UtilitySpec UtilitySpec::weighted_logit_mixture(double vot) {
  UtilitySpec s;
  s.asc_rail = 0.713;
  s.asc_road = 2.30;
  s.beta_q = 1.63;
  s.beta_f = 0.0278;
  s.beta_a_road = 0.0530;
  s.beta_a_inter = 0.157;
  s.beta_c_road = -8.68;
  s.cost_coeff = LognormalCost{2.30, 0.690};
  s.vot = vot;
  s.error_dist = ErrorDistribution::Gumbel;
  return s;
}

UtilitySpec UtilitySpec::mixed_logit(double vot) {
  UtilitySpec s;
  s.asc_rail = 0.816;
  s.asc_road = 2.35;
  s.beta_q = 1.60;
  s.beta_f = 0.0262;
  s.beta_a_road = 0.0506;
  s.beta_a_inter = 0.173;
  s.beta_c_road = -8.73;
  s.cost_coeff = LognormalCost{2.40, 0.618};
  s.vot = vot;
  s.error_dist = ErrorDistribution::Gumbel;
  return s;
}

UtilitySpec UtilitySpec::mnl(double vot, bool with_errors) {
  UtilitySpec s;
  s.asc_rail = 0.338;
  s.asc_road = 2.06;
  s.beta_q = 1.49;
  s.beta_f = 0.0229;
  s.beta_a_road = 0.0469;
  s.beta_a_inter = 0.141;
  s.beta_c_road = -4.81;
  s.cost_coeff = FixedCost{-5.76};
  s.vot = vot;
  s.error_dist = with_errors ? ErrorDistribution::Gumbel : ErrorDistribution::None;
  return s;
}

namespace {

double intermodal_beta(const UtilitySpec& spec, const Draw* draw) {
  if (draw && draw->beta_c) return *draw->beta_c;
  return spec.mean_beta_c();
}

}  // namespace

double utility_operator(const OperatorAttributes& attrs, double price, double frequency, const UtilitySpec& spec,
                        const Draw* draw) {
  const double bc = intermodal_beta(spec, draw);
  double u = spec.asc_iwt + spec.beta_a_inter * attrs.accessibility + spec.beta_q * attrs.seaport +
             bc * (price / kPriceScale + spec.vot * attrs.time) + spec.beta_f * frequency;
  if (draw) u += draw->epsilon;
  return u;
}

double utility_competitor(Mode mode, const ModeAttributes& attrs, double seaport, const UtilitySpec& spec,
                          const Draw* draw) {
  const double cost = attrs.price / kPriceScale + spec.vot * attrs.time;
  double u = 0.0;
  switch (mode) {
    case Mode::Iwt:
      u = spec.asc_iwt + spec.beta_a_inter * attrs.accessibility + spec.beta_q * seaport +
          intermodal_beta(spec, draw) * cost + spec.beta_f * attrs.frequency;
      break;
    case Mode::Rail:
      u = spec.asc_rail + spec.beta_a_inter * attrs.accessibility + intermodal_beta(spec, draw) * cost +
          spec.beta_f * attrs.frequency;
      break;
    case Mode::Road:
      u = spec.asc_road + spec.beta_a_road * attrs.accessibility + spec.beta_c_road * cost;
      break;
  }
  if (draw) u += draw->epsilon;
  return u;
}

std::vector<double> logit_share(std::span<const double> utilities) {
  if (utilities.size() < 2) throw InputError("logit_share needs at least two utilities");
  double top = -std::numeric_limits<double>::infinity();
  for (double u : utilities) {
    if (!std::isfinite(u)) throw InputError("logit_share needs finite utilities");
    top = std::max(top, u);
  }
  std::vector<double> out(utilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    out[i] = std::exp(utilities[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Draw Sample::draw(std::size_t alternative, std::size_t arc, std::size_t r) const {
  Draw d;
  d.epsilon = epsilon(alternative, arc, r);
  if (!beta_c.empty()) d.beta_c = beta_c[r];
  return d;
}

double Sample::intermodal_cost(const UtilitySpec& spec, std::size_t r) const {
  if (!beta_c.empty()) return beta_c[r];
  return spec.mean_beta_c();
}

Sample draw_sample(const UtilitySpec& spec, std::size_t realizations, std::uint64_t seed, std::size_t num_arcs,
                   std::size_t num_alternatives) {
  if (realizations == 0) throw InputError("sample size R must be at least 1");
  Sample s;
  s.realizations = realizations;
  s.num_arcs = num_arcs;
  s.num_alternatives = num_alternatives;
  s.seed = seed;
  s.eps.assign(num_alternatives * num_arcs * realizations, 0.0);
  std::mt19937_64 rng(seed);
  if (spec.error_dist == ErrorDistribution::Gumbel) {
    std::extreme_value_distribution<double> gumbel(0.0, 1.0);
    for (double& e : s.eps) e = gumbel(rng);
  }
  if (const auto* ln = std::get_if<LognormalCost>(&spec.cost_coeff)) {
    s.beta_c.resize(realizations);
    if (ln->sigma == 0.0) {
      std::fill(s.beta_c.begin(), s.beta_c.end(), -std::exp(ln->mu));
    } else {
      std::lognormal_distribution<double> lognormal(ln->mu, ln->sigma);
      for (double& b : s.beta_c) b = -lognormal(rng);
    }
  }
  return s;
}

Sample degenerate_sample(std::size_t num_arcs, std::size_t num_alternatives) {
  Sample s;
  s.realizations = 1;
  s.num_arcs = num_arcs;
  s.num_alternatives = num_alternatives;
  s.eps.assign(num_arcs * num_alternatives, 0.0);
  return s;
}

UtilityEvaluator::UtilityEvaluator(const Instance& instance, const UtilitySpec& spec, const Sample& sample)
    : instance_(&instance), spec_(&spec), sample_(&sample) {
  if (sample.num_arcs != instance.num_arcs() || sample.num_alternatives != instance.num_competitors() + 1)
    throw InputError("sample dimensions do not match the instance");
  if (spec.has_random_cost() && sample.beta_c.size() != sample.realizations)
    throw InputError("mixed logit spec needs a sample with cost-coefficient draws");
}

double UtilityEvaluator::price_coefficient(std::size_t r) const {
  return sample_->intermodal_cost(*spec_, r) / kPriceScale;
}

double UtilityEvaluator::operator_base(std::size_t arc, std::size_t r) const {
  return operator_utility(arc, 0.0, 0.0, r);
}

double UtilityEvaluator::operator_utility(std::size_t arc, double price, double frequency, std::size_t r) const {
  const Draw d = sample_->draw(0, arc, r);
  return utility_operator(instance_->operator_attrs[arc], price, frequency, *spec_, &d);
}

double UtilityEvaluator::competitor_utility(std::size_t arc, std::size_t competitor, std::size_t r) const {
  const auto& c = instance_->competitors.at(competitor);
  const Draw d = sample_->draw(competitor + 1, arc, r);
  return utility_competitor(c.mode, *c.per_arc.at(arc), instance_->operator_attrs[arc].seaport, *spec_, &d);
}

std::pair<double, std::size_t> UtilityEvaluator::best_competitor(std::size_t arc, std::size_t r) const {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = instance_->num_competitors();
  for (std::size_t h = 0; h < instance_->num_competitors(); ++h) {
    if (!instance_->competitors[h].available(arc)) continue;
    const double u = competitor_utility(arc, h, r);
    if (u > best) {
      best = u;
      arg = h;
    }
  }
  return {best, arg};
}

std::size_t choice_rows_for_volume(double volume) {
  if (!(volume >= 0.0)) throw InputError("OD volume must be non-negative");
  return 1 + static_cast<std::size_t>(std::floor(volume / 10000.0));
}

ChoiceDataset generate_choice_data(const std::vector<CorridorOd>& corridor, const UtilitySpec& true_spec,
                                   std::uint64_t seed) {
  true_spec.validate();
  ChoiceDataset out;
  out.ods = corridor;
  std::mt19937_64 rng(seed);
  std::extreme_value_distribution<double> gumbel(0.0, 1.0);
  const auto* ln = std::get_if<LognormalCost>(&true_spec.cost_coeff);
  std::optional<std::lognormal_distribution<double>> lognormal;
  if (ln && ln->sigma > 0.0) lognormal.emplace(ln->mu, ln->sigma);

  for (std::size_t od = 0; od < corridor.size(); ++od) {
    const CorridorOd& c = corridor[od];
    if (!c.iwt && !c.rail && !c.road)
      throw InputError("corridor OD " + c.origin + "-" + c.destination + " has no mode attributes");
    const std::size_t n = choice_rows_for_volume(c.volume);
    for (std::size_t i = 0; i < n; ++i) {
      Draw draw;
      if (ln) draw.beta_c = lognormal ? -(*lognormal)(rng) : -std::exp(ln->mu);
      double best = -std::numeric_limits<double>::infinity();
      Mode chosen = Mode::Road;
      auto consider = [&](Mode mode, const std::optional<ModeAttributes>& attrs) {
        if (!attrs) return;
        draw.epsilon = true_spec.error_dist == ErrorDistribution::Gumbel ? gumbel(rng) : 0.0;
        const double u = utility_competitor(mode, *attrs, c.seaport, true_spec, &draw);
        if (u > best) {
          best = u;
          chosen = mode;
        }
      };
      consider(Mode::Iwt, c.iwt);
      consider(Mode::Rail, c.rail);
      consider(Mode::Road, c.road);
      out.rows.push_back(ChoiceRow{od, chosen, c.iwt, c.rail, c.road});
    }
  }
  return out;
}

}  // namespace cdsndp
