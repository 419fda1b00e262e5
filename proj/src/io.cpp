#include "cdsndp/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "cdsndp/error.hpp"

namespace cdsndp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw InputError(msg); }

void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail("unknown key '" + k + "' in " + where);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail("missing key '" + std::string(key) + "' in " + where);
  return j.at(key);
}

double num(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_number()) fail("'" + std::string(key) + "' in " + where + " must be a number");
  return v.get<double>();
}

double num_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? num(j, key, where) : fallback;
}

int integer(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_number_integer()) fail("'" + std::string(key) + "' in " + where + " must be an integer");
  return v.get<int>();
}

std::string str(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_string()) fail("'" + std::string(key) + "' in " + where + " must be a string");
  return v.get<std::string>();
}

ModeAttributes attrs_from_json(const Json& j, const std::string& where) {
  only_keys(j, {"price", "time", "frequency", "accessibility"}, where);
  return {num(j, "price", where), num(j, "time", where), num_or(j, "frequency", 0.0, where),
          num_or(j, "accessibility", 0.0, where)};
}

Json attrs_to_json(const ModeAttributes& m) {
  return Json{{"price", m.price}, {"time", m.time}, {"frequency", m.frequency}, {"accessibility", m.accessibility}};
}

/// Per vehicle type values given as {"M8": 1.0, ...}.
std::vector<double> per_type(const Json& j, const Instance& in, const std::string& where) {
  if (!j.is_object()) fail(where + " must map vehicle type ids to numbers");
  std::vector<double> out(in.vehicle_types.size(), std::nan(""));
  for (const auto& [k, v] : j.items()) {
    std::size_t idx = in.vehicle_types.size();
    for (std::size_t t = 0; t < in.vehicle_types.size(); ++t)
      if (in.vehicle_types[t].id == k) idx = t;
    if (idx == in.vehicle_types.size()) fail("unknown vehicle type '" + k + "' in " + where);
    if (!v.is_number()) fail(where + "." + k + " must be a number");
    out[idx] = v.get<double>();
  }
  for (std::size_t t = 0; t < out.size(); ++t)
    if (std::isnan(out[t])) fail(where + " misses vehicle type '" + in.vehicle_types[t].id + "'");
  return out;
}

int terminal(const Instance& in, const std::string& id, const std::string& where) {
  const int t = in.find_terminal(id);
  if (t < 0) fail("unknown terminal '" + id + "' in " + where);
  return t;
}

int arc_by_name(const Instance& in, const std::string& name, const std::string& where) {
  for (std::size_t a = 0; a < in.num_arcs(); ++a)
    if (in.arc_name(a) == name) return static_cast<int>(a);
  fail("unknown arc '" + name + "' in " + where + " (arcs are named FROM-TO)");
}

}  // namespace

UtilitySpec utility_from_json(const Json& j) {
  const std::string where = "utility";
  if (!j.is_object()) fail("utility must be a JSON object");
  const std::string model = str(j, "model", where);
  UtilitySpec s;
  if (model == "cost_only") {
    only_keys(j, {"model"}, where);
    return UtilitySpec::cost_only();
  }
  if (model != "deterministic" && model != "mnl" && model != "mixed_logit")
    fail("utility model must be deterministic, mnl, mixed_logit or cost_only (got '" + model + "')");
  const bool mixed = model == "mixed_logit";
  if (j.contains("preset")) {
    only_keys(j, {"model", "preset", "vot"}, where);
    const std::string preset = str(j, "preset", where);
    const double vot = num(j, "vot", where);
    if (preset == "estimated") {
      s = mixed ? UtilitySpec::mixed_logit(vot) : UtilitySpec::mnl(vot, model == "mnl");
    } else if (preset == "weighted_logit_mixture") {
      if (!mixed) fail("preset weighted_logit_mixture needs model mixed_logit");
      s = UtilitySpec::weighted_logit_mixture(vot);
    } else {
      fail("unknown utility preset '" + preset + "'");
    }
  } else {
    if (mixed)
      only_keys(j, {"model", "vot", "asc_rail", "asc_road", "beta_q", "beta_f", "beta_a_road", "beta_a_inter",
                    "beta_c_road", "beta_c_mu", "beta_c_sigma"},
                where);
    else
      only_keys(j, {"model", "vot", "asc_rail", "asc_road", "beta_q", "beta_f", "beta_a_road", "beta_a_inter",
                    "beta_c_road", "beta_c"},
                where);
    s.vot = num(j, "vot", where);
    s.asc_rail = num(j, "asc_rail", where);
    s.asc_road = num(j, "asc_road", where);
    s.beta_q = num(j, "beta_q", where);
    s.beta_f = num(j, "beta_f", where);
    s.beta_a_road = num(j, "beta_a_road", where);
    s.beta_a_inter = num(j, "beta_a_inter", where);
    s.beta_c_road = num(j, "beta_c_road", where);
    if (mixed)
      s.cost_coeff = LognormalCost{num(j, "beta_c_mu", where), num(j, "beta_c_sigma", where)};
    else
      s.cost_coeff = FixedCost{num(j, "beta_c", where)};
    s.error_dist = model == "deterministic" ? ErrorDistribution::None : ErrorDistribution::Gumbel;
  }
  s.validate();
  return s;
}

Json utility_to_json(const UtilitySpec& s) {
  Json j;
  j["model"] = s.model() == ChoiceModel::Deterministic ? "deterministic"
               : s.model() == ChoiceModel::Mnl          ? "mnl"
                                                        : "mixed_logit";
  j["vot"] = s.vot;
  j["asc_rail"] = s.asc_rail;
  j["asc_road"] = s.asc_road;
  j["beta_q"] = s.beta_q;
  j["beta_f"] = s.beta_f;
  j["beta_a_road"] = s.beta_a_road;
  j["beta_a_inter"] = s.beta_a_inter;
  j["beta_c_road"] = s.beta_c_road;
  if (const auto* ln = std::get_if<LognormalCost>(&s.cost_coeff)) {
    j["beta_c_mu"] = ln->mu;
    j["beta_c_sigma"] = ln->sigma;
  } else {
    j["beta_c"] = std::get<FixedCost>(s.cost_coeff).beta;
  }
  return j;
}

InstanceFile instance_from_json(const Json& j) {
  only_keys(j, {"terminals", "arcs", "services", "vehicle_types", "demand", "competitors", "operator_attrs",
                "max_frequency", "price_cap", "utility", "true_utility", "name", "description"},
            "instance");
  InstanceFile out;
  Instance& in = out.instance;
  const Json& terms = need(j, "terminals", "instance");
  if (!terms.is_array()) fail("terminals must be an array of ids");
  for (const auto& t : terms) {
    if (!t.is_string()) fail("terminal ids must be strings");
    in.terminals.push_back(t.get<std::string>());
  }
  if (j.contains("max_frequency")) in.max_frequency = integer(j, "max_frequency", "instance");

  const Json& vts = need(j, "vehicle_types", "instance");
  if (!vts.is_array()) fail("vehicle_types must be an array");
  for (const auto& v : vts) {
    only_keys(v, {"id", "count", "capacity", "max_operating_time"}, "vehicle type");
    in.vehicle_types.push_back(VehicleType{str(v, "id", "vehicle type"), integer(v, "count", "vehicle type"),
                                           num(v, "capacity", "vehicle type"),
                                           num(v, "max_operating_time", "vehicle type")});
  }

  const Json& arcs = need(j, "arcs", "instance");
  if (!arcs.is_array()) fail("arcs must be an array");
  for (const auto& a : arcs) {
    only_keys(a, {"from", "to"}, "arc");
    const std::string where = "arc " + str(a, "from", "arc") + "-" + str(a, "to", "arc");
    in.arcs.push_back({terminal(in, str(a, "from", where), where), terminal(in, str(a, "to", where), where)});
  }
  const std::size_t A = in.arcs.size();

  // Arc-keyed maps: every key must name an arc.
  auto arc_map = [&](const char* key, bool required) -> std::vector<const Json*> {
    std::vector<const Json*> per(A, nullptr);
    if (!j.contains(key)) {
      if (required) fail(std::string("missing key '") + key + "' in instance");
      return per;
    }
    const Json& m = j.at(key);
    if (!m.is_object()) fail(std::string(key) + " must map arc names (FROM-TO) to values");
    for (const auto& [name, v] : m.items()) per[static_cast<std::size_t>(arc_by_name(in, name, key))] = &v;
    return per;
  };

  const auto demand = arc_map("demand", true);
  in.demand.assign(A, 0.0);
  for (std::size_t a = 0; a < A; ++a)
    if (demand[a]) {
      if (!demand[a]->is_number()) fail("demand of " + in.arc_name(a) + " must be a number");
      in.demand[a] = demand[a]->get<double>();
    }

  const auto attrs = arc_map("operator_attrs", true);
  for (std::size_t a = 0; a < A; ++a) {
    const std::string where = "operator_attrs " + in.arc_name(a);
    if (!attrs[a]) fail("missing operator attributes for arc " + in.arc_name(a));
    only_keys(*attrs[a], {"time", "accessibility", "seaport"}, where);
    in.operator_attrs.push_back(OperatorAttributes{num(*attrs[a], "time", where),
                                                   num_or(*attrs[a], "accessibility", 0.0, where),
                                                   num_or(*attrs[a], "seaport", 0.0, where)});
  }

  if (j.contains("price_cap")) {
    const Json& pc = j.at("price_cap");
    if (pc.is_number()) {
      in.price_cap.assign(A, pc.get<double>());
    } else {
      const auto caps = arc_map("price_cap", true);
      for (std::size_t a = 0; a < A; ++a) {
        if (!caps[a] || !caps[a]->is_number()) fail("price_cap map must give a number for every arc (missing " + in.arc_name(a) + ")");
        in.price_cap.push_back(caps[a]->get<double>());
      }
    }
  }

  const Json& svs = need(j, "services", "instance");
  if (!svs.is_array()) fail("services must be an array");
  for (const auto& sj : svs) {
    only_keys(sj, {"id", "stops", "fixed_cost", "sail_time", "port_time", "variable_cost"}, "service");
    Service s;
    s.id = str(sj, "id", "service");
    const std::string where = "service " + s.id;
    const Json& stops = need(sj, "stops", where);
    if (!stops.is_array() || stops.size() < 2) fail(where + " needs at least two stops");
    std::vector<int> ids;
    for (const auto& t : stops) {
      if (!t.is_string()) fail(where + " stops must be terminal ids");
      ids.push_back(terminal(in, t.get<std::string>(), where));
    }
    for (std::size_t l = 0; l < ids.size(); ++l) s.legs.push_back({ids[l], ids[(l + 1) % ids.size()]});
    s.fixed_cost = per_type(need(sj, "fixed_cost", where), in, where + " fixed_cost");
    s.sail_time = per_type(need(sj, "sail_time", where), in, where + " sail_time");
    s.port_time = per_type(need(sj, "port_time", where), in, where + " port_time");
    s.variable_cost.assign(in.arcs.size(), std::vector<double>(in.vehicle_types.size(), std::nan("")));
    const Json& vc = need(sj, "variable_cost", where);
    if (!vc.is_object()) fail(where + " variable_cost must map arc names to per-type costs");
    for (const auto& [name, costs] : vc.items()) {
      const int a = arc_by_name(in, name, where + " variable_cost");
      s.variable_cost[static_cast<std::size_t>(a)] = per_type(costs, in, where + " variable_cost." + name);
    }
    in.services.push_back(std::move(s));
  }

  const Json& comps = need(j, "competitors", "instance");
  if (!comps.is_array()) fail("competitors must be an array");
  for (const auto& cj : comps) {
    only_keys(cj, {"name", "mode", "arcs"}, "competitor");
    CompetitorAlt c;
    c.name = str(cj, "name", "competitor");
    c.mode = mode_from_string(str(cj, "mode", "competitor " + c.name));
    c.per_arc.assign(in.arcs.size(), std::nullopt);
    const Json& per = need(cj, "arcs", "competitor " + c.name);
    if (!per.is_object()) fail("competitor " + c.name + " arcs must map arc names to attributes");
    for (const auto& [name, attrs] : per.items()) {
      const int a = arc_by_name(in, name, "competitor " + c.name);
      c.per_arc[static_cast<std::size_t>(a)] = attrs_from_json(attrs, "competitor " + c.name + " " + name);
    }
    in.competitors.push_back(std::move(c));
  }

  if (j.contains("utility")) out.utility = utility_from_json(j.at("utility"));
  if (j.contains("true_utility")) out.true_utility = utility_from_json(j.at("true_utility"));
  out.instance = validate_instance(std::move(in));
  return out;
}

Json instance_to_json(const Instance& in, const std::optional<UtilitySpec>& utility,
                      const std::optional<UtilitySpec>& true_utility) {
  Json j;
  j["terminals"] = in.terminals;
  j["max_frequency"] = in.max_frequency;
  j["vehicle_types"] = Json::array();
  for (const auto& v : in.vehicle_types)
    j["vehicle_types"].push_back(
        {{"id", v.id}, {"count", v.count}, {"capacity", v.capacity}, {"max_operating_time", v.max_operating_time}});
  j["arcs"] = Json::array();
  Json demand = Json::object(), attrs = Json::object(), caps = Json::object();
  for (std::size_t a = 0; a < in.num_arcs(); ++a) {
    const std::string name = in.arc_name(a);
    j["arcs"].push_back({{"from", in.terminals[in.arcs[a].from]}, {"to", in.terminals[in.arcs[a].to]}});
    demand[name] = in.demand[a];
    attrs[name] = {{"time", in.operator_attrs[a].time},
                   {"accessibility", in.operator_attrs[a].accessibility},
                   {"seaport", in.operator_attrs[a].seaport}};
    if (a < in.price_cap.size()) caps[name] = in.price_cap[a];
  }
  j["demand"] = demand;
  j["operator_attrs"] = attrs;
  if (!in.price_cap.empty()) j["price_cap"] = caps;
  auto types = [&](const std::vector<double>& v) {
    Json o = Json::object();
    for (std::size_t k = 0; k < in.vehicle_types.size(); ++k) o[in.vehicle_types[k].id] = v[k];
    return o;
  };
  j["services"] = Json::array();
  for (const auto& s : in.services) {
    Json stops = Json::array();
    for (const auto& l : s.legs) stops.push_back(in.terminals[l.from]);
    Json vc = Json::object();
    for (std::size_t a = 0; a < in.num_arcs(); ++a) {
      if (a >= s.variable_cost.size()) break;
      bool known = true;
      for (double c : s.variable_cost[a]) known = known && std::isfinite(c);
      if (known) vc[in.arc_name(a)] = types(s.variable_cost[a]);
    }
    j["services"].push_back({{"id", s.id},
                             {"stops", stops},
                             {"fixed_cost", types(s.fixed_cost)},
                             {"sail_time", types(s.sail_time)},
                             {"port_time", types(s.port_time)},
                             {"variable_cost", vc}});
  }
  j["competitors"] = Json::array();
  for (const auto& c : in.competitors) {
    Json per = Json::object();
    for (std::size_t a = 0; a < in.num_arcs(); ++a)
      if (c.available(a)) per[in.arc_name(a)] = attrs_to_json(*c.per_arc[a]);
    j["competitors"].push_back({{"name", c.name}, {"mode", to_string(c.mode)}, {"arcs", per}});
  }
  if (utility) j["utility"] = utility_to_json(*utility);
  if (true_utility) j["true_utility"] = utility_to_json(*true_utility);
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) fail("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

InstanceFile load_instance(const std::filesystem::path& path) {
  try {
    return instance_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    fail(path.string() + ": " + msg);
  }
}

void save_instance(const std::filesystem::path& path, const Instance& instance,
                   const std::optional<UtilitySpec>& utility, const std::optional<UtilitySpec>& true_utility) {
  write_json_file(path, instance_to_json(instance, utility, true_utility));
}

std::vector<CorridorOd> corridor_from_json(const Json& j) {
  only_keys(j, {"ods", "name", "description"}, "corridor");
  const Json& ods = need(j, "ods", "corridor");
  if (!ods.is_array()) fail("corridor ods must be an array");
  std::vector<CorridorOd> out;
  for (const auto& o : ods) {
    only_keys(o, {"origin", "destination", "volume", "seaport", "iwt", "rail", "road"}, "corridor od");
    CorridorOd c;
    c.origin = str(o, "origin", "corridor od");
    c.destination = str(o, "destination", "corridor od");
    const std::string where = "corridor od " + c.origin + "-" + c.destination;
    c.volume = num(o, "volume", where);
    if (!(c.volume >= 0.0) || !std::isfinite(c.volume)) fail(where + " volume must be non-negative");
    c.seaport = num_or(o, "seaport", 0.0, where);
    if (o.contains("iwt")) c.iwt = attrs_from_json(o.at("iwt"), where + " iwt");
    if (o.contains("rail")) c.rail = attrs_from_json(o.at("rail"), where + " rail");
    if (o.contains("road")) c.road = attrs_from_json(o.at("road"), where + " road");
    if (!c.iwt && !c.rail && !c.road) fail(where + " has no mode attributes");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CorridorOd> load_corridor(const std::filesystem::path& path) {
  try {
    return corridor_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(path.string() + ": " + e.what());
  }
}

void write_choice_dataset_csv(const ChoiceDataset& data, std::ostream& out) {
  out << "row,origin,destination,chosen";
  for (const char* m : {"iwt", "rail", "road"})
    for (const char* f : {"price", "time", "frequency", "accessibility"}) out << ',' << m << '_' << f;
  out << '\n';
  const auto old = out.precision(10);
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    const auto& od = data.ods[r.od];
    out << i << ',' << od.origin << ',' << od.destination << ',' << to_string(r.chosen);
    for (const auto* m : {&r.iwt, &r.rail, &r.road}) {
      if (*m)
        out << ',' << (*m)->price << ',' << (*m)->time << ',' << (*m)->frequency << ',' << (*m)->accessibility;
      else
        out << ",,,,";
    }
    out << '\n';
  }
  out.precision(old);
}

Json solution_to_json(const Solution& sol, const Instance& in) {
  Json j;
  j["method"] = sol.method;
  j["backend"] = sol.backend;
  j["status"] = to_string(sol.status);
  j["expected_profit"] = sol.expected_profit;
  j["objective"] = sol.objective;
  j["best_bound"] = std::isfinite(sol.best_bound) ? Json(sol.best_bound) : Json(nullptr);
  j["gap"] = std::isfinite(sol.gap) ? Json(sol.gap) : Json(nullptr);
  j["wall_time"] = sol.wall_time;
  j["nodes"] = sol.nodes;
  j["realizations"] = sol.realizations();
  j["services"] = Json::array();
  for (std::size_t s = 0; s < in.num_services() && s < sol.frequency.size(); ++s)
    for (std::size_t k = 0; k < in.num_vehicle_types(); ++k)
      j["services"].push_back({{"service", in.services[s].id},
                               {"vehicle_type", in.vehicle_types[k].id},
                               {"frequency", sol.frequency[s][k]},
                               {"vehicles", sol.vehicles.empty() ? 0 : sol.vehicles[s][k]}});
  j["arcs"] = Json::array();
  for (std::size_t a = 0; a < in.num_arcs(); ++a) {
    Json aj{{"arc", in.arc_name(a)}, {"demand", in.demand[a]}};
    aj["price"] = a < sol.price.size() && std::isfinite(sol.price[a]) ? Json(sol.price[a]) : Json(nullptr);
    aj["operator_volume"] = sol.realizations() ? sol.operator_volume(a) : 0.0;
    Json flows = Json::array();
    for (std::size_t s = 0; s < in.num_services(); ++s)
      for (std::size_t k = 0; k < in.num_vehicle_types(); ++k) {
        double q = 0.0;
        for (std::size_t r = 0; r < sol.realizations(); ++r) q += sol.x[r][a][s][k];
        if (q > 0.0)
          flows.push_back({{"service", in.services[s].id},
                           {"vehicle_type", in.vehicle_types[k].id},
                           {"teu", q / static_cast<double>(sol.realizations())}});
      }
    aj["flows"] = flows;
    j["arcs"].push_back(aj);
  }
  return j;
}

Json simulation_to_json(const SimulationReport& rep) {
  Json j;
  j["population_per_arc"] = rep.population;
  j["seed"] = rep.seed;
  j["capacity_check"] = rep.capacity_check;
  j["revenue"] = rep.revenue;
  j["fixed_cost"] = rep.fixed_cost;
  j["variable_cost"] = rep.variable_cost;
  j["profit"] = rep.profit;
  j["arcs"] = Json::array();
  for (const auto& a : rep.arcs) {
    if (!(a.demand > 0.0)) continue;
    j["arcs"].push_back({{"arc", a.arc},
                         {"share_op", a.share_operator},
                         {"share_iwt", a.share_iwt},
                         {"share_rail", a.share_rail},
                         {"share_road", a.share_road},
                         {"operator_volume", a.operator_volume},
                         {"spilled", a.spilled},
                         {"margin", a.margin}});
  }
  return j;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (f.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace cdsndp
