#include "cdsndp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "cdsndp/error.hpp"

namespace cdsndp {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

[[noreturn]] void fail(const std::string& msg) { throw InputError(msg); }

std::string leg_name(const Instance& in, const Arc& a) {
  auto name = [&](int t) {
    return (t >= 0 && t < static_cast<int>(in.terminals.size())) ? in.terminals[t] : std::string("?");
  };
  return name(a.from) + "->" + name(a.to);
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Iwt:
      return "iwt";
    case Mode::Rail:
      return "rail";
    case Mode::Road:
      return "road";
  }
  return "?";
}

Mode mode_from_string(const std::string& name) {
  if (name == "iwt" || name == "IWT") return Mode::Iwt;
  if (name == "rail" || name == "Rail") return Mode::Rail;
  if (name == "road" || name == "Road") return Mode::Road;
  throw InputError("unknown alternative '" + name + "' (expected iwt, rail or road)");
}

int IncidenceTables::legs_used(std::size_t arc, std::size_t service) const {
  const auto& row = delta[arc][service];
  return static_cast<int>(std::count(row.begin(), row.end(), char{1}));
}

std::string Instance::arc_name(std::size_t arc) const {
  const Arc& a = arcs.at(arc);
  return terminals.at(a.from) + "-" + terminals.at(a.to);
}

int Instance::find_arc(int from, int to) const {
  for (std::size_t a = 0; a < arcs.size(); ++a)
    if (arcs[a].from == from && arcs[a].to == to) return static_cast<int>(a);
  return -1;
}

int Instance::find_terminal(const std::string& id) const {
  auto it = std::find(terminals.begin(), terminals.end(), id);
  return it == terminals.end() ? -1 : static_cast<int>(it - terminals.begin());
}

double Instance::max_competitor_price(std::size_t arc) const {
  double best = 0.0;
  for (const auto& c : competitors)
    if (c.available(arc)) best = std::max(best, c.per_arc[arc]->price);
  return best;
}

int max_cycles(double max_operating_time, double cycle_time) {
  if (!(cycle_time > 0.0) || !std::isfinite(cycle_time))
    throw InputError("cycle time must be positive");
  if (!(max_operating_time >= 0.0)) throw InputError("maximum operating time must be non-negative");
  // Guard against 120/40 = 2.9999999 style round-off.
  return static_cast<int>(std::floor(max_operating_time / cycle_time + 1e-9));
}

int max_cycles(const Service& service, std::size_t vehicle_type, const VehicleType& vt) {
  const double cycle = service.cycle_time(vehicle_type);
  if (!(cycle > 0.0))
    throw InputError("service " + service.id + " has zero cycle time for vehicle type " + vt.id);
  return max_cycles(vt.max_operating_time, cycle);
}

IncidenceTables build_incidence(const Instance& instance) {
  IncidenceTables t;
  const std::size_t A = instance.arcs.size();
  const std::size_t S = instance.services.size();
  t.delta.assign(A, std::vector<std::vector<char>>(S));
  t.phi.assign(A, std::vector<char>(S, 0));
  for (std::size_t s = 0; s < S; ++s) {
    const auto& legs = instance.services[s].legs;
    const std::size_t n = legs.size();
    for (std::size_t a = 0; a < A; ++a) {
      t.delta[a][s].assign(n, 0);
      const Arc& od = instance.arcs[a];
      std::size_t best_start = n, best_len = n + 1;
      for (std::size_t start = 0; start < n; ++start) {
        if (legs[start].from != od.from) continue;
        for (std::size_t step = 0; step < n; ++step) {
          if (legs[(start + step) % n].to == od.to) {
            if (step + 1 < best_len) {
              best_len = step + 1;
              best_start = start;
            }
            break;
          }
        }
      }
      if (best_start == n) continue;
      t.phi[a][s] = 1;
      for (std::size_t step = 0; step < best_len; ++step) t.delta[a][s][(best_start + step) % n] = 1;
    }
  }
  return t;
}

Instance validate_instance(Instance in) {
  const int T = static_cast<int>(in.terminals.size());
  if (T < 2) fail("instance needs at least two terminals");
  {
    std::set<std::string> seen;
    for (const auto& t : in.terminals) {
      if (t.empty()) fail("empty terminal id");
      if (!seen.insert(t).second) fail("duplicate terminal '" + t + "'");
    }
  }
  auto valid_node = [&](int v) { return v >= 0 && v < T; };

  const std::size_t A = in.arcs.size();
  for (std::size_t a = 0; a < A; ++a) {
    const Arc& arc = in.arcs[a];
    if (!valid_node(arc.from) || !valid_node(arc.to)) fail("arc " + std::to_string(a) + " references an unknown terminal");
    if (arc.from == arc.to) fail("arc " + in.arc_name(a) + " is a self-loop");
    for (std::size_t b = 0; b < a; ++b)
      if (in.arcs[b] == arc) fail("duplicate arc " + in.arc_name(a));
  }

  if (in.demand.size() != A) fail("demand must have one entry per arc");
  for (std::size_t a = 0; a < A; ++a)
    if (!finite_nonneg(in.demand[a])) fail("negative or non-finite demand on " + in.arc_name(a));

  const std::size_t K = in.vehicle_types.size();
  for (const auto& vt : in.vehicle_types) {
    if (vt.count < 0) fail("vehicle type " + vt.id + " has a negative count");
    if (!(vt.capacity > 0.0) || !std::isfinite(vt.capacity)) fail("vehicle type " + vt.id + " needs a positive capacity");
    if (!(vt.max_operating_time > 0.0) || !std::isfinite(vt.max_operating_time))
      fail("vehicle type " + vt.id + " needs a positive maximum operating time");
  }

  if (in.max_frequency < 0) fail("max_frequency must be non-negative");

  for (const auto& s : in.services) {
    if (s.legs.size() < 2) fail("service " + s.id + " needs at least two legs to form a cycle");
    for (std::size_t l = 0; l < s.legs.size(); ++l) {
      const Arc& leg = s.legs[l];
      if (!valid_node(leg.from) || !valid_node(leg.to))
        fail("service " + s.id + " leg " + std::to_string(l) + " references an unknown terminal");
      if (leg.from == leg.to) fail("service " + s.id + " has a self-loop leg");
      const Arc& next = s.legs[(l + 1) % s.legs.size()];
      if (leg.to != next.from)
        fail("service " + s.id + " is not a cycle: leg " + leg_name(in, leg) + " is followed by " + leg_name(in, next));
    }
    if (s.fixed_cost.size() != K || s.sail_time.size() != K || s.port_time.size() != K)
      fail("service " + s.id + " needs fixed cost, sail time and port time per vehicle type");
    for (std::size_t k = 0; k < K; ++k) {
      if (!finite_nonneg(s.fixed_cost[k])) fail("service " + s.id + " has a negative fixed cost");
      if (!finite_nonneg(s.sail_time[k]) || !finite_nonneg(s.port_time[k]))
        fail("service " + s.id + " has a negative sail or port time");
      if (!(s.cycle_time(k) > 0.0)) fail("service " + s.id + " has zero cycle time");
    }
  }

  in.incidence = build_incidence(in);

  for (std::size_t si = 0; si < in.services.size(); ++si) {
    auto& s = in.services[si];
    if (s.variable_cost.empty()) s.variable_cost.assign(A, std::vector<double>(K, std::nan("")));
    if (s.variable_cost.size() != A) fail("service " + s.id + " variable costs must be indexed by arc");
    for (std::size_t a = 0; a < A; ++a) {
      if (s.variable_cost[a].size() != K) fail("service " + s.id + " variable costs need one value per vehicle type");
      if (!in.incidence.covers(a, si)) continue;
      for (std::size_t k = 0; k < K; ++k)
        if (!finite_nonneg(s.variable_cost[a][k]))
          fail("service " + s.id + " has a missing or negative variable cost on " + in.arc_name(a));
    }
  }

  for (const auto& c : in.competitors) {
    if (c.per_arc.size() != A) fail("competitor " + c.name + " attributes must be indexed by arc");
    for (std::size_t a = 0; a < A; ++a) {
      if (!c.per_arc[a]) continue;
      const auto& m = *c.per_arc[a];
      if (!finite_nonneg(m.price) || !finite_nonneg(m.time) || !finite_nonneg(m.frequency) || !std::isfinite(m.accessibility))
        fail("competitor " + c.name + " has invalid attributes on " + in.arc_name(a));
    }
  }
  for (std::size_t a = 0; a < A; ++a) {
    if (in.demand[a] <= 0.0) continue;
    bool any = false;
    for (const auto& c : in.competitors) any = any || c.available(a);
    if (!any) fail("arc " + in.arc_name(a) + " has demand but no competing alternative");
  }

  if (in.operator_attrs.size() != A) fail("operator attributes must have one entry per arc");
  for (std::size_t a = 0; a < A; ++a) {
    const auto& o = in.operator_attrs[a];
    if (!finite_nonneg(o.time) || !std::isfinite(o.accessibility) || !std::isfinite(o.seaport))
      fail("invalid operator attributes on " + in.arc_name(a));
  }

  if (in.price_cap.empty()) {
    double global = 0.0;
    for (std::size_t a = 0; a < A; ++a) global = std::max(global, in.max_competitor_price(a));
    in.price_cap.resize(A);
    for (std::size_t a = 0; a < A; ++a) {
      const double local = in.max_competitor_price(a);
      const double base = local > 0.0 ? local : global;
      in.price_cap[a] = base > 0.0 ? 2.0 * base : 1000.0;
    }
  }
  if (in.price_cap.size() != A) fail("price_cap must be a single value or one value per arc");
  for (std::size_t a = 0; a < A; ++a) {
    if (!std::isfinite(in.price_cap[a])) fail("price cap must be finite on " + in.arc_name(a));
    if (!(in.price_cap[a] > in.max_competitor_price(a))) {
      std::ostringstream os;
      os << "price cap " << in.price_cap[a] << " on " << in.arc_name(a)
         << " does not exceed the highest competitor price " << in.max_competitor_price(a);
      fail(os.str());
    }
  }

  in.validated = true;
  return in;
}

Instance restrict_to_direct_services(const Instance& instance) {
  Instance out = instance;
  out.services.clear();
  for (const auto& s : instance.services)
    if (s.legs.size() == 2) out.services.push_back(s);
  out.validated = false;
  return validate_instance(std::move(out));
}

}  // namespace cdsndp
