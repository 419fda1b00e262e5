#include "cdsndp/illustrative.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "cdsndp/choice.hpp"
#include "cdsndp/error.hpp"

namespace cdsndp {

Strategy strategy_from_string(const std::string& name) {
  if (name == "A" || name == "a") return Strategy::A;
  if (name == "B" || name == "b") return Strategy::B;
  if (name == "C" || name == "c") return Strategy::C;
  throw InputError("unknown strategy '" + name + "' (expected A, B or C)");
}

IllustrativeScenario toy_scenario(Strategy strategy, bool capacitated) {
  IllustrativeScenario sc;
  sc.iwt_frequency = 5.0;
  sc.road_price = 15.0;
  sc.c_fix = 100.0;
  sc.c_var = 1.0;
  switch (strategy) {
    case Strategy::A:
      sc.road_asc = 0.0;
      sc.shippers = {{200.0, -1.0, 0.0, 0}, {200.0, -1.0, 0.0, 1}};
      break;
    case Strategy::B:
      sc.road_asc = 15.0;
      sc.shippers = {{200.0, -3.5, 1.0, 0}, {200.0, -3.5, 1.0, 1}};
      break;
    case Strategy::C:
      sc.road_asc = 15.0;
      sc.shippers = {{200.0, -5.0, 1.0, 0}, {200.0, -2.0, 1.0, 1}};
      break;
  }
  if (capacitated) sc.capacity = 20.0;
  return sc;
}

IllustrativeProfit illustrative_profit(double price, const IllustrativeScenario& sc) {
  const std::size_t n = sc.shippers.size();
  IllustrativeProfit out;
  out.carried.resize(n);
  out.per_shipper.resize(n);
  std::map<int, double> demand_by_direction;
  for (std::size_t i = 0; i < n; ++i) {
    const Shipper& sh = sc.shippers[i];
    if (!(sh.volume > 0.0)) throw InputError("shipper volumes must be positive");
    const std::array<double, 2> v{sh.beta_f * sc.iwt_frequency + sh.beta_c * price,
                                  sc.road_asc + sh.beta_c * sc.road_price};
    out.carried[i] = sh.volume * logit_share(v)[0];
    demand_by_direction[sh.direction] += out.carried[i];
  }
  if (sc.capacity) {
    const double cap = sc.iwt_frequency * *sc.capacity;
    for (std::size_t i = 0; i < n; ++i) {
      const double dir_total = demand_by_direction[sc.shippers[i].direction];
      if (dir_total > cap) out.carried[i] *= cap / dir_total;
    }
  }
  const double fixed = sc.iwt_frequency * sc.c_fix;
  out.total = -fixed;
  for (std::size_t i = 0; i < n; ++i) {
    out.per_shipper[i] = out.carried[i] * (price - sc.c_var) - fixed / static_cast<double>(n);
    out.total += out.carried[i] * (price - sc.c_var);
  }
  return out;
}

std::vector<SweepRow> sweep(const IllustrativeScenario& scenario, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || lo < 0.0) throw InputError("invalid sweep range");
  std::vector<SweepRow> rows;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    rows.push_back({x, illustrative_profit(x, scenario)});
  }
  return rows;
}

double argmax_price(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InputError("empty sweep");
  auto best = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.profit.total < b.profit.total;
  });
  return best->price;
}

double break_even_price(const IllustrativeScenario& scenario, double lo, double hi, double tol) {
  auto f = [&](double x) { return illustrative_profit(x, scenario).total; };
  if (f(lo) >= 0.0) return lo;
  // Walk forward to the first sign change, then bisect.
  const int steps = 4000;
  const double h = (hi - lo) / steps;
  double a = lo;
  for (int i = 1; i <= steps; ++i) {
    double b = lo + h * i;
    if (f(b) >= 0.0) {
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        (f(mid) >= 0.0 ? b : a) = mid;
      }
      return 0.5 * (a + b);
    }
    a = b;
  }
  throw InputError("profit never becomes positive in the given range");
}

}  // namespace cdsndp
