#include <cmath>

#include "cdsndp/illustrative.hpp"
#include "doctest.h"

using namespace cdsndp;

TEST_CASE("shipper utilities in the two-mode example") {
  const auto sc = toy_scenario(Strategy::C, false);
  // S1 at x = 9 with f = 5: 5 - 5 * 9; road: 15 - 5 * 15.
  const auto& s1 = sc.shippers[0];
  CHECK(s1.beta_f * sc.iwt_frequency + s1.beta_c * 9.0 == doctest::Approx(-40.0));
  CHECK(sc.road_asc + s1.beta_c * sc.road_price == doctest::Approx(-60.0));
  const auto p = illustrative_profit(9.0, sc);
  CHECK(p.carried[0] == doctest::Approx(200.0 / (1.0 + std::exp(-20.0))));
}

TEST_CASE("profit maximizing grid prices") {
  auto best = [](Strategy s, double step) { return argmax_price(sweep(toy_scenario(s, false), 0.0, 20.0, step)); };
  CHECK(best(Strategy::A, 0.25) == 12.75);
  CHECK(best(Strategy::B, 0.25) == 11.0);
  CHECK(best(Strategy::C, 0.25) == 9.0);
  CHECK(best(Strategy::A, 0.5) == 12.5);
  CHECK(best(Strategy::B, 0.5) == 11.0);
  CHECK(best(Strategy::C, 0.5) == 9.0);
}

TEST_CASE("break-even prices") {
  CHECK(break_even_price(toy_scenario(Strategy::C, false), 0.0, 9.0) == doctest::Approx(2.25).epsilon(1e-3));
  CHECK(break_even_price(toy_scenario(Strategy::C, true), 0.0, 9.0) == doctest::Approx(3.5).epsilon(1e-3));
}

TEST_CASE("capacity caps the carried volume per direction") {
  const auto sc = toy_scenario(Strategy::C, true);
  for (double x = 0.0; x <= 20.0; x += 0.5) {
    const auto p = illustrative_profit(x, sc);
    for (double c : p.carried) CHECK(c <= 5.0 * 20.0 + 1e-9);
    if (x >= sc.c_var) CHECK(p.total <= illustrative_profit(x, toy_scenario(Strategy::C, false)).total + 1e-9);
  }
}

TEST_CASE("strategies agree at low prices where every shipper picks IWT") {
  for (double x = 0.0; x < 7.0; x += 0.5) {
    const double a = illustrative_profit(x, toy_scenario(Strategy::A, false)).total;
    const double b = illustrative_profit(x, toy_scenario(Strategy::B, false)).total;
    const double c = illustrative_profit(x, toy_scenario(Strategy::C, false)).total;
    const double full = 400.0 * (x - 1.0) - 500.0;
    CHECK(a == doctest::Approx(full).epsilon(1e-3));
    CHECK(b == doctest::Approx(full).epsilon(1e-3));
    CHECK(c == doctest::Approx(full).epsilon(1e-3));
  }
}

TEST_CASE("per-shipper profits sum to the total") {
  for (Strategy s : {Strategy::A, Strategy::B, Strategy::C})
    for (double x = 0.0; x <= 20.0; x += 1.25) {
      const auto p = illustrative_profit(x, toy_scenario(s, true));
      CHECK(p.per_shipper[0] + p.per_shipper[1] == doctest::Approx(p.total));
    }
}

TEST_CASE("argmax is invariant to a common utility shift") {
  auto sc = toy_scenario(Strategy::B, false);
  const double before = argmax_price(sweep(sc, 0.0, 20.0, 0.25));
  // Raise both alternatives by 2, the IWT one through its frequency term, with the same total fixed cost.
  sc.iwt_frequency += 2.0;
  sc.road_asc += 2.0;
  sc.c_fix = 500.0 / sc.iwt_frequency;
  CHECK(argmax_price(sweep(sc, 0.0, 20.0, 0.25)) == before);
}
