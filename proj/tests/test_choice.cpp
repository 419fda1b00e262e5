#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "cdsndp/choice.hpp"
#include "cdsndp/error.hpp"
#include "doctest.h"

using namespace cdsndp;

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

}  // namespace

TEST_CASE("utility of a zero-attribute alternative is its constant") {
  const auto spec = UtilitySpec::mnl(0.002, false);
  CHECK(utility_competitor(Mode::Rail, ModeAttributes{}, 0.0, spec) == doctest::Approx(0.338));
  CHECK(utility_competitor(Mode::Road, ModeAttributes{}, 0.0, spec) == doctest::Approx(2.06));
  CHECK(utility_operator(OperatorAttributes{}, 0.0, 0.0, spec) == 0.0);
}

TEST_CASE("operator utility terms") {
  const auto spec = UtilitySpec::mnl(0.002, false);
  const OperatorAttributes attrs{20.0, 1.0, 1.0};
  const double expected = 0.141 + 1.49 - 5.76 * (250.0 / 1000.0 + 0.002 * 20.0) + 0.0229 * 3.0;
  CHECK(utility_operator(attrs, 250.0, 3.0, spec) == doctest::Approx(expected));
  // Price and frequency enter affinely.
  const double u0 = utility_operator(attrs, 200.0, 2.0, spec);
  CHECK(utility_operator(attrs, 201.0, 2.0, spec) - u0 == doctest::Approx(-5.76 / 1000.0));
  CHECK(utility_operator(attrs, 200.0, 3.0, spec) - u0 == doctest::Approx(0.0229));
  Draw d{0.7, -9.0};
  CHECK(utility_operator(attrs, 200.0, 2.0, spec, &d) ==
        doctest::Approx(0.141 + 1.49 - 9.0 * (0.2 + 0.04) + 0.0229 * 2.0 + 0.7));
  // The seaport dummy applies to IWT only.
  const ModeAttributes rail{300.0, 10.0, 4.0, 1.0};
  CHECK(utility_competitor(Mode::Rail, rail, 1.0, spec) == utility_competitor(Mode::Rail, rail, 0.0, spec));
  CHECK(utility_competitor(Mode::Iwt, rail, 1.0, spec) - utility_competitor(Mode::Iwt, rail, 0.0, spec) ==
        doctest::Approx(1.49));
}

TEST_CASE("logit shares") {
  const std::array<double, 2> equal{1.3, 1.3};
  CHECK(logit_share(equal)[0] == doctest::Approx(0.5));
  // Strategy A of the two-mode example at price 7: operator -7+5 against road -15.
  const std::array<double, 2> a{-2.0, -15.0};
  CHECK(logit_share(a)[0] == doctest::Approx(1.0 / (1.0 + std::exp(-13.0))));
  CHECK(logit_share(a)[0] > 0.9999);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 30.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> u(2 + t % 4);
    for (double& v : u) v = n(rng);
    const auto p = logit_share(u);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
    auto shifted = u;
    for (double& v : shifted) v += 700.0;
    const auto q = logit_share(shifted);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
  const std::array<double, 1> one{0.0};
  CHECK_THROWS_AS(logit_share(one), InputError);
  const std::array<double, 2> inf{0.0, INFINITY};
  CHECK_THROWS_AS(logit_share(inf), InputError);
}

TEST_CASE("samples are reproducible and well formed") {
  const auto spec = UtilitySpec::mixed_logit(0.002);
  const auto s1 = draw_sample(spec, 50, 9, 4, 3);
  const auto s2 = draw_sample(spec, 50, 9, 4, 3);
  CHECK(s1.eps == s2.eps);
  CHECK(s1.beta_c == s2.beta_c);
  CHECK(s1.eps.size() == 50 * 4 * 3);
  CHECK(s1.beta_c.size() == 50);
  for (double b : s1.beta_c) CHECK(b < 0.0);
  CHECK(draw_sample(spec, 50, 10, 4, 3).eps != s1.eps);
  CHECK_THROWS_AS(draw_sample(spec, 0, 9, 4, 3), InputError);

  const auto mnl = draw_sample(UtilitySpec::mnl(0.002), 5, 1, 2, 2);
  CHECK(mnl.beta_c.empty());
  CHECK(mnl.intermodal_cost(UtilitySpec::mnl(0.002), 3) == -5.76);
  const auto det = draw_sample(UtilitySpec::mnl(0.002, false), 5, 1, 2, 2);
  for (double e : det.eps) CHECK(e == 0.0);

  auto constant = UtilitySpec::mixed_logit(0.002);
  constant.cost_coeff = LognormalCost{2.0, 0.0};
  for (double b : draw_sample(constant, 20, 1, 1, 2).beta_c) CHECK(b == doctest::Approx(-std::exp(2.0)));
}

TEST_CASE("gumbel errors have the standard moments") {
  const std::size_t n = 1000000;
  const auto s = draw_sample(UtilitySpec::mnl(0.002), n, 42, 1, 1);
  double mean = 0.0;
  for (double e : s.eps) mean += e;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double e : s.eps) var += (e - mean) * (e - mean);
  var /= static_cast<double>(n - 1);
  CHECK(mean == doctest::Approx(kEulerGamma).epsilon(0.01));
  CHECK(var == doctest::Approx(M_PI * M_PI / 6.0).epsilon(0.01));
}

TEST_CASE("choice rows per volume") {
  CHECK(choice_rows_for_volume(0.0) == 1);
  CHECK(choice_rows_for_volume(9999.0) == 1);
  CHECK(choice_rows_for_volume(10000.0) == 2);
  CHECK(choice_rows_for_volume(25000.0) == 3);
  CHECK_THROWS_AS(choice_rows_for_volume(-1.0), InputError);
}
