#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pconvex/distributions.hpp"

using namespace pconvex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("shifted moments of simple laws", "[distributions]") {
  const auto coin = two_point(0.0, 1.0, 0.5);
  const auto m = shifted_moment(coin, 0.0, 2);
  CHECK_THAT(m.raw, WithinAbs(0.5, 1e-15));
  CHECK_THAT(m.norm, WithinAbs(std::sqrt(0.5), 1e-15));
  CHECK(m.method == MomentMethod::exact_sum);

  for (int k = 1; k <= 12; ++k) CHECK_THAT(shifted_moment(point_mass(3.5), 1.0, k).norm, WithinAbs(2.5, 1e-14));

  const auto u = shifted_moment(uniform(0.0, 1.0), 0.0, 2);
  CHECK_THAT(u.raw, WithinAbs(1.0 / 3.0, 1e-14));
  CHECK_THAT(u.norm, WithinAbs(0.5773502691896258, 1e-14));
  CHECK(u.method == MomentMethod::quadrature);

  // reflected side: E(b - X)^2 for uniform [0, 2] is 4/3
  CHECK_THAT(shifted_moment(uniform(0.0, 2.0), 2.0, 2, MomentSide::below).raw, WithinAbs(4.0 / 3.0, 1e-13));
}

TEST_CASE("two-point moments are exact", "[distributions]") {
  for (double t : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (int p = 0; p <= 6; ++p) {
      const auto X = two_point(2.0, 5.0, t);
      CHECK(shifted_moment(X, 2.0, p + 1).raw == (1.0 - t) * std::pow(3.0, p + 1));
    }
  }
  CHECK(two_point(0, 1, 1).discrete().atoms.size() == 1);
  CHECK_THAT(mean(two_point(2, 5, 0.25)), WithinAbs(4.25, 1e-15));
}

TEST_CASE("moment errors", "[distributions]") {
  CHECK_THROWS_AS(shifted_moment(uniform(0, 1), 0.5, 2), Error);
  CHECK_THROWS_AS(shifted_moment(uniform(0, 1), 0.0, 65), Error);
  try {
    shifted_moment(pareto(2.0, 1.0), 0.0, 2);
    FAIL("expected moment-infinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::moment_infinite);
  }
  // finite second moment of a Pareto(3, 1): 3
  const auto m = shifted_moment(pareto(3.0, 1.0), 0.0, 2);
  CHECK_THAT(m.raw, WithinAbs(3.0, std::max(1e-3, 2 * m.error_estimate)));
  CHECK(m.error_estimate < 1e-2);
}

TEST_CASE("no overflow at high order and large scale", "[distributions]") {
  const auto X = two_point(0.0, 1e200, 0.5);
  const auto m = shifted_moment(X, 0.0, 64);
  CHECK_THAT(m.norm, WithinRel(1e200 * std::pow(0.5, 1.0 / 64), 1e-14));
}

TEST_CASE("norms are monotone in the order", "[distributions][property]") {
  const RandomVariable laws[] = {two_point(0, 3, 0.3), uniform(1, 4), beta_like(2, 3, 0, 2), fractional_hh(0.5, 0, 1),
                                 RandomVariable(Discrete{{0.5, 1, 2.5, 4}, {0.1, 0.2, 0.3, 0.4}})};
  for (const auto& X : laws) {
    double prev = 0.0;
    for (int k = 1; k <= 16; ++k) {
      const double n = shifted_moment(X, X.support().lo, k).norm;
      CHECK(n >= prev - 1e-12 * std::max(1.0, prev));
      prev = n;
    }
  }
}

TEST_CASE("expect", "[distributions]") {
  const auto cube = shifted_power(3.0);
  CHECK_THAT(expect(two_point(0, 1, 0.5), cube).value, WithinAbs(0.5, 1e-15));
  CHECK_THAT(expect(point_mass(1.7), cube).value, WithinAbs(1.7 * 1.7 * 1.7, 1e-14));
  CHECK_THAT(expect(uniform(0, 1), cube).value, WithinAbs(0.25, 1e-14));
  CHECK_THROWS_AS(expect(uniform(-1, 1), cube), Error);  // outside [0, inf)
  CHECK_THROWS_AS(expect(exponential_law(1.0), log_affine(2.0)), Error);
}

TEST_CASE("density engines against closed forms", "[distributions]") {
  // beta-like(2, 3) on [0, 1]: E X = 2/5, E X^2 = 1/5
  const auto B = beta_like(2, 3, 0, 1);
  CHECK_THAT(mean(B), WithinAbs(0.4, 1e-14));
  CHECK_THAT(expect(B, [](double x) { return x * x; }).value, WithinAbs(0.2, 1e-14));
  // fractional density: E (X - a)^q = (1/2)(alpha/(alpha+q) + alpha B(alpha, q+1)) (b - a)^q
  for (double alpha : {0.1, 0.5, 1.0, 2.5, 7.0}) {
    const auto F = fractional_hh(alpha, 1.0, 3.0);
    for (int q = 0; q <= 4; ++q) {
      const double beta = std::tgamma(alpha) * std::tgamma(q + 1.0) / std::tgamma(alpha + q + 1.0);
      const double ref = 0.5 * (alpha / (alpha + q) + alpha * beta) * std::pow(2.0, q);
      INFO("alpha = " << alpha << " q = " << q);
      CHECK_THAT(expect(F, [q](double x) { return std::pow(x - 1.0, q); }).value, WithinRel(ref, 1e-12));
    }
    const auto e = expect(F, [](double x) { return std::exp(x); });
    const double pdf_route = integrate([&](double x) { return std::exp(x) * F.density().pdf(x); }, 1.0, 3.0,
                                       QuadraturePlan{QuadratureRule::adaptive_simpson, 64, 1e-9, 60})
                                 .value;
    if (alpha >= 1.0) CHECK_THAT(e.value, WithinRel(pdf_route, 1e-8));
  }
  // exponential(2): E e^X = 2, E X^3 = 6/8
  const auto E = exponential_law(2.0);
  CHECK_THAT(expect(E, [](double x) { return std::exp(x); }).value, WithinRel(2.0, 1e-8));
  const auto m3 = shifted_moment(E, 0.0, 3);
  CHECK(std::abs(m3.raw - 0.75) <= m3.error_estimate);
  CHECK(m3.error_estimate < 1e-6);
  CHECK_THROWS_AS(expect(E, [](double x) { return std::exp(2.5 * x); }), Error);
}

TEST_CASE("custom densities", "[distributions]") {
  const auto X = custom_density([](double x) { return 2 * x; }, 0, 1);
  CHECK_THAT(mean(X), WithinAbs(2.0 / 3.0, 1e-13));
  CHECK_THROWS_AS(custom_density([](double x) { return x; }, 0, 1), Error);
  const auto s = sample_mc(X, 20000, 3);
  CHECK_THAT(mean(s), WithinAbs(2.0 / 3.0, 5 * std::sqrt(1.0 / 18 / 20000)));
}

TEST_CASE("sample_mc", "[distributions][mc]") {
  const auto one = sample_mc(point_mass(2.0), 1, 99);
  CHECK(one.sample().values == std::vector<double>{2.0});

  const auto coin = two_point(0, 1, 0.5);
  const auto s = sample_mc(coin, 100000, 42);
  const auto e = expect(s, [](double x) { return x; });
  CHECK(std::abs(e.value - 0.5) <= 5 * 0.5 / std::sqrt(1e5));
  CHECK(e.error_estimate > 0.0);
  CHECK(sample_mc(coin, 1000, 7).sample().values == sample_mc(coin, 1000, 7).sample().values);
  CHECK(sample_mc(coin, 1000, 7).sample().values != sample_mc(coin, 1000, 8).sample().values);

  // sample expectation converges to the exact one
  const RandomVariable D(Discrete{{0.0, 1.0, 3.0}, {0.2, 0.5, 0.3}});
  const auto f = [](double x) { return x * x; };
  const auto exact = expect(D, f).value;
  const auto mc = expect(sample_mc(D, 100000, 5), f);
  CHECK(std::abs(mc.value - exact) <= 5 * mc.error_estimate);
  const auto m = shifted_moment(sample_mc(D, 1000, 11), 0.0, 2);
  CHECK(m.method == MomentMethod::monte_carlo);
  CHECK(m.mc_n == 1000);
  CHECK(m.mc_seed == 11u);

  const auto F = fractional_hh(0.5, 0, 1);
  const auto fs = sample_mc(F, 100000, 1);
  CHECK(std::abs(mean(fs) - 0.5) <= 5 * std::sqrt(expect(F, [](double x) { return (x - .5) * (x - .5); }).value / 1e5));
}

TEST_CASE("construction checks", "[distributions]") {
  CHECK_THROWS_AS(RandomVariable(Discrete{{0, 1}, {0.5, 0.6}}), Error);
  CHECK_THROWS_AS(RandomVariable(Discrete{{0, 1}, {1.5, -0.5}}), Error);
  CHECK_THROWS_AS(RandomVariable(Discrete{{0, 5}, {0.5, 0.5}}, Interval{0, 1}), Error);
  CHECK_THROWS_AS(RandomVariable(Sample{{}, std::nullopt}), Error);
  CHECK_THROWS_AS(two_point(1, 0, 0.5), Error);
  CHECK_THROWS_AS(two_point(0, 1, 1.5), Error);
  CHECK_THROWS_AS(beta_like(0.5, 2, 0, 1), Error);
}

TEST_CASE("distribution descriptors", "[distributions][json]") {
  const char* texts[] = {
      R"({"kind":"discrete","atoms":[0,1],"probs":[0.5,0.5]})",
      R"({"kind":"sample","values":[1,2,3]})",
      R"({"kind":"density","family":"uniform","params":{},"support":[0,1]})",
      R"({"kind":"density","family":"beta-like","params":{"alpha":2,"beta":3},"support":[0,2]})",
      R"({"kind":"density","family":"fractional-hh","params":{"alpha":0.5},"support":[0,1]})",
      R"({"kind":"density","family":"exponential","params":{"rate":1.5},"support":[0,"inf"]})",
      R"({"kind":"density","family":"pareto","params":{"shape":3},"support":[1,"inf"]})",
  };
  for (const char* t : texts) {
    INFO(t);
    const auto X = random_variable_from_json(json::parse(t));
    const auto Y = random_variable_from_json(to_json(X));
    CHECK(to_json(X) == to_json(Y));
    CHECK(mean(X) == mean(Y));
  }
  CHECK_THROWS_AS(random_variable_from_json(json::parse(R"({"kind":"density","family":"uniform","support":[0,"inf"]})")), Error);
  CHECK_THROWS_AS(random_variable_from_json(json::parse(R"({"kind":"weird"})")), Error);
  CHECK_THROWS_AS(random_variable_from_json(json::parse(R"({"kind":"discrete","atoms":[0,"x"],"probs":[1,0]})")), Error);
}
