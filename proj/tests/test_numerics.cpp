#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pconvex/numerics.hpp"

using namespace pconvex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gamma on integers and half integers", "[numerics][gamma]") {
  CHECK(pconvex::gamma(1.0) == 1.0);
  CHECK(pconvex::gamma(5.0) == 24.0);
  CHECK_THAT(pconvex::gamma(0.5), WithinRel(std::sqrt(std::numbers::pi), 1e-13));
  CHECK_THAT(pconvex::gamma(1.5), WithinRel(0.5 * std::sqrt(std::numbers::pi), 1e-13));
}

TEST_CASE("gamma matches 40-digit reference values", "[numerics][gamma]") {
  // mpmath, mp.dps = 40
  const std::pair<double, double> ref[] = {
      {1e-3, 999.42377248459546611},       {0.1, 9.5135076986687318363},
      {2.5, 1.3293403881791370205},        {7.3, 1271.4236336639092731},
      {33.3, 7.487577596522706608e+35},    {100.5, 9.3209631040827166083e+156},
      {169.9, 2.5552232692967025483e+304}, {170.0, 4.2690680090047052749e+304},
  };
  for (auto [x, g] : ref) {
    INFO("x = " << x);
    CHECK_THAT(pconvex::gamma(x), WithinRel(g, 1e-12));
  }
}

TEST_CASE("gamma recurrence and agreement with libm", "[numerics][gamma]") {
  for (int i = 1; i <= 500; ++i) {
    const double x = 0.1 * i;
    INFO("x = " << x);
    CHECK_THAT(pconvex::gamma(x + 1.0), WithinRel(x * pconvex::gamma(x), 1e-11));
    CHECK_THAT(pconvex::gamma(x), WithinRel(std::tgamma(x), 1e-12));
    CHECK_THAT(log_gamma(x), WithinAbs(std::lgamma(x), 1e-12 * std::max(1.0, std::abs(std::lgamma(x)))));
  }
}

TEST_CASE("gamma rejects its domain boundary", "[numerics][gamma]") {
  CHECK_THROWS_AS(pconvex::gamma(0.0), Error);
  CHECK_THROWS_AS(pconvex::gamma(-1.5), Error);
  try {
    pconvex::gamma(171.0);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::overflow);
  }
}

TEST_CASE("integrate reproduces closed forms", "[numerics][quadrature]") {
  CHECK_THAT(integrate([](double x) { return x; }, 0, 1).value, WithinAbs(0.5, 1e-14));
  CHECK_THAT(integrate([](double x) { return x * x * x; }, 0, 1).value, WithinAbs(0.25, 1e-14));
  const auto r = integrate([](double x) { return std::exp(x); }, 0, 1);
  CHECK_THAT(r.value, WithinAbs(std::numbers::e - 1.0, 1e-13));
  CHECK(r.error <= 1e-10);

  QuadraturePlan simpson;
  simpson.rule = QuadratureRule::adaptive_simpson;
  CHECK_THAT(integrate([](double x) { return std::exp(x); }, 0, 1, simpson).value,
             WithinAbs(std::numbers::e - 1.0, 1e-10));
  CHECK_THAT(integrate([](double x) { return std::sqrt(x); }, 0, 1, simpson).value, WithinAbs(2.0 / 3.0, 1e-9));
}

TEST_CASE("integrate reports non-convergence with its best estimate", "[numerics][quadrature]") {
  QuadraturePlan plan;
  plan.max_refinements = 1;
  plan.node_count = 4;
  plan.abs_tolerance = 1e-15;
  try {
    integrate([](double x) { return std::sqrt(x); }, 0, 1, plan);
    FAIL("expected convergence error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::convergence);
    REQUIRE(e.best_estimate().has_value());
    CHECK_THAT(*e.best_estimate(), WithinAbs(2.0 / 3.0, 1e-2));
  }
}

TEST_CASE("integrate_jacobi absorbs the endpoint weight", "[numerics][quadrature]") {
  auto one = [](double) { return 1.0; };
  auto id = [](double t) { return t; };
  CHECK_THAT(integrate_jacobi(one, 0, 1, 1.0, WeightSide::left).value, WithinAbs(1.0, 1e-14));
  CHECK_THAT(integrate_jacobi(one, 0, 1, 0.5, WeightSide::left).value, WithinAbs(2.0, 1e-13));
  CHECK_THAT(integrate_jacobi(id, 0, 1, 1.0, WeightSide::left).value, WithinAbs(0.5, 1e-14));

  // int_0^1 t^(alpha-1) t^q dt = 1/(alpha+q); int_0^1 (1-t)^(alpha-1) t^q dt = B(alpha, q+1)
  for (double alpha : {0.05, 0.3, 0.5, 0.9, 1.5, 2.5, 7.0}) {
    for (int q = 0; q <= 5; ++q) {
      auto g = [q](double t) { return std::pow(t, q); };
      INFO("alpha = " << alpha << ", q = " << q);
      CHECK_THAT(integrate_jacobi(g, 0, 1, alpha, WeightSide::left).value, WithinRel(1.0 / (alpha + q), 1e-12));
      const double beta = std::tgamma(alpha) * std::tgamma(q + 1.0) / std::tgamma(alpha + q + 1.0);
      CHECK_THAT(integrate_jacobi(g, 0, 1, alpha, WeightSide::right).value, WithinRel(beta, 1e-12));
    }
  }
}

TEST_CASE("integrate and integrate_jacobi agree on smooth integrands", "[numerics][quadrature]") {
  const double a = 0.5, b = 2.0;
  for (int alpha : {1, 2, 3, 4}) {
    auto g = [](double t) { return std::exp(t) * std::cos(t); };
    auto left = [&](double t) { return std::pow(t - a, alpha - 1) * g(t); };
    auto right = [&](double t) { return std::pow(b - t, alpha - 1) * g(t); };
    CHECK_THAT(integrate_jacobi(g, a, b, alpha, WeightSide::left).value,
               WithinAbs(integrate(left, a, b).value, 1e-8));
    CHECK_THAT(integrate_jacobi(g, a, b, alpha, WeightSide::right).value,
               WithinAbs(integrate(right, a, b).value, 1e-8));
  }
}

TEST_CASE("Gauss-Jacobi weights integrate the weight itself", "[numerics][quadrature]") {
  for (double wa : {-0.5, 0.0, 1.5}) {
    for (double wb : {-0.7, 0.0, 0.25}) {
      const auto rule = gauss_jacobi(20, wa, wb);
      double sum = 0.0;
      for (double w : rule.weights) sum += w;
      const double mu0 = std::pow(2.0, wa + wb + 1) * std::tgamma(wa + 1) * std::tgamma(wb + 1) / std::tgamma(wa + wb + 2);
      CHECK_THAT(sum, WithinRel(mu0, 1e-13));
      CHECK(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
    }
  }
}

TEST_CASE("pnorm_shifted", "[numerics]") {
  CHECK_THAT(pnorm_shifted(0.5, 2), WithinAbs(0.7071067812, 1e-10));
  for (int k = 1; k <= 64; ++k) {
    CHECK(pnorm_shifted(0.0, k) == 0.0);
    CHECK(pnorm_shifted(1.0, k) == 1.0);
  }
  CHECK_THAT(pnorm_shifted(0.5, 3, 1e100), WithinRel(std::cbrt(0.5) * 1e100, 1e-15));
  CHECK_THROWS_AS(pnorm_shifted(-1.0, 2), Error);
}

TEST_CASE("invert_monotone", "[numerics][root]") {
  CHECK_THAT(invert_monotone([](double x) { return x * x; }, 4.0, 0.0, 10.0), WithinRel(2.0, 1e-15));
  CHECK_THAT(invert_monotone([](double x) { return x * x * x; }, 0.125, 0.0, 1.0), WithinRel(0.5, 1e-15));
  CHECK_THAT(invert_monotone([](double x) { return std::expm1(x); }, std::numbers::e - 1.0, 0.0, 2.0),
             WithinRel(1.0, 1e-15));
  // no bracket: expands geometrically
  CHECK_THAT(invert_monotone([](double x) { return x * x; }, 1e6, 0.0), WithinRel(1e3, 1e-15));
  CHECK_THROWS_AS(invert_monotone([](double x) { return x; }, 5.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(invert_monotone([](double x) { return std::tanh(x); }, 2.0, 0.0), Error);
}

TEST_CASE("invert_monotone is deterministic", "[numerics][root]") {
  auto f = [](double x) { return x * x * x + x; };
  const double a = invert_monotone(f, 3.7, 0.0, 5.0);
  const double b = invert_monotone(f, 3.7, 0.0, 5.0);
  CHECK(a == b);
}

TEST_CASE("fd_derivative", "[numerics][fd]") {
  CHECK_THAT(fd_derivative([](double x) { return x * x; }, 3.0, 1), WithinAbs(6.0, 1e-6));
  CHECK_THAT(fd_derivative([](double x) { return x * x * x; }, 1.0, 2), WithinAbs(6.0, 1e-4));
  CHECK_THAT(fd_derivative([](double x) { return std::exp(x); }, 0.0, 3), WithinAbs(1.0, 1e-3));
  CHECK_THAT(fd_derivative([](double x) { return std::exp(x); }, 0.0, 4), WithinAbs(1.0, 1e-3));
  // one-sided near the domain boundary
  auto sq = [](double x) { return std::pow(x, 3.5); };
  CHECK_THAT(fd_derivative(sq, 0.001, 1, 0.0, 1.0), WithinRel(3.5 * std::pow(0.001, 2.5), 1e-3));
  CHECK_THAT(fd_derivative([](double x) { return std::exp(x); }, 1.0, 2, 0.0, 1.0), WithinRel(std::exp(1.0), 1e-5));
  CHECK_THAT(fd_derivative([](double x) { return std::exp(x); }, 0.0, 4, 0.0, 1.0), WithinRel(1.0, 1e-3));
}

TEST_CASE("exp_taylor_tail avoids cancellation", "[numerics]") {
  CHECK_THAT(exp_taylor_tail(2, 1.0), WithinRel(std::numbers::e - 2.5, 1e-15));
  const double x = 1e-6;
  CHECK_THAT(exp_taylor_tail(1, x), WithinRel(x * x / 2 + x * x * x / 6, 1e-12));
  CHECK_THAT(exp_taylor_tail(0, x), WithinRel(std::expm1(x), 1e-15));
  CHECK(exp_taylor_tail(-1, 2.0) == std::exp(2.0));
  CHECK_THAT(exp_taylor_tail(3, 10.0), WithinRel(std::exp(10.0) - (1 + 10 + 50 + 1000.0 / 6), 1e-14));
  CHECK_THAT(exp_taylor_tail(12, 3.0), WithinRel(3.2436231104436430515e-4, 1e-13));  // mpmath
}
