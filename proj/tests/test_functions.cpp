#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pconvex/functions.hpp"

using namespace pconvex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Each analytic derivative against a centered difference of its predecessor.
void check_stack(const FunctionSpec& f, double lo, double hi, int max_k, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 25; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double x = lo + (hi - lo) * (0.05 + 0.9 * u);
    for (int k = 1; k <= max_k; ++k) {
      const double h = 1e-4 * std::max(1.0, std::abs(x));
      const double fd = (f.derivative(k - 1, x + h) - f.derivative(k - 1, x - h)) / (2 * h);
      const double an = f.derivative(k, x);
      INFO(f.label() << " k=" << k << " x=" << x);
      CHECK_THAT(an, WithinAbs(fd, 1e-4 * std::max(1.0, std::abs(an))));
    }
  }
}

}  // namespace

TEST_CASE("catalog derivative stacks match finite differences", "[functions]") {
  check_stack(shifted_power(3.0), 0.0, 2.0, 5);
  check_stack(shifted_power(2.5, 1.0), 1.0, 3.0, 4);
  check_stack(exponential(0.7), 0.0, 3.0, 6);
  check_stack(exp_taylor_remainder(2), 0.0, 3.0, 5);
  check_stack(exp_taylor_remainder(3, 2.0), 0.0, 1.5, 5);
  check_stack(log_affine(4.0), 0.5, 4.0, 5);
  check_stack(polynomial({1.0, -2.0, 0.5, 3.0}), -1.0, 2.0, 5);
  check_stack(affine_precompose(exponential(1.0), 2.0, 1.0), 0.0, 1.0, 4);
  check_stack(weighted_sum({{2.0, shifted_power(2.0)}, {0.5, exponential(1.0)}}), 0.0, 2.0, 4);
  check_stack(product(shifted_power(2.0), exponential(-1.0)), 0.0, 3.0, 4);
  check_stack(taylor_remainder(exponential(1.0), 2), 0.0, 2.0, 5);
  check_stack(antiderivative(exponential(1.0), 0.0), 0.0, 2.0, 4);
}

TEST_CASE("catalog values", "[functions]") {
  CHECK(shifted_power(3.0)(2.0) == 8.0);
  CHECK(shifted_power(2.0).derivative(3, 1.7) == 0.0);
  CHECK(shifted_power(4.0, 1.0).derivative(4, 9.0) == 24.0);
  CHECK_THAT(exp_taylor_remainder(1)(1.0), WithinRel(std::exp(1.0) - 2.0, 1e-15));
  CHECK_THAT(log_affine(2.0)(1.0), WithinAbs(-0.5, 1e-15));
  CHECK(polynomial({1, 2, 3})(2.0) == 17.0);
  CHECK(polynomial({1, 2, 3}).derivative(2, 5.0) == 6.0);
  CHECK_THAT(antiderivative(exponential(1.0), 0.0)(1.0), WithinAbs(std::exp(1.0) - 2.0, 1e-14));
}

TEST_CASE("taylor remainder vanishes to order p at 0", "[functions]") {
  const auto r = taylor_remainder(exponential(1.0), 3);
  for (int k = 0; k <= 3; ++k) CHECK(r.derivative(k, 0.0) == 0.0);
  CHECK_THAT(r(1.0), WithinRel(exp_taylor_tail(3, 1.0), 1e-14));
  CHECK_THROWS_AS(taylor_remainder(exponential(1.0, {-1.0, 1.0}), 2), Error);
}

TEST_CASE("numeric fallback beyond the analytic order", "[functions]") {
  const auto f = FunctionSpec::numeric({0.0, 2.0}, [](double x) { return std::exp(x); }, "e^x");
  CHECK(f.provenance(0) == Provenance::analytic);
  CHECK(f.provenance(2) == Provenance::numeric);
  CHECK_THAT(f.derivative(2, 1.0), WithinRel(std::exp(1.0), 1e-5));
  CHECK_THAT(f.derivative(1, 0.0), WithinRel(1.0, 1e-6));
  CHECK_THROWS_AS(f.derivative(5, 1.0), Error);
  CHECK(exponential().provenance(16) == Provenance::analytic);
}

TEST_CASE("compose_inverse", "[functions]") {
  // l = x^4, f = x^2: l o f^{-1} = y^2
  const auto h = compose_inverse(shifted_power(4.0), shifted_power(2.0), 10.0);
  CHECK(h.domain().lo == 0.0);
  CHECK_THAT(h.domain().hi, WithinRel(100.0, 1e-15));
  for (double y : {0.0, 0.3, 2.0, 50.0, 99.0}) {
    INFO("y = " << y);
    CHECK_THAT(h(y), WithinAbs(y * y, 1e-10 * std::max(1.0, y * y)));
    CHECK_THAT(h.derivative(1, y), WithinAbs(2 * y, 1e-6 * std::max(1.0, y)));
    CHECK_THAT(h.derivative(2, y), WithinAbs(2.0, 1e-6));
    CHECK_THAT(h.derivative(3, y), WithinAbs(0.0, 1e-4));
  }
  CHECK(h.provenance(3) == Provenance::mixed);
  // l = e^x - 1, f = x: identity inverse
  const auto g = compose_inverse(exp_taylor_remainder(0), shifted_power(1.0), 3.0);
  CHECK_THAT(g.derivative(2, 1.0), WithinRel(std::exp(1.0), 1e-9));
  CHECK_THROWS_AS(compose_inverse(shifted_power(2.0), polynomial({0.0, -1.0, 0.0, 1.0}, {0.0, 2.0})), Error);
}

TEST_CASE("abs_derivative rejects sign changes", "[functions]") {
  const auto f = polynomial({0.0, -1.0, 0.0, 1.0}, {-2.0, 2.0});  // x^3 - x
  CHECK_THROWS_AS(abs_derivative(f, -1.0, 1.0), Error);
  const auto d = abs_derivative(log_affine(1.0), 0.1, 1.0);
  CHECK_THAT(d(0.5), WithinRel(1.0, 1e-15));
  const auto e = abs_derivative(exponential(-1.0), 0.0, 1.0);
  CHECK_THAT(e(0.0), WithinRel(1.0, 1e-15));
  CHECK_THAT(e.derivative(1, 0.0), WithinRel(-1.0, 1e-15));
}

TEST_CASE("descriptors round trip", "[functions][json]") {
  const FunctionSpec fs[] = {
      shifted_power(2.5, 0.5),
      exponential(0.3, {0.0, 4.0}),
      exp_taylor_remainder(2, 1.5),
      log_affine(3.0),
      polynomial({0.1, 0.2, 1.0 / 3.0}),
      affine_precompose(exponential(1.0), 2.0, 0.5),
      weighted_sum({{1.0, shifted_power(2.0)}, {0.25, exponential(1.0)}}),
      product(shifted_power(2.0), exponential(1.0)),
      taylor_remainder(exponential(2.0), 2),
      antiderivative(shifted_power(3.0), 0.0),
      compose_inverse(shifted_power(4.0), shifted_power(2.0), 5.0),
  };
  for (const auto& f : fs) {
    INFO(f.descriptor().dump());
    REQUIRE(f.serializable());
    const auto g = make_catalog(json::parse(f.descriptor().dump()));
    CHECK(g.descriptor() == f.descriptor());
    CHECK(g.domain().lo == f.domain().lo);
    CHECK(g.domain().hi == f.domain().hi);
    const double x = f.domain().lo + 0.37 * (f.domain().capped_hi(10.0) - f.domain().lo);
    CHECK(g(x) == f(x));
    CHECK(g.derivative(2, x) == f.derivative(2, x));
  }
}

TEST_CASE("descriptor errors name the field", "[functions][json]") {
  auto msg = [](const char* text) {
    try {
      make_catalog(json::parse(text));
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(R"({"family":"nope"})").find("nope") != std::string::npos);
  CHECK(msg(R"({"family":"shifted-power","params":{}})").find("\"q\"") != std::string::npos);
  CHECK(msg(R"({"family":"shifted-power","params":{"q":0.5}})").find("q >= 1") != std::string::npos);
  CHECK(msg(R"({"family":"exponential","domain":[1,0]})").find("a < b") != std::string::npos);
  CHECK(msg(R"({"family":"exponential","domain":[0,"big"]})").find("inf") != std::string::npos);
  CHECK(make_catalog(json::parse(R"({"family":"exponential","domain":[0,"inf"]})")).domain().hi == kInf);
}

TEST_CASE("taylor remainder keeps relative accuracy near 0", "[functions]") {
  const auto r = taylor_remainder(exponential(1.0), 2);
  for (double x : {1e-6, 1e-3, 0.1, 0.5, 2.0, 10.0}) {
    INFO("x = " << x);
    CHECK_THAT(r(x), WithinRel(exp_taylor_tail(2, x), 1e-14));
    CHECK_THAT(r.derivative(1, x), WithinRel(exp_taylor_tail(1, x), 1e-14));
  }
  // polynomial remainder is its top terms exactly
  const auto q = taylor_remainder(polynomial({1, 1, 1, 1, 1}), 2);
  CHECK_THAT(q(0.5), WithinRel(0.125 + 0.0625, 1e-15));
}
