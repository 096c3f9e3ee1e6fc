#include <catch_amalgamated.hpp>

#include "pconvex/convexity.hpp"

using namespace pconvex;

TEST_CASE("certify_I examples", "[convexity]") {
  CHECK(certify_I(shifted_power(2.0), 1, 0, 1).pass);
  const auto id = certify_I(shifted_power(1.0), 1, 0, 1);
  REQUIRE_FALSE(id.pass);
  REQUIRE(id.witness);
  CHECK(id.witness->point == 0.0);
  CHECK(id.witness->condition == "f^(1)(a) = 0");
  CHECK(id.witness->margin < -id.slack_used);
  CHECK(certify_I(taylor_remainder(exponential(1.0), 2), 2, 0, 3).pass);
  CHECK(certify_I(exp_taylor_remainder(2), 2, 0, 3).pass);
  // p = 0 is plain convexity
  CHECK(certify_I(exponential(1.0), 0, 0, 2).pass);
  CHECK_FALSE(certify_I(log_affine(2.0), 0, 0.5, 2).pass);
  CHECK(certify_I(shifted_power(2.0), 1, 0, 1).provenance == Provenance::analytic);
}

TEST_CASE("certify_I falls back to differences", "[convexity]") {
  // x^4 with an analytic stack to order 1 only
  const auto base = shifted_power(4.0);
  const FunctionSpec f({0.0, 2.0}, [base](double x, int k) { return base.derivative(k, x); }, 1, "x^4 (order 1)");
  const auto c = certify_I(f, 1, 0, 2);
  CHECK(c.pass);
  CHECK(c.provenance == Provenance::mixed);
  CHECK(c.slack_used == 1e-5);
  // -x^3 is concave on [0, 2]
  const auto g = polynomial({0, 0, 0, -1}, {0.0, 2.0});
  const FunctionSpec h({0.0, 2.0}, [g](double x, int k) { return g.derivative(k, x); }, 0, "-x^3 (values)");
  CHECK_FALSE(certify_I(h, 0, 0, 2).pass);
}

TEST_CASE("certify_D uses the f' >= 0, f'' <= 0 pattern", "[convexity]") {
  CHECK(certify_D(log_affine(2.0), 1, 0.05, 2.0).pass);
  const auto sq = certify_D(shifted_power(2.0), 1, 0, 1);
  REQUIRE_FALSE(sq.pass);
  CHECK(sq.witness->margin <= -0.5);
  const double b = 1.5;
  CHECK(certify_D(polynomial({-b * b, 2 * b, -1}, {0.0, b}), 1, 0, b).pass);
  // f'(b) != 0 alone
  CHECK_FALSE(certify_D(polynomial({0, 1}, {0.0, 1.0}), 1, 0, 1).pass);
}

TEST_CASE("certify_Lp", "[convexity]") {
  for (int p = 1; p <= 6; ++p) {
    const auto c = certify_Lp(shifted_power(p + 1.0), p, 10.0);
    INFO("p = " << p);
    CHECK(c.pass);
    CHECK(std::abs(c.min_margin) <= 1e-12);  // tight
  }
  const auto f = certify_Lp(shifted_power(2.0), 2, 10.0);
  REQUIRE_FALSE(f.pass);
  CHECK(f.witness->condition == "l'' x >= p l'");
  CHECK(certify_Lp(shifted_power(3.0), 2, 50.0).pass);
  CHECK(certify_Lp(shifted_power(5.0), 2, 5.0).pass);
  CHECK(certify_Lp(weighted_sum({{1.0, shifted_power(3.0)}, {1.0, shifted_power(4.0)}}), 2, 10.0).pass);
  CertifyOptions strict;
  strict.slack_strict = 1e-3;
  CHECK_FALSE(certify_Lp(shifted_power(3.0), 2, 10.0, strict).pass);  // l'''' = 0
}

TEST_CASE("k_p convexity and ratio monotonicity", "[convexity]") {
  CHECK(check_kp_convex(shifted_power(2.0), 1, 0, 1).pass);
  CHECK(check_kp_convex(shifted_power(3.0), 1, 0, 1).pass);
  CHECK(check_kp_convex(shifted_power(4.0), 3, 0, 1).pass);
  CHECK(check_kp_convex(exp_taylor_remainder(2), 2, 0, 3).pass);
  CHECK_FALSE(check_kp_convex(shifted_power(1.5), 1, 0, 1).pass);  // k_1 = y^(3/4)

  CHECK(check_ratio_monotone(shifted_power(3.0), 1, 0, 1).pass);
  CHECK(check_ratio_monotone(shifted_power(2.0), 1, 0, 1).pass);
  CHECK(check_ratio_monotone(taylor_remainder(exponential(1.0), 2), 2, 0, 3).pass);
  CHECK(check_ratio_monotone(exp_taylor_remainder(2), 2, 0, 3).pass);
  CHECK_FALSE(check_ratio_monotone(shifted_power(2.0), 2, 0, 1).pass);  // g = 1/x
  CHECK_FALSE(check_ratio_monotone(exponential(1.0), 1, 0, 1).pass);    // f(0) = 1
}

TEST_CASE("catalog members certify and verdicts are grid-stable", "[convexity][property]") {
  struct Case {
    FunctionSpec f;
    int p;
    double a, b;
  };
  const Case members[] = {
      {shifted_power(2.0), 1, 0, 1},
      {shifted_power(5.0), 4, 0, 2},
      {shifted_power(3.5, 1.0), 2, 1, 3},
      {exp_taylor_remainder(1), 1, 0, 4},
      {exp_taylor_remainder(4, 2.0), 4, 0, 2},
      {taylor_remainder(exponential(1.0), 3), 3, 0, 3},
      {antiderivative(exponential(1.0), 0.0), 1, 0, 2},
      {antiderivative(shifted_power(2.0), 0.0), 2, 0, 2},
      {weighted_sum({{1.0, shifted_power(3.0)}, {2.0, exp_taylor_remainder(2)}}), 2, 0, 2},
  };
  for (const auto& m : members) {
    for (int grid : {256, 1024, 4096}) {
      CertifyOptions o;
      o.grid_size = grid;
      INFO(m.f.label() << " p=" << m.p << " grid=" << grid);
      CHECK(certify_I(m.f, m.p, m.a, m.b, o).pass);
      CHECK(check_kp_convex(m.f, m.p, m.a, m.b, o).pass);
      CHECK(check_ratio_monotone(m.f, m.p, m.a, m.b, o).pass);
    }
  }
  const Case non_members[] = {
      {shifted_power(1.0), 1, 0, 1},
      {exponential(1.0), 1, 0, 1},
      {shifted_power(2.0), 2, 0, 1},
      {log_affine(3.0), 0, 0.5, 3},
  };
  for (const auto& m : non_members)
    for (int grid : {256, 1024, 4096}) {
      CertifyOptions o;
      o.grid_size = grid;
      INFO(m.f.label() << " p=" << m.p << " grid=" << grid);
      CHECK_FALSE(certify_I(m.f, m.p, m.a, m.b, o).pass);
    }
}

TEST_CASE("lower orders inherit membership for shifted powers", "[convexity][property]") {
  for (int q = 2; q <= 8; ++q)
    for (int p = 1; p + 1 <= q; ++p)
      for (int k = 1; k <= p; ++k) {
        INFO("q=" << q << " p=" << p << " k=" << k);
        CHECK(certify_I(shifted_power(q, 0.5), k, 0.5, 2.0).pass);
      }
}

TEST_CASE("certificates serialize", "[convexity][json]") {
  const auto c = certify_I(shifted_power(1.0), 1, 0, 1);
  const auto j = to_json(c);
  CHECK(j["verdict"] == "fail");
  CHECK(j["witness"]["point"] == 0.0);
  CHECK(j["class"] == "I");
  CHECK_THROWS_AS(certify_I(log_affine(1.0), 1, 0.5, 2.0), Error);
}
