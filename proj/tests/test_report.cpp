#include <catch_amalgamated.hpp>

#include "pconvex/report.hpp"

using namespace pconvex;

TEST_CASE("csv numbers and escaping", "[report]") {
  CHECK(csv_number(0.1) == "0.10000000000000001");
  CHECK(csv_number(2.0) == "2");
  CHECK(csv_number(-kInf) == "-inf");
  CHECK(csv_number(std::optional<double>{}).empty());
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"x\"") == "\"say \"\"x\"\"\"");
}

TEST_CASE("csv round trip", "[report]") {
  Table t;
  t.header = {"x", "label", "lower_gap"};
  t.rows = {{"1", "(x-0.5)^3, shifted", "0.25"}, {"2", "line\nbreak", ""}, {"3", "q\"uote", "1e-300"}};
  const std::string text = t.to_csv();
  CHECK(text.find("\r\n") != std::string::npos);
  const Table back = parse_csv(text);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  std::string lf = text;
  for (std::size_t i; (i = lf.find("\r\n")) != std::string::npos;) lf.erase(i, 1);
  // embedded LF in a quoted field survives LF-only input too
  CHECK(parse_csv(lf).rows.size() == 3);
}

TEST_CASE("csv errors", "[report]") {
  CHECK_THROWS_AS(parse_csv(""), Error);
  CHECK_THROWS_AS(parse_csv("x,gap\r\n"), Error);
  CHECK_THROWS_AS(parse_csv("x,gap\n1\n"), Error);
  CHECK_THROWS_AS(parse_csv("x,gap\n1,\"2\n"), Error);
  CHECK_THROWS_AS(parse_csv("x,gap\n1,2\"3\n"), Error);
  try {
    parse_csv("x,gap\n1,2\n3\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("record 3") != std::string::npos);
  }
}

TEST_CASE("gap plot", "[report]") {
  const Table one = parse_csv("p,lower_gap,upper_gap\n1,0.5,0.25\n");
  const std::string svg = render_gap_plot(one);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("lower_gap") != std::string::npos);
  CHECK(svg == render_gap_plot(one));
  CHECK_THROWS_AS(render_gap_plot(parse_csv("p,value\n1,2\n")), Error);
  CHECK_THROWS_AS(render_gap_plot(parse_csv("p,x_gap\nabc,2\n")), Error);
}

TEST_CASE("parallel_map keeps input order", "[report]") {
  const auto v = parallel_map(1000, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_map(10, [](std::size_t i) -> int {
                    if (i == 7) fail(ErrorKind::input, "seven");
                    return 0;
                  }),
                  Error);
}

TEST_CASE("hh sweep gaps shrink with p", "[report][sweep]") {
  const Table t = sweep_hh();
  REQUIRE(t.rows.size() == 6);
  const auto lo = t.numbers(t.column("lower_gap")), hi = t.numbers(t.column("upper_gap"));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(lo[i] >= 0.0);
    CHECK(hi[i] >= 0.0);
    if (i) {
      CHECK(lo[i] <= lo[i - 1]);
      CHECK(hi[i] <= hi[i - 1]);
    }
  }
}

TEST_CASE("sweeps are deterministic", "[report][sweep]") {
  for (const auto& s : sweep_suites()) {
    INFO(s);
    const std::string a = run_sweep(s, 7).to_csv();
    const std::string b = run_sweep(s, 7).to_csv();
    CHECK(a == b);
    CHECK(render_gap_plot(parse_csv(a)) == render_gap_plot(parse_csv(b)));
  }
  CHECK(run_sweep("jensen", 7).to_csv() != run_sweep("jensen", 8).to_csv());
  CHECK_THROWS_AS(run_sweep("nope"), Error);
}

TEST_CASE("jensen sweep sandwich", "[report][sweep]") {
  const Table t = sweep_jensen(kDefaultSeed);
  REQUIRE(t.rows.size() == 200);
  const auto lo = t.numbers(t.column("lower")), or_ = t.numbers(t.column("oracle")), up = t.numbers(t.column("upper"));
  const auto err = t.numbers(t.column("oracle_error"));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(lo[i] <= or_[i] + 1e-8 + err[i]);
    CHECK(or_[i] <= up[i] + 1e-8 + err[i]);
  }
}
