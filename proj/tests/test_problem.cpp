#include <catch_amalgamated.hpp>

#include "pconvex/problem.hpp"

using namespace pconvex;
using Catch::Matchers::WithinAbs;

namespace {

const json kCube = {{"family", "shifted-power"}, {"params", {{"q", 3}}}};
const json kCoin = {{"kind", "discrete"}, {"atoms", {0, 1}}, {"probs", {0.5, 0.5}}};

ProblemFile make(const std::string& task, json params, std::optional<json> f = std::nullopt,
                 std::optional<json> d = std::nullopt) {
  ProblemFile p;
  p.task = task;
  p.params = std::move(params);
  p.function = std::move(f);
  p.distribution = std::move(d);
  return p;
}

ErrorKind kind_of(const ProblemFile& p) {
  try {
    execute(p);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::input;
}

}  // namespace

TEST_CASE("problem files round trip", "[problem]") {
  auto p = make("bound", {{"p", 2}, {"kind", "upper"}}, kCube, kCoin);
  p.tolerances = ToleranceProfile{};
  p.tolerances->eq_abs = 1e-12;
  const json j = to_json(p);
  CHECK(problem_from_json(j) == p);
  CHECK(problem_from_json(json::parse(j.dump())) == p);
  CHECK(to_json(problem_from_json(j)).dump() == j.dump());
}

TEST_CASE("problem file validation", "[problem]") {
  auto msg = [](const json& j) {
    try {
      problem_from_json(j);
    } catch (const Error& e) {
      return std::string(e.message());
    }
    return std::string();
  };
  CHECK(msg({{"task", "hh"}}).rfind("version", 0) == 0);
  CHECK(msg({{"version", 2}, {"task", "hh"}}).rfind("version", 0) == 0);
  CHECK(msg({{"version", 1}, {"task", "fly"}}).rfind("task", 0) == 0);
  CHECK(msg({{"version", 1}, {"task", "hh"}, {"extra", 1}}).rfind("extra", 0) == 0);
  CHECK(msg({{"version", 1}, {"task", "hh"}, {"params", 3}}).rfind("params", 0) == 0);
  CHECK(msg({{"version", 1}, {"task", "hh"}, {"tolerances", {{"eq_abs", -1}}}}).rfind("tolerances", 0) == 0);
  CHECK(msg({{"version", 1}, {"task", "hh"}, {"tolerances", {{"nope", 1}}}}).rfind("tolerances.nope", 0) == 0);
}

TEST_CASE("field diagnostics", "[problem]") {
  auto msg = [](const ProblemFile& p) {
    try {
      execute(p);
    } catch (const Error& e) {
      return std::string(e.message());
    }
    return std::string();
  };
  CHECK(msg(make("hh", {{"p", "two"}}, kCube)).rfind("params.p", 0) == 0);
  CHECK(msg(make("hh", {{"p", 2}})).rfind("function", 0) == 0);
  CHECK(msg(make("hh", {}, json{{"family", "shifted-power"}, {"params", {{"q", "x"}}}})).rfind("function", 0) == 0);
  CHECK(msg(make("bound", {}, kCube, json{{"kind", "discrete"}, {"atoms", {1}}})).rfind("distribution", 0) == 0);
  CHECK(msg(make("bound", {{"kind", "sideways"}}, kCube, kCoin)).rfind("params.kind", 0) == 0);
  CHECK(msg(make("sweep", {{"suite", "nope"}})).find("unknown sweep suite") != std::string::npos);
}

TEST_CASE("tasks execute", "[problem]") {
  const auto cert = execute(make("certify", {{"p", 2}, {"a", 0}, {"b", 3}}, kCube)).document;
  REQUIRE(cert);
  CHECK((*cert)["verdict"] == "pass");
  const auto fails = execute(make("certify", {{"p", 3}, {"a", 0}, {"b", 3}}, kCube)).document;
  CHECK((*fails)["verdict"] == "fail");

  const auto b = execute(make("bound", {{"p", 1}}, kCube, kCoin)).table;
  REQUIRE(b);
  CHECK_THAT(std::stod(b->rows[0][b->column("value")]), WithinAbs(std::pow(0.5, 1.5), 1e-15));
  CHECK(kind_of(make("bound", {{"p", 3}}, kCube, kCoin)) == ErrorKind::certificate);

  const auto hh = execute(make("hh", {{"p", 2}, {"a", 0}, {"b", 1}}, kCube)).table;
  CHECK_THAT(std::stod(hh->rows[0][hh->column("lower")]), WithinAbs(0.19245008972987526, 1e-15));
  const auto fr = execute(make("hh-fractional", {{"p", 2}, {"a", 0}, {"b", 1}, {"alpha", 1.0}}, kCube)).table;
  CHECK_THAT(std::stod(fr->rows[0][fr->column("mid")]), WithinAbs(0.25, 1e-13));
  CHECK(kind_of(make("hh-fractional", {{"p", 2}, {"a", 0}, {"b", 1}}, kCube)) == ErrorKind::input);

  const json one = {{"family", "polynomial"}, {"params", {{"coefficients", {1}}}}, {"domain", {0, 1}}};
  const auto rl = execute(make("rl", {{"alpha", 1.0}}, one)).document;
  CHECK_THAT((*rl)["value"].get<double>(), WithinAbs(1.0, 1e-14));

  const auto mgf = execute(make("mgf", {{"p", 2}}, std::nullopt, kCoin)).document;
  CHECK_THAT((*mgf)["lower"]["lower"].get<double>(), WithinAbs(1.82100820046, 1e-10));
  const json expo = {{"kind", "density"}, {"family", "exponential"}, {"params", {{"rate", 3}}}, {"support", {0, "inf"}}};
  const auto mgf_u = execute(make("mgf", {{"p", 2}}, std::nullopt, expo)).document;
  CHECK((*mgf_u)["upper"].is_null());

  const json y = {{"kind", "discrete"}, {"atoms", {1, 4}}, {"probs", {0.5, 0.5}}};
  CHECK_THAT((*execute(make("amgm", {}, std::nullopt, y)).document)["lower"].get<double>(), WithinAbs(2.0, 1e-14));

  const auto rm = execute(make("risk-measure", {{"p", 1}}, std::nullopt, kCoin)).document;
  CHECK((*rm)["achiever"] == "x^2");

  const json sq = {{"family", "shifted-power"}, {"params", {{"q", 2}}}};
  const json quart = {{"family", "shifted-power"}, {"params", {{"q", 4}}}};
  const auto rc = execute(make("risk-compare", {{"p", 2}, {"loss", quart}, {"trials", 200}}, sq)).document;
  CHECK((*rc)["certificate"]["verdict"] == "pass");
  CHECK((*rc)["falsifier"].is_null());

  const auto em = execute(make("em-demo", {{"iters", 4}, {"seed", 3}})).table;
  CHECK(em->rows.size() == 4);

  const auto all = execute(make("sweep", {}));
  CHECK(all.sweeps.size() == sweep_suites().size());
  CHECK_FALSE(all.table);
}

TEST_CASE("tolerance profiles reach the certifier", "[problem]") {
  auto p = make("certify", {{"p", 1}, {"a", 0}, {"b", 1}}, kCube);
  p.tolerances = ToleranceProfile{};
  p.tolerances->certify_slack = 1e-3;
  CHECK((*execute(p).document)["slack_used"].get<double>() == 1e-3);
}
