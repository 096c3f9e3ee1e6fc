#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pconvex/problem.hpp"

using namespace pconvex;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, path + ": cannot write");
  out << text;
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto k = msg.find("parse error"); k != std::string::npos) msg = msg.substr(k);
    fail(ErrorKind::input, source + ": " + msg);
  }
}

/// A descriptor given inline ("{...}") or as a path to a JSON file.
json load_descriptor(const std::string& arg, const std::string& field) {
  const auto start = arg.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && arg[start] == '{') return parse_json_text(arg, field);
  return parse_json_text(read_file(arg), arg);
}

struct Common {
  std::string function, distribution, loss, out, plot, tolerance_profile;
  bool dump = false;
};

struct Params {
  int p = 1, grid = 1024, trials = 10000, iters = 30, n = 60;
  double a = 0, b = 0, s = 1, alpha = 1, x = 0, horizon = 10;
  std::uint64_t seed = kDefaultSeed;
  std::string cls = "I", check = "membership", kind, side = "left", suite = "all";
};

void add_out(CLI::App* sub, Common& c) { sub->add_option("--out", c.out, "Write the report here instead of stdout"); }

void add_tolerance(CLI::App* sub, Common& c) {
  sub->add_option("--tolerance-profile", c.tolerance_profile, "JSON file of tolerance overrides")->check(CLI::ExistingFile);
  sub->add_flag("--dump-canonical", c.dump, "Print the canonical problem file for this invocation and exit");
}

/// Copy every flag the user actually passed into params.
json collect_params(CLI::App* sub, const Params& v) {
  json p = json::object();
  auto set = [&](const char* opt, const char* key, auto value) {
    if (sub->get_option_no_throw(opt) && sub->get_option(opt)->count()) p[key] = value;
  };
  set("-p", "p", v.p);
  set("--grid", "grid_size", v.grid);
  set("--trials", "trials", v.trials);
  set("--iters", "iters", v.iters);
  set("-n", "n", v.n);
  set("-a", "a", v.a);
  set("-b", "b", v.b);
  set("-s", "s", v.s);
  set("--alpha", "alpha", v.alpha);
  set("-x", "x", v.x);
  set("--horizon", "horizon", v.horizon);
  set("--seed", "seed", v.seed);
  set("--class", "class", v.cls);
  set("--check", "check", v.check);
  set("--kind", "kind", v.kind);
  set("--side", "side", v.side);
  set("--suite", "suite", v.suite);
  return p;
}

ProblemFile build_problem(const std::string& task, CLI::App* sub, const Common& c, const Params& v) {
  ProblemFile prob;
  prob.task = task;
  prob.params = collect_params(sub, v);
  if (!c.function.empty()) prob.function = load_descriptor(c.function, "function");
  if (!c.distribution.empty()) prob.distribution = load_descriptor(c.distribution, "distribution");
  if (!c.loss.empty()) prob.params["loss"] = load_descriptor(c.loss, "loss");
  if (!c.tolerance_profile.empty())
    prob.tolerances = tolerance_profile_from_json(parse_json_text(read_file(c.tolerance_profile), c.tolerance_profile),
                                                  c.tolerance_profile);
  return prob;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) std::cout << text;
  else write_file(out, text);
}

int run_problem(const ProblemFile& prob, const Common& c) {
  if (c.dump) {
    std::cout << to_json(prob).dump(2) << "\n";
    return 0;
  }
  const TaskOutput res = execute(prob);
  if (prob.task != "sweep") {
    emit(res.text(), c.out);
    return 0;
  }
  if (res.table) {
    emit(res.table->to_csv(), c.out);
    if (!c.plot.empty()) write_file(c.plot, render_gap_plot(*res.table));
    return 0;
  }
  // all suites: --out and --plot name directories
  if (c.out.empty()) fail(ErrorKind::input, "--out: sweeping all suites needs an output directory");
  fs::create_directories(c.out);
  if (!c.plot.empty()) fs::create_directories(c.plot);
  for (const auto& [name, table] : res.sweeps) {
    write_file((fs::path(c.out) / (name + ".csv")).string(), table.to_csv());
    if (!c.plot.empty()) write_file((fs::path(c.plot) / (name + ".svg")).string(), render_gap_plot(table));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pconvex: higher-order convexity certificates and the moment bounds they license"};
  app.require_subcommand(1);
  Common c;
  Params v;
  std::string csv_in, problem_path;

  auto* certify = app.add_subcommand(
      "certify", "Certify membership of a function in I(p,a,b), D(p,a,b) or L_p on a grid, or run the "
                 "derivative-ratio and kp-convexity checks");
  certify->add_option("-f,--function", c.function, "Function descriptor (JSON file or inline JSON)")->required();
  certify->add_option("--class", v.cls, "Convexity class")->check(CLI::IsMember({"I", "D", "Lp"}));
  certify->add_option("-p", v.p, "Order p");
  certify->add_option("-a", v.a, "Left end of the interval (default: domain start)");
  certify->add_option("-b", v.b, "Right end of the interval (default: domain end)");
  certify->add_option("--grid", v.grid, "Grid size");
  certify->add_option("--check", v.check, "membership, kp-convex or ratio-monotone")
      ->check(CLI::IsMember({"membership", "kp-convex", "ratio-monotone"}));
  certify->add_option("--horizon", v.horizon, "Upper end of the grid for class L_p");

  auto* bound = app.add_subcommand(
      "bound", "Jensen-type bounds from the shifted (p+1)-norm of X: the lower bound f(a + ||X-a||_{p+1}), the "
               "moment-weighted secant upper bound, or f(b - ||b-X||_{p+1}) for class D");
  bound->add_option("-f,--function", c.function, "Function descriptor (JSON file or inline JSON)")->required();
  bound->add_option("-d,--distribution", c.distribution, "Distribution descriptor (JSON file or inline JSON)")->required();
  bound->add_option("-p", v.p, "Order p of the certificate");
  bound->add_option("--kind", v.kind, "lower, upper or lower-decreasing")
      ->check(CLI::IsMember({"lower", "upper", "lower-decreasing"}));
  bound->add_option("-a", v.a, "Left end of the certified interval (default: support of X)");
  bound->add_option("-b", v.b, "Right end of the certified interval (default: support of X)");
  bound->add_option("--grid", v.grid, "Certification grid size");

  auto* risk = app.add_subcommand("risk", "Risk measures and risk-aversion comparisons for loss functions");
  risk->require_subcommand(1);
  auto* measure = risk->add_subcommand(
      "measure", "Worst-case certainty equivalent over L_p: the closed form ||X||_{p+1} and a certified sweep");
  measure->add_option("-d,--distribution", c.distribution, "Distribution descriptor")->required();
  measure->add_option("-p", v.p, "Order p");
  measure->add_option("--grid", v.grid, "Certification grid size");
  auto* compare = risk->add_subcommand(
      "compare", "Whether loss l is p-more risk averse than f: certificate on l o f^{-1} plus a falsifier search");
  compare->add_option("-l,--loss", c.loss, "Loss function l (descriptor)")->required();
  compare->add_option("-f,--function", c.function, "Comparison function f (descriptor)")->required();
  compare->add_option("-p", v.p, "Order p");
  compare->add_option("--horizon", v.horizon, "Lotteries live on [0, horizon]");
  compare->add_option("--trials", v.trials, "Random falsification trials");
  compare->add_option("--seed", v.seed, "Seed for the falsifier");
  compare->add_option("--grid", v.grid, "Certification grid size");

  auto* mgf = app.add_subcommand(
      "mgf", "Bounds on E exp(sX) for X >= 0 from the exponential Taylor remainder and the p-th moment");
  mgf->add_option("-d,--distribution", c.distribution, "Distribution descriptor")->required();
  mgf->add_option("-s", v.s, "Argument s >= 0");
  mgf->add_option("-p", v.p, "Order p");
  mgf->add_option("--kind", v.kind, "lower, upper or both")->check(CLI::IsMember({"lower", "upper", "both"}));
  mgf->add_option("-b", v.b, "Upper end of the support for the upper bound");

  auto* amgm = app.add_subcommand("amgm", "Moment-refined arithmetic-geometric mean lower bound on E Y for Y >= 1");
  amgm->add_option("-d,--distribution", c.distribution, "Distribution descriptor")->required();
  amgm->add_option("-p", v.p, "Order p");

  auto* em = app.add_subcommand(
      "em-demo", "EM on a seeded two-component Bernoulli mixture; trace of log-likelihood, classical and tight ELBO");
  em->add_option("--iters", v.iters, "EM iterations");
  em->add_option("--seed", v.seed, "Seed for data and initialization");
  em->add_option("-n", v.n, "Number of samples");

  auto* hh = app.add_subcommand(
      "hh", "Hermite-Hadamard bounds on the integral average of f in I(p-1,a,b), with the classical pair");
  hh->add_option("-f,--function", c.function, "Function descriptor")->required();
  hh->add_option("-p", v.p, "Order p >= 1");
  hh->add_option("-a", v.a, "Left end (default: domain start)");
  hh->add_option("-b", v.b, "Right end (default: domain end)");
  hh->add_option("--grid", v.grid, "Certification grid size");

  auto* hhf = app.add_subcommand(
      "hh-fractional", "Riemann-Liouville fractional Hermite-Hadamard bounds with weight gamma(p, alpha)");
  hhf->add_option("-f,--function", c.function, "Function descriptor")->required();
  hhf->add_option("-p", v.p, "Order p >= 1");
  hhf->add_option("--alpha", v.alpha, "Fractional order alpha > 0")->required();
  hhf->add_option("-a", v.a, "Left end, >= 0 (default: domain start)");
  hhf->add_option("-b", v.b, "Right end (default: domain end)");
  hhf->add_option("--grid", v.grid, "Certification grid size");

  auto* rl = app.add_subcommand("rl", "Riemann-Liouville fractional integral I_{a+} or I_{b-} of order alpha at x");
  rl->add_option("-f,--function", c.function, "Function descriptor")->required();
  rl->add_option("--alpha", v.alpha, "Order alpha >= 0")->required();
  rl->add_option("--side", v.side, "left (a+) or right (b-)")->check(CLI::IsMember({"left", "right"}));
  rl->add_option("-a", v.a, "Left end (default: domain start)");
  rl->add_option("-b", v.b, "Right end (default: domain end)");
  rl->add_option("-x", v.x, "Evaluation point (default: b for left, a for right)");

  auto* sweep = app.add_subcommand(
      "sweep", "Seeded experiment suites reporting bound-to-truth gaps as CSV, with an optional SVG gap plot");
  sweep->add_option("--suite", v.suite, "jensen, hh, hh-fractional, mgf, elbo or all")
      ->check(CLI::IsMember({"jensen", "hh", "hh-fractional", "mgf", "elbo", "all"}));
  sweep->add_option("--seed", v.seed, "Seed");
  sweep->add_option("--plot", c.plot, "SVG output (a directory for --suite all)");

  auto* plot = app.add_subcommand("plot", "Render the gap columns of a sweep CSV as an SVG line chart");
  plot->add_option("csv", csv_in, "Sweep CSV")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Execute a problem file (JSON, version 1)");
  run->add_option("problem", problem_path, "Problem file")->required()->check(CLI::ExistingFile);
  run->add_option("--plot", c.plot, "SVG output for sweep problems");

  const std::vector<std::pair<CLI::App*, std::string>> tasks = {
      {certify, "certify"}, {bound, "bound"}, {measure, "risk-measure"}, {compare, "risk-compare"},
      {mgf, "mgf"},         {amgm, "amgm"},   {em, "em-demo"},          {hh, "hh"},
      {hhf, "hh-fractional"}, {rl, "rl"},   {sweep, "sweep"}};
  for (const auto& [sub, name] : tasks) {
    add_out(sub, c);
    add_tolerance(sub, c);
  }
  add_out(plot, c);
  add_out(run, c);
  run->add_flag("--dump-canonical", c.dump, "Print the canonical form of the problem file and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*plot) {
      emit(render_gap_plot(parse_csv(read_file(csv_in))), c.out);
      return 0;
    }
    if (*run) return run_problem(problem_from_json(parse_json_text(read_file(problem_path), problem_path)), c);
    for (const auto& [sub, name] : tasks)
      if (*sub) return run_problem(build_problem(name, sub, c, v), c);
    return 1;
  } catch (const Error& e) {
    std::cerr << "pconvex: " << e.what() << "\n";
    return e.kind() == ErrorKind::certificate ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pconvex: " << e.what() << "\n";
    return 1;
  }
}
