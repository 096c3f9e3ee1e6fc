#pragma once

// Problem files: the JSON form of every CLI task, and their execution.
//
//   {"version": 1, "task": "bound", "function": {...}, "distribution": {...},
//    "params": {"p": 2, "kind": "lower"}, "tolerances": {"eq_abs": 1e-12}}

#include <map>
#include <set>

#include "pconvex/report.hpp"
#include "pconvex/risk.hpp"

namespace pconvex {

inline const std::vector<std::string>& problem_tasks() {
  static const std::vector<std::string> t = {"certify", "bound", "risk-measure", "risk-compare", "mgf",  "amgm",
                                             "em-demo", "hh",    "hh-fractional", "rl",          "sweep"};
  return t;
}

inline bool operator==(const ToleranceProfile& x, const ToleranceProfile& y) {
  return x.eq_abs == y.eq_abs && x.eq_rel == y.eq_rel && x.certify_slack == y.certify_slack && x.fd_step == y.fd_step;
}

struct ProblemFile {
  int version = 1;
  std::string task;
  std::optional<json> function;
  std::optional<json> distribution;
  json params = json::object();
  std::optional<ToleranceProfile> tolerances;

  bool operator==(const ProblemFile&) const = default;
};

inline json to_json(const ToleranceProfile& t) {
  return {{"eq_abs", t.eq_abs}, {"eq_rel", t.eq_rel}, {"certify_slack", t.certify_slack}, {"fd_step", t.fd_step}};
}

/// Overrides on top of the defaults; unknown keys are rejected.
inline ToleranceProfile tolerance_profile_from_json(const json& j, const std::string& where = "tolerances") {
  if (!j.is_object()) fail(ErrorKind::input, where + ": must be an object");
  ToleranceProfile t;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) fail(ErrorKind::input, where + "." + k + ": must be a number");
    const double x = v.get<double>();
    if (k == "eq_abs") t.eq_abs = x;
    else if (k == "eq_rel") t.eq_rel = x;
    else if (k == "certify_slack") t.certify_slack = x;
    else if (k == "fd_step") t.fd_step = x;
    else fail(ErrorKind::input, where + "." + k + ": unknown tolerance field");
  }
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorKind::input, where + ": " + e.message());
  }
  return t;
}

/// Canonical form: every field spelled out, keys sorted.
inline json to_json(const ProblemFile& p) {
  json j{{"version", p.version}, {"task", p.task}, {"params", p.params}};
  if (p.function) j["function"] = *p.function;
  if (p.distribution) j["distribution"] = *p.distribution;
  if (p.tolerances) j["tolerances"] = to_json(*p.tolerances);
  return j;
}

inline ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::input, "problem file must be a JSON object");
  static const std::set<std::string> known = {"version", "task", "function", "distribution", "params", "tolerances"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) fail(ErrorKind::input, k + ": unknown field");
  ProblemFile p;
  if (!j.contains("version")) fail(ErrorKind::input, "version: missing (expected 1)");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
    fail(ErrorKind::input, "version: unsupported value " + j.at("version").dump() + " (expected 1)");
  if (!j.contains("task") || !j.at("task").is_string()) fail(ErrorKind::input, "task: missing or not a string");
  p.task = j.at("task").get<std::string>();
  const auto& tasks = problem_tasks();
  if (std::find(tasks.begin(), tasks.end(), p.task) == tasks.end())
    fail(ErrorKind::input, "task: unknown task \"" + p.task + "\"");
  if (j.contains("function")) {
    if (!j.at("function").is_object()) fail(ErrorKind::input, "function: must be an object");
    p.function = j.at("function");
  }
  if (j.contains("distribution")) {
    if (!j.at("distribution").is_object()) fail(ErrorKind::input, "distribution: must be an object");
    p.distribution = j.at("distribution");
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) fail(ErrorKind::input, "params: must be an object");
    p.params = j.at("params");
  }
  if (j.contains("tolerances")) p.tolerances = tolerance_profile_from_json(j.at("tolerances"));
  return p;
}

/// Result of a task: a JSON document or a CSV table, plus any sweep tables.
struct TaskOutput {
  std::optional<json> document;
  std::optional<Table> table;
  std::vector<std::pair<std::string, Table>> sweeps;

  std::string text() const {
    if (document) return document->dump(2) + "\n";
    if (table) return table->to_csv();
    return {};
  }
};

namespace detail {

/// Typed access to problem params with "params.<key>" diagnostics.
class Params {
 public:
  explicit Params(const json& j) : j_(j) {}

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double num(const char* key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) return fallback ? *fallback : missing(key);
    const json& v = j_.at(key);
    if (v.is_string() && v.get<std::string>() == "inf") return kInf;
    if (!v.is_number()) bad(key, "must be a number");
    return v.get<double>();
  }

  int integer(const char* key, std::optional<int> fallback = std::nullopt) const {
    if (!has(key)) return fallback ? *fallback : static_cast<int>(missing(key));
    const json& v = j_.at(key);
    if (!v.is_number_integer()) bad(key, "must be an integer");
    return v.get<int>();
  }

  std::uint64_t seed() const {
    if (!has("seed")) return kDefaultSeed;
    const json& v = j_.at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      bad("seed", "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string str(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      missing(key);
    }
    const json& v = j_.at(key);
    if (!v.is_string()) bad(key, "must be a string");
    return v.get<std::string>();
  }

  std::string choice(const char* key, std::initializer_list<const char*> options, const char* fallback) const {
    const std::string s = str(key, std::string(fallback));
    std::string list;
    for (const char* o : options) {
      if (s == o) return s;
      list += list.empty() ? o : std::string(", ") + o;
    }
    bad(key, "must be one of " + list + ", got \"" + s + "\"");
  }

  const json& object(const char* key) const {
    if (!has(key)) missing(key);
    if (!j_.at(key).is_object()) bad(key, "must be an object");
    return j_.at(key);
  }

 private:
  [[noreturn]] static double missing(const char* key) { fail(ErrorKind::input, std::string("params.") + key + ": missing"); }
  [[noreturn]] static void bad(const char* key, const std::string& why) {
    fail(ErrorKind::input, std::string("params.") + key + ": " + why);
  }
  const json& j_;
};

/// Rethrow construction and input errors with the field they came from.
template <class Fn>
auto with_field(const std::string& field, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::input || e.kind() == ErrorKind::construction)
      fail(e.kind(), field + ": " + e.message());
    throw;
  }
}

inline FunctionSpec problem_function(const ProblemFile& p, const ToleranceProfile& tol) {
  if (!p.function) fail(ErrorKind::input, "function: task \"" + p.task + "\" needs a function descriptor");
  FunctionSpec f = with_field("function", [&] { return make_catalog(*p.function); });
  return f.with_fd_step(tol.fd_step);
}

inline RandomVariable problem_distribution(const ProblemFile& p) {
  if (!p.distribution) fail(ErrorKind::input, "distribution: task \"" + p.task + "\" needs a distribution descriptor");
  return with_field("distribution", [&] { return random_variable_from_json(*p.distribution); });
}

/// [a, b] from params, falling back to `fallback` (a support or domain).
inline std::pair<double, double> interval_param(const Params& pr, Interval fallback, const std::string& what) {
  const double a = pr.num("a", fallback.lo);
  const double b = pr.num("b", fallback.hi);
  if (!std::isfinite(a) || !std::isfinite(b))
    fail(ErrorKind::input, "params.b: " + what + " is unbounded; pass a finite interval with a and b");
  if (!(a < b)) fail(ErrorKind::input, "params: need a < b");
  return {a, b};
}

inline Table bound_table(const BoundReport& r) {
  Table t;
  t.header = {"kind", "direction", "p", "a", "b", "value", "oracle", "oracle_error", "classical_kind", "classical",
              "gap_to_oracle", "gap_to_classical", "inputs_digest"};
  t.rows.push_back({r.kind, std::string(to_string(r.direction)), std::to_string(r.p), csv_number(r.a), csv_number(r.b),
                    csv_number(r.value), csv_number(r.oracle), csv_number(r.oracle_error), r.classical_kind,
                    csv_number(r.classical), csv_number(r.gap_to_oracle), csv_number(r.gap_to_classical), r.inputs_digest});
  return t;
}

}  // namespace detail

inline TaskOutput execute(const ProblemFile& prob) {
  const ToleranceProfile tol = prob.tolerances.value_or(ToleranceProfile{});
  const detail::Params pr(prob.params);
  CertifyOptions co;
  co.tolerance = tol;
  co.grid_size = pr.integer("grid_size", 1024);
  if (co.grid_size < 8) fail(ErrorKind::input, "params.grid_size: must be >= 8");
  BoundOptions bo;
  bo.tolerance = tol;
  const std::string& task = prob.task;
  TaskOutput out;

  if (task == "certify") {
    const FunctionSpec f = detail::problem_function(prob, tol);
    const std::string cls = pr.choice("class", {"I", "D", "Lp"}, "I");
    const int p = pr.integer("p", 1);
    if (cls == "Lp") {
      out.document = to_json(certify_Lp(f, p, pr.num("horizon", 10.0), co));
      return out;
    }
    const auto [a, b] = detail::interval_param(pr, f.domain(), "the function domain");
    const std::string check = pr.choice("check", {"membership", "kp-convex", "ratio-monotone"}, "membership");
    if (check != "membership" && cls != "I") fail(ErrorKind::input, "params.check: " + check + " applies to class I only");
    if (check == "kp-convex") out.document = to_json(check_kp_convex(f, p, a, b, co));
    else if (check == "ratio-monotone") out.document = to_json(check_ratio_monotone(f, p, a, b, co));
    else if (cls == "I") out.document = to_json(certify_I(f, p, a, b, co));
    else out.document = to_json(certify_D(f, p, a, b, co));
    return out;
  }

  if (task == "bound") {
    const FunctionSpec f = detail::problem_function(prob, tol);
    const RandomVariable X = detail::problem_distribution(prob);
    const std::string kind = pr.choice("kind", {"lower", "upper", "lower-decreasing"}, "lower");
    const int p = pr.integer("p", 1);
    Interval fallback = X.support();
    if (kind == "lower" && !std::isfinite(fallback.hi)) fallback.hi = f.domain().capped_hi(std::max(10.0, fallback.lo + 10.0));
    const auto [a, b] = detail::interval_param(pr, fallback, "the support of X");
    BoundReport r;
    if (kind == "lower-decreasing") r = jensen_lower_decreasing(f, certify_D(f, p, a, b, co), X, bo);
    else if (kind == "upper") r = jensen_upper(f, certify_I(f, p, a, b, co), X, bo);
    else r = jensen_lower(f, certify_I(f, p, a, b, co), X, bo);
    out.table = detail::bound_table(r);
    return out;
  }

  if (task == "risk-measure") {
    out.document = to_json(risk_measure(detail::problem_distribution(prob), pr.integer("p", 1), co));
    return out;
  }

  if (task == "risk-compare") {
    const FunctionSpec f = detail::problem_function(prob, tol);
    const FunctionSpec l = detail::with_field("params.loss", [&] { return make_catalog(pr.object("loss")); });
    FalsifyOptions fo;
    fo.trials = pr.integer("trials", 10000);
    if (fo.trials < 0) fail(ErrorKind::input, "params.trials: must be >= 0");
    fo.seed = pr.seed();
    out.document = to_json(compare_risk_aversion(l, f, pr.integer("p", 1), pr.num("horizon", 10.0), fo, co));
    return out;
  }

  if (task == "mgf") {
    const RandomVariable X = detail::problem_distribution(prob);
    const double s = pr.num("s", 1.0);
    const int p = pr.integer("p", 1);
    const std::string kind = pr.choice("kind", {"lower", "upper", "both"}, "both");
    json doc = json::object();
    if (kind != "upper") doc["lower"] = to_json(mgf_lower(X, s, p));
    if (kind != "lower") {
      if (std::isfinite(X.support().hi) || kind == "upper") {
        std::optional<double> b;
        if (pr.has("b")) b = pr.num("b");
        doc["upper"] = to_json(mgf_upper(X, s, p, b));
      } else {
        doc["upper"] = nullptr;
        doc["upper_skipped"] = "X has unbounded support";
      }
    }
    out.document = doc;
    return out;
  }

  if (task == "amgm") {
    out.document = to_json(am_gm_lower(detail::problem_distribution(prob), pr.integer("p", 1)));
    return out;
  }

  if (task == "em-demo") {
    const int n = pr.integer("n", 60), iters = pr.integer("iters", 30);
    if (n < 1) fail(ErrorKind::input, "params.n: must be >= 1");
    const std::uint64_t seed = pr.seed();
    out.table = em_trace_table(em_demo(sample_bernoulli_mixture(demo_mixture(), n, seed), iters, seed));
    return out;
  }

  if (task == "hh" || task == "hh-fractional") {
    const FunctionSpec f = detail::problem_function(prob, tol);
    const int p = pr.integer("p", 1);
    const auto [a, b] = detail::interval_param(pr, f.domain(), "the function domain");
    const auto cert = certify_I(f, p - 1, a, b, co);
    const HHReport r = task == "hh" ? hh_bounds(f, cert, p) : fractional_hh_bounds(f, cert, p, pr.num("alpha"));
    Table t;
    t.header = hh_columns();
    t.rows.push_back(hh_row(r));
    out.table = t;
    return out;
  }

  if (task == "rl") {
    const FunctionSpec f = detail::problem_function(prob, tol);
    const auto [a, b] = detail::interval_param(pr, f.domain(), "the function domain");
    const std::string side = pr.choice("side", {"left", "right"}, "left");
    const double alpha = pr.num("alpha");
    const double x = pr.num("x", side == "left" ? b : a);
    const auto r = rl_integral(f, alpha, side == "left" ? RLSide::left : RLSide::right, a, b, x);
    out.document = json{{"alpha", alpha}, {"side", side}, {"a", a}, {"b", b}, {"x", x}, {"value", r.value}, {"error", r.error}};
    return out;
  }

  if (task == "sweep") {
    const std::string suite = pr.str("suite", std::string("all"));
    const std::uint64_t seed = pr.seed();
    if (suite == "all") {
      for (const auto& s : sweep_suites()) out.sweeps.emplace_back(s, run_sweep(s, seed));
    } else {
      out.table = run_sweep(suite, seed);
      out.sweeps.emplace_back(suite, *out.table);
    }
    return out;
  }

  fail(ErrorKind::input, "task: unknown task \"" + task + "\"");
}

}  // namespace pconvex
