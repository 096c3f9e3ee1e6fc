#pragma once

// Grid certification of the (p, a, b)-convex classes I and D, the loss class
// L_p, and two structural checks: convexity of k_p(y) = f(a + y^(1/(p+1)))
// and monotonicity of f(x) / (x - a)^(p+1).
//
// Every condition is evaluated as a margin that should be >= 0, divided by
// max(1, magnitude of the compared quantities). A verdict fails when the
// smallest margin falls below -slack. Orders above the analytic stack are
// replaced by first or second differences of the top analytic derivative.

#include <limits>

#include "pconvex/functions.hpp"

namespace pconvex {

enum class ConvexityClass { I, D, Lp };

inline std::string_view to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::I: return "I";
    case ConvexityClass::D: return "D";
    case ConvexityClass::Lp: return "Lp";
  }
  return "?";
}

struct Witness {
  double point = 0.0;
  std::string condition;
  double margin = 0.0;
};

struct ConvexityCertificate {
  ConvexityClass cls = ConvexityClass::I;
  std::string check = "membership";  ///< "membership", "kp-convex" or "ratio-monotone"
  int p = 0;
  double a = 0.0;
  double b = 0.0;
  int grid_size = 0;
  bool pass = true;
  std::optional<Witness> witness;  ///< most negative margin when failing
  Provenance provenance = Provenance::analytic;
  double slack_used = 0.0;
  double min_margin = kInf;
  std::string function_label;

  std::string verdict() const { return pass ? "pass" : "fail"; }
};

struct CertifyOptions {
  int grid_size = 1024;
  ToleranceProfile tolerance;
  /// Lower bound required of l^(k) in L_p; the definition's strict ">" becomes ">= slack_strict".
  double slack_strict = 0.0;
  /// Slack multiplier when derivatives come from differences rather than closed forms.
  double numeric_slack_factor = 1e3;
};

inline json to_json(const ConvexityCertificate& c) {
  json j{{"class", std::string(to_string(c.cls))},
         {"check", c.check},
         {"p", c.p},
         {"interval", json::array({c.a, c.b})},
         {"grid_size", c.grid_size},
         {"verdict", c.verdict()},
         {"derivative_provenance", std::string(to_string(c.provenance))},
         {"slack_used", c.slack_used},
         {"min_margin", c.min_margin},
         {"function", c.function_label}};
  if (c.witness)
    j["witness"] = {{"point", c.witness->point}, {"condition", c.witness->condition}, {"margin", c.witness->margin}};
  return j;
}

namespace detail {

/// Collects margins and finalizes the verdict.
class MarginLog {
 public:
  void record(double x, const std::string& condition, double margin) {
    if (std::isnan(margin)) margin = -kInf;
    if (margin < min_) {
      min_ = margin;
      worst_ = Witness{x, condition, margin};
    }
  }
  void finish(ConvexityCertificate& c) const {
    c.min_margin = min_;
    c.pass = !(min_ < -c.slack_used);
    if (!c.pass) c.witness = worst_;
  }

 private:
  double min_ = kInf;
  Witness worst_;
};

inline std::vector<double> grid_points(double a, double b, int n) {
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = (i == n) ? b : a + (b - a) * i / n;
  return x;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

/// Order-k values on the grid when analytic, else nullopt.
inline std::optional<std::vector<double>> analytic_values(const FunctionSpec& f, int k, const std::vector<double>& xs) {
  if (!f.has_analytic(k)) return std::nullopt;
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = f.derivative(k, xs[i]);
  return v;
}

/// Margins for "F nondecreasing" from first differences of F on the grid.
inline void difference_increasing(MarginLog& log, const std::vector<double>& xs, const std::vector<double>& F,
                                  const std::string& what) {
  const double scale = std::max(1.0, max_abs(F));
  double dmax = 0.0;
  std::vector<double> d(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    d[i] = (F[i + 1] - F[i]) / (xs[i + 1] - xs[i]);
    if (std::isfinite(d[i])) dmax = std::max(dmax, std::abs(d[i]));
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double noise = 4.0 * kEps * scale / (xs[i + 1] - xs[i]);
    log.record(xs[i], what, (d[i] + noise) / std::max(1.0, dmax));
  }
}

/// Margins for "F convex" from second differences of F on the uniform grid.
inline void difference_convex(MarginLog& log, const std::vector<double>& xs, const std::vector<double>& F,
                              const std::string& what) {
  if (xs.size() < 3) return;
  const double h = xs[1] - xs[0];
  const double scale = std::max(1.0, max_abs(F));
  std::vector<double> d2(xs.size() - 2);
  double dmax = 0.0;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    d2[i - 1] = (F[i + 1] - 2.0 * F[i] + F[i - 1]) / (h * h);
    if (std::isfinite(d2[i - 1])) dmax = std::max(dmax, std::abs(d2[i - 1]));
  }
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double noise = 8.0 * kEps * scale / (h * h);
    log.record(xs[i], what, (d2[i - 1] + noise) / std::max(1.0, dmax));
  }
}

inline void check_interval(const FunctionSpec& f, double a, double b) {
  if (!(a < b)) fail(ErrorKind::domain, "certification needs a < b");
  if (!f.domain().contains(Interval{a, b}, 0.0))
    fail(ErrorKind::domain_mismatch, "[a, b] is not inside the domain of " + f.label());
}

inline double slack_for(const CertifyOptions& o, Provenance p) {
  return o.tolerance.certify_slack * (p == Provenance::analytic ? 1.0 : o.numeric_slack_factor);
}

}  // namespace detail

/// f^(k)(a) = 0 for k = 1..p, f^(p) increasing and convex on [a, b].
/// For p = 0 only convexity of f is checked.
inline ConvexityCertificate certify_I(const FunctionSpec& f, int p, double a, double b, const CertifyOptions& opt = {}) {
  if (p < 0) fail(ErrorKind::order, "certify_I needs p >= 0");
  opt.tolerance.validate();
  if (!std::isfinite(b)) b = f.domain().capped_hi();
  detail::check_interval(f, a, b);
  if (p > f.max_order()) fail(ErrorKind::order, f.label() + " has no derivative of order " + std::to_string(p));
  ConvexityCertificate c;
  c.cls = ConvexityClass::I;
  c.p = p;
  c.a = a;
  c.b = b;
  c.grid_size = opt.grid_size;
  c.function_label = f.label();
  c.provenance = f.provenance(p + 2);
  c.slack_used = detail::slack_for(opt, c.provenance);

  const auto xs = detail::grid_points(a, b, opt.grid_size);
  detail::MarginLog log;

  for (int k = 1; k <= p; ++k) {
    const auto vals = detail::analytic_values(f, k, xs);
    const double scale = std::max(1.0, vals ? detail::max_abs(*vals) : 1.0);
    const double v = f.derivative(k, a);
    log.record(a, "f^(" + std::to_string(k) + ")(a) = 0", -std::abs(v) / scale);
  }

  std::vector<double> top(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) top[i] = f.derivative(p, xs[i]);
  if (p >= 1) {
    if (auto d1 = detail::analytic_values(f, p + 1, xs)) {
      const double scale = std::max(1.0, detail::max_abs(*d1));
      for (std::size_t i = 0; i < xs.size(); ++i)
        log.record(xs[i], "f^(" + std::to_string(p + 1) + ") >= 0", (*d1)[i] / scale);
    } else {
      detail::difference_increasing(log, xs, top, "f^(" + std::to_string(p) + ") increasing");
    }
  }
  if (auto d2 = detail::analytic_values(f, p + 2, xs)) {
    const double scale = std::max(1.0, detail::max_abs(*d2));
    for (std::size_t i = 0; i < xs.size(); ++i)
      log.record(xs[i], "f^(" + std::to_string(p + 2) + ") >= 0", (*d2)[i] / scale);
  } else {
    detail::difference_convex(log, xs, top, "f^(" + std::to_string(p) + ") convex");
  }
  log.finish(c);
  return c;
}

/// f^(k)(b) = 0 for k = 1..p and (-1)^(k+1) f^(k) >= 0 for k = 1..p+2
/// (f' >= 0, f'' <= 0, f''' >= 0, ...).
inline ConvexityCertificate certify_D(const FunctionSpec& f, int p, double a, double b, const CertifyOptions& opt = {}) {
  if (p < 1) fail(ErrorKind::order, "certify_D needs p >= 1");
  opt.tolerance.validate();
  detail::check_interval(f, a, b);
  ConvexityCertificate c;
  c.cls = ConvexityClass::D;
  c.p = p;
  c.a = a;
  c.b = b;
  c.grid_size = opt.grid_size;
  c.function_label = f.label();
  c.provenance = f.provenance(p + 2);
  c.slack_used = detail::slack_for(opt, c.provenance);

  const auto xs = detail::grid_points(a, b, opt.grid_size);
  detail::MarginLog log;
  for (int k = 1; k <= p + 2; ++k) {
    std::vector<double> v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) v[i] = f.derivative(k, xs[i]);
    const double scale = std::max(1.0, detail::max_abs(v));
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const std::string cond = "f^(" + std::to_string(k) + (sign > 0 ? ") >= 0" : ") <= 0");
    for (std::size_t i = 0; i < xs.size(); ++i) log.record(xs[i], cond, sign * v[i] / scale);
    if (k <= p) log.record(b, "f^(" + std::to_string(k) + ")(b) = 0", -std::abs(v.back()) / scale);
  }
  log.finish(c);
  return c;
}

/// l'' x >= p l' and l^(k) >= slack_strict for k = 1..p+2 on [0, horizon].
/// Positivity is only checked for x > 1e-6, where polynomial losses are not
/// forced to vanish.
inline ConvexityCertificate certify_Lp(const FunctionSpec& l, int p, double horizon, const CertifyOptions& opt = {}) {
  if (p < 1) fail(ErrorKind::order, "certify_Lp needs p >= 1");
  if (!(horizon > 0.0)) fail(ErrorKind::domain, "certify_Lp needs horizon > 0");
  opt.tolerance.validate();
  detail::check_interval(l, 0.0, horizon);
  ConvexityCertificate c;
  c.cls = ConvexityClass::Lp;
  c.p = p;
  c.a = 0.0;
  c.b = horizon;
  c.grid_size = opt.grid_size;
  c.function_label = l.label();
  c.provenance = l.provenance(p + 2);
  c.slack_used = detail::slack_for(opt, c.provenance);

  const auto xs = detail::grid_points(0.0, horizon, opt.grid_size);
  detail::MarginLog log;
  for (double x : xs) {
    const double l1 = l.derivative(1, x), l2 = l.derivative(2, x);
    const double lhs = l2 * x, rhs = p * l1;
    log.record(x, "l'' x >= p l'", (lhs - rhs) / std::max(1.0, std::abs(lhs) + std::abs(rhs)));
  }
  for (int k = 1; k <= p + 2; ++k) {
    std::vector<double> v(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) v[i] = l.derivative(k, xs[i]);
    const double scale = std::max(1.0, detail::max_abs(v));
    const std::string cond = "l^(" + std::to_string(k) + ") > 0";
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] > 1e-6) log.record(xs[i], cond, (v[i] - opt.slack_strict) / scale);
  }
  log.finish(c);
  return c;
}

/// Discrete convexity of k_p(y) = f(a + y^(1/(p+1))) on [0, (b-a)^(p+1)].
inline ConvexityCertificate check_kp_convex(const FunctionSpec& f, int p, double a, double b, const CertifyOptions& opt = {}) {
  if (p < 0) fail(ErrorKind::order, "check_kp_convex needs p >= 0");
  detail::check_interval(f, a, b);
  ConvexityCertificate c;
  c.cls = ConvexityClass::I;
  c.check = "kp-convex";
  c.p = p;
  c.a = a;
  c.b = b;
  c.grid_size = opt.grid_size;
  c.function_label = f.label();
  c.provenance = Provenance::numeric;
  c.slack_used = detail::slack_for(opt, Provenance::analytic);

  const double ymax = std::pow(b - a, p + 1);
  const auto ys = detail::grid_points(0.0, ymax, opt.grid_size);
  std::vector<double> k(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = (i + 1 == ys.size()) ? b : a + std::pow(ys[i], 1.0 / (p + 1));
    k[i] = f(std::min(x, b));
  }
  detail::MarginLog log;
  detail::difference_convex(log, ys, k, "k_p convex");
  log.finish(c);
  return c;
}

/// g(x) = f(x) / (x - a)^(p+1) nondecreasing on (a, b], requires f(a) = 0.
/// Within 1e-4 (b - a) of a, g is replaced by its Taylor quotient when f has
/// analytic derivatives to order p+3, otherwise those points are skipped.
inline ConvexityCertificate check_ratio_monotone(const FunctionSpec& f, int p, double a, double b,
                                                 const CertifyOptions& opt = {}) {
  if (p < 0) fail(ErrorKind::order, "check_ratio_monotone needs p >= 0");
  detail::check_interval(f, a, b);
  ConvexityCertificate c;
  c.cls = ConvexityClass::I;
  c.check = "ratio-monotone";
  c.p = p;
  c.a = a;
  c.b = b;
  c.grid_size = opt.grid_size;
  c.function_label = f.label();
  c.provenance = Provenance::analytic;
  c.slack_used = detail::slack_for(opt, Provenance::analytic);

  detail::MarginLog log;
  const auto xs = detail::grid_points(a, b, opt.grid_size);
  const double fa = f(a);
  const double fscale = std::max(1.0, std::abs(f(b)));
  log.record(a, "f(a) = 0", -std::abs(fa) / fscale);

  const double near = 1e-4 * (b - a);
  const bool taylor = f.has_analytic(p + 3);
  std::vector<double> cf;
  if (taylor) {
    double fact = 1.0;
    for (int j = 1; j <= p + 3; ++j) {
      fact *= j;
      if (j >= p + 1) cf.push_back(f.derivative(j, a) / fact);
    }
  }
  std::vector<double> gx, g;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double t = xs[i] - a;
    if (t < near) {
      if (!taylor) continue;
      gx.push_back(xs[i]);
      g.push_back(cf[0] + t * (cf[1] + t * cf[2]));
      continue;
    }
    gx.push_back(xs[i]);
    g.push_back(f(xs[i]) / detail::int_pow(t, p + 1));
  }
  const double gscale = std::max(1.0, detail::max_abs(g));
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    // rounding in f(x) relative to its size, amplified by the division
    const double noise = 8.0 * kEps * (std::abs(g[i]) + std::abs(g[i + 1]));
    log.record(gx[i], "f/(x-a)^(p+1) nondecreasing", (g[i + 1] - g[i] + noise) / gscale);
  }
  log.finish(c);
  return c;
}

}  // namespace pconvex
