#pragma once

// Real functions with derivative stacks.
//
// A FunctionSpec evaluates f^(k)(x) through a single kernel (x, k). Catalog
// families carry closed-form derivatives up to kCatalogOrder; combinators
// propagate stacks by the chain, Leibniz and linearity rules. Above the
// analytic order, derivatives fall back to finite differences of the highest
// analytic one and are reported as numeric.

#include <json.hpp>

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pconvex/numerics.hpp"

namespace pconvex {

using json = nlohmann::json;

/// Closed-form families carry derivatives to this order.
inline constexpr int kCatalogOrder = 16;
/// Evaluation cap for unbounded domains: lo + kDefaultHorizon.
inline constexpr double kDefaultHorizon = 1e6;

struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool contains(const Interval& o, double tol = 0.0) const { return o.lo >= lo - tol && o.hi <= hi + tol; }
  /// Finite right end used for grids and evaluation.
  double capped_hi(double horizon = kDefaultHorizon) const { return std::isfinite(hi) ? hi : lo + horizon; }
};

inline Interval intersect(const Interval& a, const Interval& b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (!(r.lo < r.hi)) fail(ErrorKind::domain_mismatch, "function domains do not overlap");
  return r;
}

enum class Provenance { analytic, numeric, mixed };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::numeric: return "numeric";
    case Provenance::mixed: return "mixed";
  }
  return "analytic";
}

class FunctionSpec {
 public:
  /// kernel(x, k) returns the k-th derivative at x for 0 <= k <= analytic_order.
  using Kernel = std::function<double(double, int)>;

  FunctionSpec(Interval domain, Kernel kernel, int analytic_order, std::string label, json descriptor = nullptr)
      : domain_(domain),
        kernel_(std::make_shared<const Kernel>(std::move(kernel))),
        analytic_order_(analytic_order),
        label_(std::move(label)),
        descriptor_(std::move(descriptor)) {
    if (!(domain_.lo < domain_.hi)) fail(ErrorKind::construction, "function domain must satisfy lo < hi");
    if (analytic_order_ < 0) fail(ErrorKind::construction, "analytic order must be >= 0");
  }

  /// Function given only by values; every derivative is numeric.
  static FunctionSpec numeric(Interval domain, RealFn f, std::string label) {
    return FunctionSpec(
        domain, [f = std::move(f)](double x, int) { return f(x); }, 0, std::move(label));
  }

  double operator()(double x) const { return (*kernel_)(x, 0); }

  /// f^(k)(x). Orders beyond the analytic stack use finite differences of
  /// the top analytic derivative, up to four extra orders.
  double derivative(int k, double x) const {
    if (k < 0) fail(ErrorKind::order, "negative derivative order");
    if (k <= analytic_order_) return (*kernel_)(x, k);
    const int extra = k - analytic_order_;
    if (extra > 4) fail(ErrorKind::order, label_ + " has no derivative of order " + std::to_string(k));
    const int top = analytic_order_;
    auto base = [this, top](double t) { return (*kernel_)(t, top); };
    const Interval d = domain_;
    return fd_derivative(base, x, extra, d.lo, d.capped_hi(), fd_step_);
  }

  bool has_analytic(int k) const { return k <= analytic_order_; }
  int analytic_order() const { return analytic_order_; }
  int max_order() const { return analytic_order_ + 4; }

  /// Provenance of the derivatives 0..k taken together.
  Provenance provenance(int k) const {
    if (k <= analytic_order_) return Provenance::analytic;
    return analytic_order_ >= 1 ? Provenance::mixed : Provenance::numeric;
  }

  const Interval& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  /// Catalog descriptor, or null for functions built from raw callables.
  const json& descriptor() const { return descriptor_; }
  bool serializable() const { return !descriptor_.is_null(); }

  RealFn as_fn() const {
    return [k = kernel_](double x) { return (*k)(x, 0); };
  }
  RealFn derivative_fn(int k) const {
    return [self = *this, k](double x) { return self.derivative(k, x); };
  }

  FunctionSpec with_fd_step(double step) const {
    FunctionSpec r = *this;
    r.fd_step_ = step;
    return r;
  }

 private:
  Interval domain_;
  std::shared_ptr<const Kernel> kernel_;
  int analytic_order_;
  std::string label_;
  json descriptor_;
  double fd_step_ = 1e-5;
};

// ---------------------------------------------------------------------------
// JSON helpers for domains

inline json domain_to_json(const Interval& d) {
  json hi = std::isfinite(d.hi) ? json(d.hi) : json("inf");
  return json::array({d.lo, hi});
}

inline Interval domain_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::input, "domain must be a two-element array [a, b|\"inf\"]");
  Interval d;
  if (!j[0].is_number()) fail(ErrorKind::input, "domain lower end must be a number");
  d.lo = j[0].get<double>();
  if (j[1].is_string()) {
    if (j[1].get<std::string>() != "inf") fail(ErrorKind::input, "domain upper end must be a number or \"inf\"");
    d.hi = kInf;
  } else if (j[1].is_number()) {
    d.hi = j[1].get<double>();
  } else {
    fail(ErrorKind::input, "domain upper end must be a number or \"inf\"");
  }
  if (!(d.lo < d.hi)) fail(ErrorKind::input, "domain must satisfy a < b");
  return d;
}

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline json descriptor(std::string family, json params, const Interval& d) {
  return json{{"family", std::move(family)}, {"params", std::move(params)}, {"domain", domain_to_json(d)}};
}

// prod_{j<k} (q - j)
inline double falling_factorial(double q, int k) {
  double c = 1.0;
  for (int j = 0; j < k; ++j) c *= (q - j);
  return c;
}

inline double int_pow(double x, int n) {
  double r = 1.0;
  double b = x;
  unsigned e = static_cast<unsigned>(n);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Catalog families

/// (x - a)^q, q >= 1.
inline FunctionSpec shifted_power(double q, double a = 0.0, double hi = kInf) {
  if (!(q >= 1.0)) fail(ErrorKind::construction, "shifted-power needs q >= 1");
  const Interval d{a, hi};
  const bool integral = (q == std::floor(q));
  auto k = [q, a, integral](double x, int order) {
    const double c = detail::falling_factorial(q, order);
    if (c == 0.0) return 0.0;
    const double t = x - a;
    if (integral) return c * detail::int_pow(t, static_cast<int>(q) - order >= 0 ? static_cast<int>(q) - order : 0);
    return c * std::pow(t, q - order);
  };
  std::string label = (a == 0.0 ? "x" : "(x-" + detail::fmt_num(a) + ")") + "^" + detail::fmt_num(q);
  return FunctionSpec(d, k, kCatalogOrder, label, detail::descriptor("shifted-power", {{"q", q}, {"a", a}}, d));
}

/// e^(s x).
inline FunctionSpec exponential(double s = 1.0, Interval d = {0.0, kInf}) {
  if (!std::isfinite(s)) fail(ErrorKind::construction, "exponential rate must be finite");
  auto k = [s](double x, int order) { return detail::int_pow(s, order) * std::exp(s * x); };
  return FunctionSpec(d, k, kCatalogOrder, "exp(" + detail::fmt_num(s) + "x)",
                      detail::descriptor("exponential", {{"s", s}}, d));
}

/// T_p(s x) = e^(s x) - sum_{j<=p} (s x)^j / j!.
inline FunctionSpec exp_taylor_remainder(int p, double s = 1.0, Interval d = {0.0, kInf}) {
  if (p < 0) fail(ErrorKind::construction, "exp-taylor-remainder needs p >= 0");
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorKind::construction, "exp-taylor-remainder needs s > 0");
  auto k = [p, s](double x, int order) { return detail::int_pow(s, order) * exp_taylor_tail(p - order, s * x); };
  std::string label = "T" + std::to_string(p) + (s == 1.0 ? "(x)" : "(" + detail::fmt_num(s) + "x)");
  return FunctionSpec(d, k, kCatalogOrder, label, detail::descriptor("exp-taylor-remainder", {{"p", p}, {"s", s}}, d));
}

/// ln(x) - x/b on (0, b].
inline FunctionSpec log_affine(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::construction, "log-affine needs b > 0");
  const Interval d{0.0, b};
  auto k = [b](double x, int order) {
    if (order == 0) return std::log(x) - x / b;
    if (order == 1) return 1.0 / x - 1.0 / b;
    // (-1)^(order-1) (order-1)! / x^order
    double c = 1.0;
    for (int j = 2; j < order; ++j) c *= j;
    const double sign = (order % 2 == 0) ? -1.0 : 1.0;
    return sign * c / detail::int_pow(x, order);
  };
  return FunctionSpec(d, k, kCatalogOrder, "ln(x)-x/" + detail::fmt_num(b),
                      detail::descriptor("log-affine", {{"b", b}}, d));
}

/// sum_i c_i x^i.
inline FunctionSpec polynomial(std::vector<double> coefficients, Interval d = {0.0, kInf}) {
  if (coefficients.empty()) fail(ErrorKind::construction, "polynomial needs at least one coefficient");
  for (double c : coefficients)
    if (!std::isfinite(c)) fail(ErrorKind::construction, "polynomial coefficients must be finite");
  auto k = [c = coefficients](double x, int order) {
    const int n = static_cast<int>(c.size());
    double acc = 0.0;
    for (int i = n - 1; i >= order; --i) acc = acc * x + c[i] * detail::falling_factorial(i, order);
    return acc;
  };
  std::string label = "poly[";
  for (std::size_t i = 0; i < coefficients.size(); ++i) label += (i ? "," : "") + detail::fmt_num(coefficients[i]);
  label += "]";
  return FunctionSpec(d, k, kCatalogOrder, label,
                      detail::descriptor("polynomial", {{"coefficients", coefficients}}, d));
}

// ---------------------------------------------------------------------------
// Combinators

/// x -> f(scale x + shift).
inline FunctionSpec affine_precompose(const FunctionSpec& f, double scale, double shift) {
  if (scale == 0.0 || !std::isfinite(scale) || !std::isfinite(shift))
    fail(ErrorKind::construction, "affine-precompose needs a finite nonzero scale");
  const Interval in = f.domain();
  double lo = (in.lo - shift) / scale, hi = (in.hi - shift) / scale;
  if (scale < 0) std::swap(lo, hi);
  const Interval d{lo, hi};
  auto k = [f, scale, shift](double x, int order) {
    return detail::int_pow(scale, order) * f.derivative(order, scale * x + shift);
  };
  json desc = nullptr;
  if (f.serializable())
    desc = detail::descriptor("affine-precompose", {{"inner", f.descriptor()}, {"scale", scale}, {"shift", shift}}, d);
  return FunctionSpec(d, k, f.analytic_order(),
                      f.label() + "∘(" + detail::fmt_num(scale) + "x+" + detail::fmt_num(shift) + ")", desc);
}

struct WeightedTerm {
  double weight;
  FunctionSpec function;
};

/// sum_i w_i f_i with w_i >= 0 on the intersection of the domains.
inline FunctionSpec weighted_sum(std::vector<WeightedTerm> terms) {
  if (terms.empty()) fail(ErrorKind::construction, "nonneg-weighted-sum needs at least one term");
  Interval d = terms.front().function.domain();
  int order = terms.front().function.analytic_order();
  std::string label;
  json jterms = json::array();
  bool serial = true;
  for (const auto& t : terms) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight))
      fail(ErrorKind::construction, "nonneg-weighted-sum weights must be finite and >= 0");
    d = intersect(d, t.function.domain());
    order = std::min(order, t.function.analytic_order());
    label += (label.empty() ? "" : "+") + detail::fmt_num(t.weight) + "*" + t.function.label();
    serial = serial && t.function.serializable();
    if (serial) jterms.push_back({{"weight", t.weight}, {"function", t.function.descriptor()}});
  }
  auto k = [terms](double x, int o) {
    CompensatedSum s;
    for (const auto& t : terms)
      if (t.weight != 0.0) s.add(t.weight * t.function.derivative(o, x));
    return s.value();
  };
  json desc = serial ? detail::descriptor("nonneg-weighted-sum", {{"terms", jterms}}, d) : json(nullptr);
  return FunctionSpec(d, k, order, label, desc);
}

/// f * g by the Leibniz rule.
inline FunctionSpec product(const FunctionSpec& f, const FunctionSpec& g) {
  const Interval d = intersect(f.domain(), g.domain());
  auto k = [f, g](double x, int o) {
    double binom = 1.0, acc = 0.0;
    for (int j = 0; j <= o; ++j) {
      acc += binom * f.derivative(j, x) * g.derivative(o - j, x);
      binom = binom * (o - j) / (j + 1);
    }
    return acc;
  };
  json desc = nullptr;
  if (f.serializable() && g.serializable())
    desc = detail::descriptor("product", {{"factors", json::array({f.descriptor(), g.descriptor()})}}, d);
  return FunctionSpec(d, k, std::min(f.analytic_order(), g.analytic_order()), f.label() + "*" + g.label(), desc);
}

/// Taylor remainder of order p at 0: R(x) = f(x) - sum_{j<=p} f^(j)(0) x^j / j!.
/// (p, 0, b)-convex whenever f^(p) is convex and increasing on [0, b].
inline FunctionSpec taylor_remainder(const FunctionSpec& f, int p) {
  if (p < 1) fail(ErrorKind::order, "taylor_remainder needs p >= 1");
  if (!f.has_analytic(p)) fail(ErrorKind::order, f.label() + " lacks analytic derivatives to order " + std::to_string(p));
  if (f.domain().lo != 0.0) fail(ErrorKind::domain, "taylor_remainder expands at 0, the left end of the domain");
  // Taylor coefficients at 0 up to the analytic order; those above p give the
  // remainder as its own series near 0, where f - poly would cancel.
  const int top = std::min(f.analytic_order(), kCatalogOrder);
  std::vector<double> c(top + 1);
  for (int j = 0; j <= top; ++j) c[j] = f.derivative(j, 0.0);
  auto k = [f, c, p, top](double x, int o) {
    if (o <= p && top >= p + 4) {
      double series = 0.0, term = 0.0, prev_term = 0.0;
      double xpow = 1.0, fact = 1.0;
      for (int j = o + 1; j <= top; ++j) {
        xpow *= x;
        fact *= (j - o);
        if (j <= p) continue;
        prev_term = term;
        term = c[j] * xpow / fact;
        series += term;
      }
      if (std::isfinite(series) && std::abs(term) + std::abs(prev_term) <= kEps * std::abs(series)) return series;
    }
    // sum_{j=o}^{p} c_j x^(j-o) / (j-o)!
    double poly = 0.0;
    double xpow = 1.0, fact = 1.0;
    for (int j = o; j <= p; ++j) {
      if (j > o) {
        xpow *= x;
        fact *= (j - o);
      }
      poly += c[j] * xpow / fact;
    }
    return f.derivative(o, x) - poly;
  };
  json desc = nullptr;
  if (f.serializable()) desc = detail::descriptor("taylor-remainder", {{"base", f.descriptor()}, {"p", p}}, f.domain());
  return FunctionSpec(f.domain(), k, f.analytic_order(), "R[" + f.label() + "," + std::to_string(p) + "]", desc);
}

/// F(x) = int_a^x (g(z) - g(a)) dz. Values by Gauss-Legendre, derivatives
/// from g's stack: F' = g - g(a), F^(k) = g^(k-1).
inline FunctionSpec antiderivative(const FunctionSpec& g, double anchor) {
  if (!g.domain().contains(anchor)) fail(ErrorKind::domain, "antiderivative anchor outside the domain");
  const Interval d{anchor, g.domain().hi};
  const double g_a = g(anchor);
  auto k = [g, anchor, g_a](double x, int o) {
    if (o == 0) {
      if (x == anchor) return 0.0;
      auto integrand = [&](double z) { return g(z) - g_a; };
      const double lo = std::min(anchor, x), hi = std::max(anchor, x);
      QuadraturePlan plan;
      plan.abs_tolerance = 1e-14 * std::max(1.0, std::abs(hi - lo));
      double v;
      try {
        v = integrate(integrand, lo, hi, plan).value;
      } catch (const Error& e) {
        if (!e.best_estimate()) throw;
        v = *e.best_estimate();
      }
      return x >= anchor ? v : -v;
    }
    if (o == 1) return g(x) - g_a;
    return g.derivative(o - 1, x);
  };
  json desc = nullptr;
  if (g.serializable()) desc = detail::descriptor("antiderivative", {{"base", g.descriptor()}, {"anchor", anchor}}, d);
  return FunctionSpec(d, k, g.analytic_order() + 1, "∫(" + g.label() + ")", desc);
}

/// sign * f' as a function with the stack shifted by one.
inline FunctionSpec derivative_of(const FunctionSpec& f, double sign = 1.0) {
  if (f.analytic_order() < 1) fail(ErrorKind::order, f.label() + " has no analytic first derivative");
  auto k = [f, sign](double x, int o) { return sign * f.derivative(o + 1, x); };
  json desc = nullptr;
  if (f.serializable()) desc = detail::descriptor("derivative", {{"base", f.descriptor()}, {"sign", sign}}, f.domain());
  return FunctionSpec(f.domain(), k, f.analytic_order() - 1, (sign < 0 ? "-" : "") + f.label() + "'", desc);
}

/// |f'| on [a, b] for sign-definite f'. A sign change is rejected: |.| would
/// not carry a derivative stack across the zero.
inline FunctionSpec abs_derivative(const FunctionSpec& f, double a, double b, int grid = 1024) {
  bool nonneg = true, nonpos = true;
  for (int i = 0; i <= grid; ++i) {
    const double x = a + (b - a) * i / grid;
    const double v = f.derivative(1, x);
    if (v < 0) nonneg = false;
    if (v > 0) nonpos = false;
  }
  if (!nonneg && !nonpos) fail(ErrorKind::domain, "f' changes sign on [a, b]; |f'| has no derivative stack");
  return derivative_of(f, nonneg ? 1.0 : -1.0);
}

/// y -> l(f^{-1}(y)) on [f(lo), f(hi)].
///
/// First and second derivatives use the inverse-function rule on the stacks
/// of l and f; orders 3-4 are finite differences of the second. Where
/// f'(x) = 0 (an endpoint of a loss function such as x^2) the value is the
/// one-sided limit, extrapolated linearly from two interior points.
inline FunctionSpec compose_inverse(const FunctionSpec& l, const FunctionSpec& f, double horizon = kDefaultHorizon,
                                    int grid = 1024) {
  const Interval fd = intersect(l.domain(), f.domain());
  const double x_lo = fd.lo, x_hi = fd.capped_hi(horizon);
  if (!l.has_analytic(2) || !f.has_analytic(2)) fail(ErrorKind::order, "compose_inverse needs analytic stacks to order 2");
  // strictly increasing: f' >= 0 on the grid, > 0 inside, values strictly increasing
  double prev = f(x_lo);
  for (int i = 0; i <= grid; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / grid;
    const double d1 = f.derivative(1, x);
    const bool interior = i > 0 && i < grid;
    if (d1 < 0 || (interior && d1 <= 0) || std::isnan(d1))
      fail(ErrorKind::monotonicity, f.label() + " is not strictly increasing near x = " + detail::fmt_num(x));
    const double v = f(x);
    if (i > 0 && !(v > prev)) fail(ErrorKind::monotonicity, f.label() + " values do not increase near x = " + detail::fmt_num(x));
    prev = v;
  }
  const double y_lo = f(x_lo), y_hi = f(x_hi);
  const Interval d{y_lo, y_hi};
  const RealFn fv = f.as_fn();
  auto inverse = [fv, x_lo, x_hi](double y) { return invert_monotone(fv, y, x_lo, x_hi); };

  auto raw = [l, f, inverse](double y, int o) -> double {
    const double x = inverse(y);
    if (o == 0) return l(x);
    const double f1 = f.derivative(1, x);
    const double l1 = l.derivative(1, x);
    if (o == 1) return l1 / f1;
    const double f2 = f.derivative(2, x), l2 = l.derivative(2, x);
    return (l2 * f1 - l1 * f2) / (f1 * f1 * f1);
  };
  auto kernel = [f, raw, inverse, y_lo, y_hi](double y, int o) -> double {
    if (o == 0) return raw(y, 0);
    const double x = inverse(y);
    const double f1 = f.derivative(1, x);
    if (std::abs(f1) > 1e-12 * std::max(1.0, std::abs(f(x)))) return raw(y, o);
    const double delta = 1e-6 * (y_hi - y_lo);
    const double dir = (y + 2 * delta <= y_hi) ? 1.0 : -1.0;
    return 2.0 * raw(y + dir * delta, o) - raw(y + 2 * dir * delta, o);
  };
  json desc = nullptr;
  if (l.serializable() && f.serializable())
    desc = detail::descriptor("compose-inverse", {{"outer", l.descriptor()}, {"inner", f.descriptor()}, {"horizon", horizon}}, d);
  return FunctionSpec(d, kernel, 2, l.label() + "∘" + f.label() + "⁻¹", desc);
}

/// Solve f(x) = y for strictly increasing f on its (capped) domain.
inline double invert_monotone(const FunctionSpec& f, double y, const ToleranceProfile& tol = {}) {
  const Interval d = f.domain();
  if (std::isfinite(d.hi)) return invert_monotone(f.as_fn(), y, d.lo, d.hi, tol);
  return invert_monotone(f.as_fn(), y, d.lo, tol);
}

// ---------------------------------------------------------------------------
// Descriptors

enum class Family {
  shifted_power,
  exponential,
  exp_taylor_remainder,
  log_affine,
  polynomial,
  affine_precompose,
  nonneg_weighted_sum,
  product,
  taylor_remainder,
  antiderivative,
  derivative,
  compose_inverse,
};

inline constexpr std::pair<Family, std::string_view> kFamilyNames[] = {
    {Family::shifted_power, "shifted-power"},
    {Family::exponential, "exponential"},
    {Family::exp_taylor_remainder, "exp-taylor-remainder"},
    {Family::log_affine, "log-affine"},
    {Family::polynomial, "polynomial"},
    {Family::affine_precompose, "affine-precompose"},
    {Family::nonneg_weighted_sum, "nonneg-weighted-sum"},
    {Family::product, "product"},
    {Family::taylor_remainder, "taylor-remainder"},
    {Family::antiderivative, "antiderivative"},
    {Family::derivative, "derivative"},
    {Family::compose_inverse, "compose-inverse"},
};

inline Family family_from_string(std::string_view s) {
  for (auto [f, name] : kFamilyNames)
    if (name == s) return f;
  fail(ErrorKind::input, "unknown function family \"" + std::string(s) + "\"");
}

inline std::string_view to_string(Family f) {
  for (auto [g, name] : kFamilyNames)
    if (g == f) return name;
  return "?";
}

/// Parsed form of a function descriptor {"family", "params", "domain"}.
struct CatalogEntry {
  Family family;
  json params = json::object();
  std::optional<Interval> domain;
};

namespace detail {

inline double num_param(const json& params, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!params.contains(key)) {
    if (fallback) return *fallback;
    fail(ErrorKind::input, std::string("missing numeric parameter \"") + key + "\"");
  }
  const json& v = params.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return kInf;
  if (!v.is_number()) fail(ErrorKind::input, std::string("parameter \"") + key + "\" must be a number");
  return v.get<double>();
}

inline int int_param(const json& params, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!params.contains(key)) {
    if (fallback) return *fallback;
    fail(ErrorKind::input, std::string("missing integer parameter \"") + key + "\"");
  }
  const json& v = params.at(key);
  if (!v.is_number_integer()) fail(ErrorKind::input, std::string("parameter \"") + key + "\" must be an integer");
  return v.get<int>();
}

inline const json& obj_param(const json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_object())
    fail(ErrorKind::input, std::string("parameter \"") + key + "\" must be a function descriptor object");
  return params.at(key);
}

}  // namespace detail

inline CatalogEntry catalog_entry_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::input, "function descriptor must be a JSON object");
  if (!j.contains("family") || !j.at("family").is_string())
    fail(ErrorKind::input, "function descriptor needs a string \"family\"");
  CatalogEntry e{family_from_string(j.at("family").get<std::string>()), json::object(), std::nullopt};
  if (j.contains("params")) {
    if (!j.at("params").is_object()) fail(ErrorKind::input, "\"params\" must be an object");
    e.params = j.at("params");
  }
  if (j.contains("domain")) e.domain = domain_from_json(j.at("domain"));
  return e;
}

FunctionSpec make_catalog(const CatalogEntry& e);

inline FunctionSpec make_catalog(const json& descriptor) { return make_catalog(catalog_entry_from_json(descriptor)); }

/// Build a FunctionSpec from a catalog entry. Combinator families nest
/// further descriptors in their params.
inline FunctionSpec make_catalog(const CatalogEntry& e) {
  using namespace detail;
  const json& p = e.params;
  auto restrict_to = [&](FunctionSpec f) {
    if (!e.domain) return f;
    const Interval d = *e.domain;
    if (!f.domain().contains(d, 0.0))
      fail(ErrorKind::construction, "declared domain lies outside the natural domain of " + f.label());
    json desc = f.descriptor();
    if (!desc.is_null()) desc["domain"] = domain_to_json(d);
    auto k = [f](double x, int o) { return f.derivative(o, x); };
    return FunctionSpec(d, k, f.analytic_order(), f.label(), desc);
  };
  switch (e.family) {
    case Family::shifted_power: {
      const double a = num_param(p, "a", 0.0);
      const double hi = e.domain ? e.domain->hi : kInf;
      if (e.domain && e.domain->lo < a) fail(ErrorKind::construction, "shifted-power domain must start at or after a");
      FunctionSpec f = shifted_power(num_param(p, "q"), a, hi);
      return e.domain ? restrict_to(f) : f;
    }
    case Family::exponential:
      return exponential(num_param(p, "s", 1.0), e.domain.value_or(Interval{0.0, kInf}));
    case Family::exp_taylor_remainder:
      return exp_taylor_remainder(int_param(p, "p"), num_param(p, "s", 1.0), e.domain.value_or(Interval{0.0, kInf}));
    case Family::log_affine:
      return restrict_to(log_affine(num_param(p, "b")));
    case Family::polynomial: {
      if (!p.contains("coefficients") || !p.at("coefficients").is_array())
        fail(ErrorKind::input, "polynomial needs a \"coefficients\" array");
      std::vector<double> c;
      for (const auto& v : p.at("coefficients")) {
        if (!v.is_number()) fail(ErrorKind::input, "polynomial coefficients must be numbers");
        c.push_back(v.get<double>());
      }
      return polynomial(std::move(c), e.domain.value_or(Interval{0.0, kInf}));
    }
    case Family::affine_precompose:
      return restrict_to(affine_precompose(make_catalog(obj_param(p, "inner")), num_param(p, "scale"), num_param(p, "shift", 0.0)));
    case Family::nonneg_weighted_sum: {
      if (!p.contains("terms") || !p.at("terms").is_array()) fail(ErrorKind::input, "nonneg-weighted-sum needs \"terms\"");
      std::vector<WeightedTerm> terms;
      for (const auto& t : p.at("terms")) terms.push_back({num_param(t, "weight"), make_catalog(obj_param(t, "function"))});
      return restrict_to(weighted_sum(std::move(terms)));
    }
    case Family::product: {
      if (!p.contains("factors") || !p.at("factors").is_array() || p.at("factors").size() != 2)
        fail(ErrorKind::input, "product needs two \"factors\"");
      return restrict_to(product(make_catalog(p.at("factors")[0]), make_catalog(p.at("factors")[1])));
    }
    case Family::taylor_remainder:
      return restrict_to(taylor_remainder(make_catalog(obj_param(p, "base")), int_param(p, "p")));
    case Family::antiderivative:
      return restrict_to(antiderivative(make_catalog(obj_param(p, "base")), num_param(p, "anchor")));
    case Family::derivative:
      return restrict_to(derivative_of(make_catalog(obj_param(p, "base")), num_param(p, "sign", 1.0)));
    case Family::compose_inverse:
      return compose_inverse(make_catalog(obj_param(p, "outer")), make_catalog(obj_param(p, "inner")),
                             num_param(p, "horizon", kDefaultHorizon));
  }
  fail(ErrorKind::input, "unhandled family");
}

}  // namespace pconvex
