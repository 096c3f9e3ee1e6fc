#pragma once

// Random variables on the real line: finite discrete laws, empirical samples
// and densities. Expectations here serve as the reference value every bound
// is compared against.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <variant>

#include "pconvex/functions.hpp"

namespace pconvex {

struct Discrete {
  std::vector<double> atoms;
  std::vector<double> probs;
};

struct Sample {
  std::vector<double> values;
  /// Set when the sample came from sample_mc.
  std::optional<std::uint64_t> seed;
};

struct Density {
  std::string family;  ///< "uniform", "beta-like", "fractional-hh", "exponential", "pareto" or "custom"
  json params = json::object();
  Interval support;
  RealFn pdf;
  QuadraturePlan plan;
  /// E g(X) with an error estimate.
  std::function<QuadratureResult(const RealFn&)> engine;
  /// Inverse CDF on [0, 1), when known in closed form.
  RealFn quantile;
};

enum class MomentMethod { exact_sum, quadrature, monte_carlo };

inline std::string_view to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::exact_sum: return "exact-sum";
    case MomentMethod::quadrature: return "quadrature";
    case MomentMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

struct MomentReport {
  int order = 1;
  double shift = 0.0;
  double raw = 0.0;   ///< E(X - shift)^order, or E(shift - X)^order for MomentSide::below
  double norm = 0.0;  ///< raw^(1/order)
  MomentMethod method = MomentMethod::exact_sum;
  std::size_t mc_n = 0;
  std::optional<std::uint64_t> mc_seed;
  double error_estimate = 0.0;
};

/// above: moments of X - shift (shift <= inf X). below: moments of shift - X (shift >= sup X).
enum class MomentSide { above, below };

struct Expectation {
  double value = 0.0;
  double error_estimate = 0.0;
};

class RandomVariable {
 public:
  using Kind = std::variant<Discrete, Sample, Density>;

  RandomVariable(Discrete d, std::optional<Interval> declared = std::nullopt) : kind_(std::move(d)) {
    auto& x = std::get<Discrete>(kind_);
    if (x.atoms.empty()) fail(ErrorKind::construction, "discrete law needs at least one atom");
    if (x.atoms.size() != x.probs.size()) fail(ErrorKind::construction, "atoms and probs differ in length");
    CompensatedSum s;
    for (std::size_t i = 0; i < x.atoms.size(); ++i) {
      if (!std::isfinite(x.atoms[i])) fail(ErrorKind::construction, "atoms must be finite");
      if (!(x.probs[i] >= 0.0)) fail(ErrorKind::construction, "probabilities must be >= 0");
      s.add(x.probs[i]);
    }
    if (std::abs(s.value() - 1.0) > 1e-12) fail(ErrorKind::construction, "probabilities must sum to 1 within 1e-12");
    const auto [lo, hi] = std::minmax_element(x.atoms.begin(), x.atoms.end());
    set_support(declared, *lo, *hi);
  }

  RandomVariable(Sample s, std::optional<Interval> declared = std::nullopt) : kind_(std::move(s)) {
    auto& x = std::get<Sample>(kind_);
    if (x.values.empty()) fail(ErrorKind::construction, "sample must be nonempty");
    for (double v : x.values)
      if (!std::isfinite(v)) fail(ErrorKind::construction, "sample values must be finite");
    const auto [lo, hi] = std::minmax_element(x.values.begin(), x.values.end());
    set_support(declared, *lo, *hi);
  }

  RandomVariable(Density d) : kind_(std::move(d)) {
    auto& x = std::get<Density>(kind_);
    x.plan.validate();
    if (!(x.support.lo < x.support.hi) || !std::isfinite(x.support.lo))
      fail(ErrorKind::construction, "density support must be [a, b] with a < b, a finite");
    if (!x.engine) fail(ErrorKind::construction, "density needs an expectation engine");
    support_ = x.support;
  }

  const Kind& kind() const { return kind_; }
  bool is_discrete() const { return std::holds_alternative<Discrete>(kind_); }
  bool is_sample() const { return std::holds_alternative<Sample>(kind_); }
  bool is_density() const { return std::holds_alternative<Density>(kind_); }
  const Discrete& discrete() const { return std::get<Discrete>(kind_); }
  const Sample& sample() const { return std::get<Sample>(kind_); }
  const Density& density() const { return std::get<Density>(kind_); }

  /// Declared support [a, b], b possibly +inf.
  const Interval& support() const { return support_; }

 private:
  void set_support(const std::optional<Interval>& declared, double lo, double hi) {
    if (!declared) {
      support_ = {lo, hi};  // a point mass has lo == hi
      return;
    }
    if (lo < declared->lo || hi > declared->hi) fail(ErrorKind::construction, "values lie outside the declared support");
    support_ = *declared;
  }

  Kind kind_;
  Interval support_;
};

// ---------------------------------------------------------------------------
// Expectation engines

namespace detail {

inline QuadratureResult integrate_or_best(const RealFn& g, double lo, double hi, const QuadraturePlan& plan) {
  try {
    return integrate(g, lo, hi, plan);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::convergence || !e.best_estimate()) throw;
    throw Error(ErrorKind::convergence, std::string("expectation quadrature: ") + e.message(), *e.best_estimate());
  }
}

/// E g for a density on [lo, inf) split at the quantile levels 1 - 10^-k,
/// k = 0..10. The last pieces show whether the tail contribution shrinks.
inline QuadratureResult tail_pieces(const RealFn& g, const RealFn& pdf, const RealFn& quantile, const QuadraturePlan& plan) {
  constexpr int kDecades = 10;
  std::vector<double> pieces;
  CompensatedSum total;
  double err = 0.0;
  double left = quantile(0.0);
  for (int k = 1; k <= kDecades; ++k) {
    const double right = quantile(1.0 - std::pow(10.0, -k));
    auto h = [&](double x) { return g(x) * pdf(x); };
    const auto r = integrate_or_best(h, left, right, plan);
    pieces.push_back(r.value);
    total.add(r.value);
    err += r.error;
    left = right;
  }
  const double last = std::abs(pieces[kDecades - 1]), prev = std::abs(pieces[kDecades - 2]),
               prev2 = std::abs(pieces[kDecades - 3]);
  const double scale = std::max(total.magnitude(), 1e-300);
  if (last > 1e-14 * scale && last >= 0.95 * prev && prev >= 0.95 * prev2)
    fail(ErrorKind::moment_infinite, "tail contributions do not decay; the expectation appears infinite");
  // pieces past the horizon extrapolated as a geometric series
  const double r = prev > 0.0 ? pieces[kDecades - 1] / pieces[kDecades - 2] : 0.0;
  double tail = 0.0;
  if (r > 0.0 && r < 1.0) tail = pieces[kDecades - 1] * r / (1.0 - r);
  err += std::abs(tail) + 1e-3 * last;
  return {total.value() + tail, err};
}

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Density families

inline RandomVariable uniform(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::construction, "uniform needs finite a < b");
  Density d;
  d.family = "uniform";
  d.support = {a, b};
  d.pdf = [a, b](double x) { return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0; };
  d.quantile = [a, b](double u) { return a + (b - a) * u; };
  d.engine = [a, b, plan = d.plan](const RealFn& g) {
    auto r = detail::integrate_or_best(g, a, b, plan);
    return QuadratureResult{r.value / (b - a), r.error / (b - a)};
  };
  return RandomVariable(std::move(d));
}

/// Density proportional to (x - a)^(alpha-1) (b - x)^(beta-1) on [a, b], alpha, beta >= 1.
inline RandomVariable beta_like(double alpha, double beta, double a, double b) {
  if (!(alpha >= 1.0 && beta >= 1.0)) fail(ErrorKind::construction, "beta-like needs alpha, beta >= 1");
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::construction, "beta-like needs finite a < b");
  Density d;
  d.family = "beta-like";
  d.params = {{"alpha", alpha}, {"beta", beta}};
  d.support = {a, b};
  const double log_norm = log_gamma(alpha) + log_gamma(beta) - log_gamma(alpha + beta) + (alpha + beta - 1) * std::log(b - a);
  d.pdf = [=](double x) {
    if (x < a || x > b) return 0.0;
    return std::exp((alpha - 1) * std::log(x - a) + (beta - 1) * std::log(b - x) - log_norm);
  };
  // Gauss-Jacobi on [-1, 1] with weight (1-t)^(beta-1) (1+t)^(alpha-1); normalizing by the
  // weight sum gives E g directly.
  d.engine = [=](const RealFn& g) {
    auto at = [&](int n) {
      const GaussRule& rule = gauss_jacobi(n, beta - 1, alpha - 1);
      CompensatedSum s, w;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = a + (b - a) * 0.5 * (rule.nodes[i] + 1.0);
        s.add(rule.weights[i] * g(x));
        w.add(rule.weights[i]);
      }
      return s.value() / w.value();
    };
    double prev = at(32);
    for (int n = 64; n <= 1024; n *= 2) {
      const double cur = at(n);
      const double err = std::abs(cur - prev);
      if (err <= 1e-13 * std::max(1.0, std::abs(cur))) return QuadratureResult{cur, err};
      prev = cur;
    }
    throw Error(ErrorKind::convergence, "beta-like expectation did not converge", prev);
  };
  return RandomVariable(std::move(d));
}

/// g(x) = alpha / (2 (b-a)^alpha) ((x-a)^(alpha-1) + (b-x)^(alpha-1)) on [a, b], alpha > 0.
///
/// X is an equal mixture of a + (b-a) U^(1/alpha) and b - (b-a) U^(1/alpha).
/// Expectations integrate over the quantile u = v^m with m = alpha r, so that
/// U^(1/alpha) = v^r and the Jacobian m v^(alpha r - 1) is at least C^7 at 0.
inline RandomVariable fractional_hh(double alpha, double a, double b) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::construction, "fractional-hh needs alpha > 0");
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::construction, "fractional-hh needs finite a < b");
  Density d;
  d.family = "fractional-hh";
  d.params = {{"alpha", alpha}};
  d.support = {a, b};
  d.pdf = [=](double x) {
    if (x < a || x > b) return 0.0;
    const double w = b - a;
    return alpha / 2.0 * (std::pow((x - a) / w, alpha - 1) + std::pow((b - x) / w, alpha - 1)) / w;
  };
  d.quantile = [=](double u) {
    // lower half of the mass from the left component, upper half from the right one
    const double w = b - a;
    if (u < 0.5) return a + w * std::pow(2.0 * u, 1.0 / alpha);
    return b - w * std::pow(2.0 * (1.0 - u), 1.0 / alpha);
  };
  const int r = std::max(1, static_cast<int>(std::ceil(8.0 / alpha)));
  const double m = alpha * r;
  d.engine = [=, plan = d.plan](const RealFn& g) {
    const double w = b - a;
    auto h = [&](double v) {
      if (v == 0.0) return 0.0;
      const double t = detail::int_pow(v, r);
      return 0.5 * m * std::pow(v, m - 1.0) * (g(a + w * t) + g(b - w * t));
    };
    QuadraturePlan p = plan;
    p.abs_tolerance = std::min(plan.abs_tolerance, 1e-13);
    return detail::integrate_or_best(h, 0.0, 1.0, p);
  };
  return RandomVariable(std::move(d));
}

/// rate e^(-rate (x-a)) on [a, inf).
inline RandomVariable exponential_law(double rate, double a = 0.0) {
  if (!(rate > 0.0) || !std::isfinite(rate) || !std::isfinite(a)) fail(ErrorKind::construction, "exponential needs rate > 0");
  Density d;
  d.family = "exponential";
  d.params = {{"rate", rate}};
  d.support = {a, kInf};
  d.pdf = [=](double x) { return x < a ? 0.0 : rate * std::exp(-rate * (x - a)); };
  d.quantile = [=](double u) { return a - std::log1p(-u) / rate; };
  d.engine = [pdf = d.pdf, q = d.quantile, plan = d.plan](const RealFn& g) { return detail::tail_pieces(g, pdf, q, plan); };
  return RandomVariable(std::move(d));
}

/// shape xm^shape / x^(shape+1) on [xm, inf).
inline RandomVariable pareto(double shape, double xm) {
  if (!(shape > 0.0) || !(xm > 0.0) || !std::isfinite(shape) || !std::isfinite(xm))
    fail(ErrorKind::construction, "pareto needs shape > 0 and scale > 0");
  Density d;
  d.family = "pareto";
  d.params = {{"shape", shape}};
  d.support = {xm, kInf};
  d.pdf = [=](double x) { return x < xm ? 0.0 : shape / xm * std::pow(xm / x, shape + 1.0); };
  d.quantile = [=](double u) { return xm * std::pow(1.0 - u, -1.0 / shape); };
  d.engine = [pdf = d.pdf, q = d.quantile, plan = d.plan](const RealFn& g) { return detail::tail_pieces(g, pdf, q, plan); };
  return RandomVariable(std::move(d));
}

/// Density from a user pdf on a bounded support; checks normalization.
inline RandomVariable custom_density(RealFn pdf, double a, double b, QuadraturePlan plan = {}) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::construction, "custom density needs finite a < b");
  const auto mass = detail::integrate_or_best(pdf, a, b, plan);
  if (std::abs(mass.value - 1.0) > std::max(plan.abs_tolerance, mass.error) * 10.0)
    fail(ErrorKind::construction, "density does not integrate to 1 (got " + detail::fmt_num(mass.value) + ")");
  for (int i = 0; i <= 256; ++i)
    if (pdf(a + (b - a) * i / 256.0) < 0.0) fail(ErrorKind::construction, "density is negative on its support");
  Density d;
  d.family = "custom";
  d.support = {a, b};
  d.pdf = pdf;
  d.plan = plan;
  d.engine = [pdf, a, b, plan](const RealFn& g) {
    return detail::integrate_or_best([&](double x) { return g(x) * pdf(x); }, a, b, plan);
  };
  return RandomVariable(std::move(d));
}

/// a with probability t, b with probability 1 - t. Zero-probability atoms are dropped.
inline RandomVariable two_point(double a, double b, double t) {
  if (!(a < b)) fail(ErrorKind::construction, "two_point needs a < b");
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::construction, "two_point needs t in [0, 1]");
  Discrete d;
  if (t > 0.0) {
    d.atoms.push_back(a);
    d.probs.push_back(t);
  }
  if (t < 1.0) {
    d.atoms.push_back(b);
    d.probs.push_back(1.0 - t);
  }
  return RandomVariable(std::move(d));
}

inline RandomVariable point_mass(double c) { return RandomVariable(Discrete{{c}, {1.0}}); }

// ---------------------------------------------------------------------------
// Expectations and moments

/// E g(X) with no domain check.
inline Expectation expect(const RandomVariable& X, const RealFn& g) {
  if (X.is_discrete()) {
    const auto& d = X.discrete();
    CompensatedSum s;
    for (std::size_t i = 0; i < d.atoms.size(); ++i)
      if (d.probs[i] != 0.0) s.add(d.probs[i] * g(d.atoms[i]));
    return {s.value(), 4.0 * kEps * s.magnitude()};
  }
  if (X.is_sample()) {
    const auto& v = X.sample().values;
    CompensatedSum s;
    std::vector<double> gv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      gv[i] = g(v[i]);
      s.add(gv[i]);
    }
    const double n = static_cast<double>(v.size());
    const double mean = s.value() / n;
    if (v.size() < 2) return {mean, 0.0};
    CompensatedSum ss;
    for (double x : gv) ss.add((x - mean) * (x - mean));
    return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
  }
  const auto r = X.density().engine(g);
  return {r.value, r.error};
}

/// E f(X); the support of X must lie in the domain of f.
inline Expectation expect(const RandomVariable& X, const FunctionSpec& f, const ToleranceProfile& tol = {}) {
  if (!f.domain().contains(X.support(), tol.eq_abs))
    fail(ErrorKind::domain_mismatch, "support of X is not inside the domain of " + f.label());
  const RealFn g = f.as_fn();
  return expect(X, g);
}

inline double mean(const RandomVariable& X) {
  return expect(X, [](double x) { return x; }).value;
}

/// E(X - shift)^order (side above) or E(shift - X)^order (side below) and the
/// matching norm. Values are divided by the support width before powering.
inline MomentReport shifted_moment(const RandomVariable& X, double shift, int order, MomentSide side = MomentSide::above,
                                   const ToleranceProfile& tol = {}) {
  if (order < 1 || order > 64) fail(ErrorKind::domain, "moment order must be in 1..64");
  const Interval s = X.support();
  const double sgn = side == MomentSide::above ? 1.0 : -1.0;
  if (side == MomentSide::above && s.lo < shift - tol.eq_abs)
    fail(ErrorKind::support_violation, "mass lies below the shift " + detail::fmt_num(shift));
  if (side == MomentSide::below && s.hi > shift + tol.eq_abs)
    fail(ErrorKind::support_violation, "mass lies above the reflection point " + detail::fmt_num(shift));
  double scale = side == MomentSide::above ? s.hi - shift : shift - s.lo;
  if (!std::isfinite(scale) || !(scale > 0.0)) scale = 1.0;

  auto term = [=](double x) {
    const double t = std::max(0.0, sgn * (x - shift)) / scale;
    return detail::int_pow(t, order);
  };
  MomentReport rep;
  rep.order = order;
  rep.shift = shift;
  Expectation e;
  if (X.is_discrete()) {
    rep.method = MomentMethod::exact_sum;
    e = expect(X, term);
  } else if (X.is_sample()) {
    rep.method = MomentMethod::monte_carlo;
    rep.mc_n = X.sample().values.size();
    rep.mc_seed = X.sample().seed;
    e = expect(X, term);
  } else {
    rep.method = MomentMethod::quadrature;
    e = expect(X, term);
  }
  const double pow_scale = std::pow(scale, order);
  rep.raw = e.value * pow_scale;
  rep.norm = pnorm_shifted(std::max(0.0, e.value), order, scale);
  rep.error_estimate = e.error_estimate * pow_scale;
  return rep;
}

/// n independent draws with std::mt19937_64(seed); u = (word >> 11) 2^-53.
/// Discrete laws and densities with a quantile use the inverse CDF; other
/// densities invert a tabulated CDF; samples are resampled with replacement.
inline RandomVariable sample_mc(const RandomVariable& X, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::input, "sample_mc needs n >= 1");
  std::mt19937_64 rng(seed);
  Sample out;
  out.seed = seed;
  out.values.reserve(n);
  if (X.is_discrete()) {
    const auto& d = X.discrete();
    std::vector<double> cdf(d.probs.size());
    std::partial_sum(d.probs.begin(), d.probs.end(), cdf.begin());
    for (std::size_t i = 0; i < n; ++i) {
      const double u = detail::uniform01(rng) * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t k = std::min<std::size_t>(it - cdf.begin(), d.atoms.size() - 1);
      while (d.probs[k] == 0.0 && k > 0) --k;
      out.values.push_back(d.atoms[k]);
    }
  } else if (X.is_sample()) {
    const auto& v = X.sample().values;
    for (std::size_t i = 0; i < n; ++i) out.values.push_back(v[rng() % v.size()]);
  } else {
    const Density& d = X.density();
    if (d.quantile) {
      for (std::size_t i = 0; i < n; ++i) out.values.push_back(d.quantile(detail::uniform01(rng)));
    } else {
      constexpr int kCells = 4096;
      const double a = d.support.lo, b = d.support.hi, h = (b - a) / kCells;
      std::vector<double> cdf(kCells + 1, 0.0);
      const GaussRule& rule = gauss_legendre(16);
      for (int k = 0; k < kCells; ++k) {
        double mag = 0.0;
        cdf[k + 1] = cdf[k] + detail::apply_rule(rule, d.pdf, a + k * h, a + (k + 1) * h, mag);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double u = detail::uniform01(rng) * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const int k = std::clamp<int>(static_cast<int>(it - cdf.begin()) - 1, 0, kCells - 1);
        const double span = cdf[k + 1] - cdf[k];
        const double frac = span > 0 ? (u - cdf[k]) / span : 0.5;
        out.values.push_back(a + (k + frac) * h);
      }
    }
  }
  return RandomVariable(std::move(out), X.support());
}

// ---------------------------------------------------------------------------
// JSON descriptors

inline json to_json(const RandomVariable& X) {
  if (X.is_discrete()) return {{"kind", "discrete"}, {"atoms", X.discrete().atoms}, {"probs", X.discrete().probs}};
  if (X.is_sample()) return {{"kind", "sample"}, {"values", X.sample().values}};
  const Density& d = X.density();
  if (d.family == "custom") fail(ErrorKind::input, "custom densities have no descriptor");
  return {{"kind", "density"}, {"family", d.family}, {"params", d.params}, {"support", domain_to_json(d.support)}};
}

inline RandomVariable random_variable_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    fail(ErrorKind::input, "distribution descriptor needs a string \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  auto numbers = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) fail(ErrorKind::input, std::string("\"") + key + "\" must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j.at(key)) {
      if (!x.is_number()) fail(ErrorKind::input, std::string("\"") + key + "\" must contain only numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  std::optional<Interval> support;
  if (j.contains("support")) support = domain_from_json(j.at("support"));
  if (kind == "discrete") return RandomVariable(Discrete{numbers("atoms"), numbers("probs")}, support);
  if (kind == "sample") return RandomVariable(Sample{numbers("values"), std::nullopt}, support);
  if (kind != "density") fail(ErrorKind::input, "unknown distribution kind \"" + kind + "\"");
  if (!j.contains("family") || !j.at("family").is_string()) fail(ErrorKind::input, "density needs a string \"family\"");
  const std::string family = j.at("family").get<std::string>();
  const json params = j.value("params", json::object());
  if (!support) fail(ErrorKind::input, "density needs \"support\"");
  const double a = support->lo, b = support->hi;
  auto bounded = [&] {
    if (!std::isfinite(b)) fail(ErrorKind::input, family + " density needs a bounded support");
  };
  if (family == "uniform") {
    bounded();
    return uniform(a, b);
  }
  if (family == "beta-like") {
    bounded();
    return beta_like(detail::num_param(params, "alpha"), detail::num_param(params, "beta"), a, b);
  }
  if (family == "fractional-hh") {
    bounded();
    return fractional_hh(detail::num_param(params, "alpha"), a, b);
  }
  if (family == "exponential") {
    if (std::isfinite(b)) fail(ErrorKind::input, "exponential density needs support [a, \"inf\"]");
    return exponential_law(detail::num_param(params, "rate"), a);
  }
  if (family == "pareto") {
    if (std::isfinite(b)) fail(ErrorKind::input, "pareto density needs support [xm, \"inf\"]");
    return pareto(detail::num_param(params, "shape"), a);
  }
  fail(ErrorKind::input, "unknown density family \"" + family + "\"");
}

}  // namespace pconvex
