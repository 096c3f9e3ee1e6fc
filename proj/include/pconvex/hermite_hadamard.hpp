#pragma once

// Hermite-Hadamard type bounds on the integral average of f over [a, b] for
// f in I(p-1, a, b), their Riemann-Liouville fractional analogue, and the
// trapezoid-error bound for functions whose |f'| is (p-1, a, b)-convex.

#include "pconvex/convexity.hpp"
#include "pconvex/distributions.hpp"

namespace pconvex {

struct HHReport {
  int p = 1;
  std::optional<double> alpha;  ///< set for the fractional variant
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;  ///< weight of f(b) in the upper bound
  double lower = 0.0;
  double mid = 0.0;
  double mid_error = 0.0;
  /// Fractional mid term recomputed as E f(X) under the fractional density.
  std::optional<double> mid_density;
  double upper = 0.0;
  double classical_lower = 0.0;
  double classical_upper = 0.0;
};

inline json to_json(const HHReport& r) {
  json j{{"p", r.p},         {"a", r.a},         {"b", r.b},
         {"gamma", r.gamma}, {"lower", r.lower}, {"mid", r.mid},
         {"mid_error", r.mid_error}, {"upper", r.upper}, {"classical_lower", r.classical_lower},
         {"classical_upper", r.classical_upper}};
  j["alpha"] = r.alpha ? json(*r.alpha) : json(nullptr);
  if (r.mid_density) j["mid_density"] = *r.mid_density;
  return j;
}

namespace detail {

inline void require_hh_certificate(const ConvexityCertificate& c, const std::string& label, int p) {
  if (c.check != "membership" || c.cls != ConvexityClass::I)
    fail(ErrorKind::certificate, "bound needs a certificate of class I");
  if (!c.pass) fail(ErrorKind::certificate, "certificate for " + c.function_label + " did not pass");
  if (c.function_label != label)
    fail(ErrorKind::certificate, "certificate was issued for " + c.function_label + ", not " + label);
  if (c.p != p - 1)
    fail(ErrorKind::certificate, "bound of order p = " + std::to_string(p) + " needs a certificate at order p - 1 = " +
                                     std::to_string(p - 1) + ", got " + std::to_string(c.p));
}

/// Point t^(1/p) b + (1 - t^(1/p)) a with the root taken in log space.
inline double weighted_point(double t, int p, double a, double b) {
  const double w = std::exp(std::log(t) / p);
  return w * b + (1.0 - w) * a;
}

}  // namespace detail

/// gamma(p, alpha) = alpha / (2 (alpha + p)) + Gamma(alpha+1) Gamma(p+1) / (2 Gamma(alpha+p+1)).
/// The gamma ratio is the product prod_{j=1}^p j / (alpha + j), finite for any alpha.
inline double gamma_coefficient(int p, double alpha) {
  if (p < 1) fail(ErrorKind::domain, "gamma coefficient needs p >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::domain, "gamma coefficient needs alpha > 0");
  double prod = 1.0;
  for (int j = 1; j <= p; ++j) prod *= j / (alpha + j);
  return alpha / (2.0 * (alpha + p)) + 0.5 * prod;
}

/// f((p+1)^(-1/p) b + (1 - (p+1)^(-1/p)) a) <= avg f <= (p f(a) + f(b)) / (p + 1).
inline HHReport hh_bounds(const FunctionSpec& f, const ConvexityCertificate& cert, int p, const QuadraturePlan& plan = {}) {
  if (p < 1) fail(ErrorKind::domain, "hh bounds need p >= 1");
  detail::require_hh_certificate(cert, f.label(), p);
  const double a = cert.a, b = cert.b;
  HHReport r;
  r.p = p;
  r.a = a;
  r.b = b;
  r.gamma = 1.0 / (p + 1.0);
  r.lower = f(detail::weighted_point(r.gamma, p, a, b));
  const auto q = integrate(f.as_fn(), a, b, plan);
  r.mid = q.value / (b - a);
  r.mid_error = q.error / (b - a);
  const double fa = f(a), fb = f(b);
  r.upper = (p * fa + fb) / (p + 1.0);
  r.classical_lower = f(0.5 * (a + b));
  r.classical_upper = 0.5 * (fa + fb);
  return r;
}

struct TaylorHH {
  double lower = 0.0;
  double mid = 0.0;
  double upper = 0.0;
};

/// The three terms for f = T_{p-1} on [0, b]: T_{p-1}((p+1)^(-1/p) b) <= T_p(b) / b <= T_{p-1}(b) / (p + 1).
inline TaylorHH taylor_hh(int p, double b) {
  if (p < 1) fail(ErrorKind::domain, "taylor_hh needs p >= 1");
  if (!(b > 0.0) || !std::isfinite(b)) fail(ErrorKind::domain, "taylor_hh needs b > 0");
  const FunctionSpec f = exp_taylor_remainder(p - 1);
  TaylorHH t;
  t.lower = f(detail::weighted_point(1.0 / (p + 1.0), p, 0.0, b));
  t.mid = exp_taylor_tail(p, b) / b;  // (1/b) int_0^b T_{p-1} = T_p(b) / b
  t.upper = f(b) / (p + 1.0);
  return t;
}

struct DerivativeHHReport {
  int p = 1;
  double a = 0.0;
  double b = 0.0;
  double c_p = 0.5;
  double lhs = 0.0;
  double rhs = 0.0;
};

inline json to_json(const DerivativeHHReport& r) {
  return {{"p", r.p}, {"a", r.a}, {"b", r.b}, {"c_p", r.c_p}, {"lhs", r.lhs}, {"rhs", r.rhs}};
}

/// |(f(a) + f(b))/2 - avg f| <= (b - a)/4 (c_p |f'(a)| + (1 - c_p) |f'(b)|),
/// c_p = 2 (p + 2^-p) / ((p + 1)(p + 2)), with cert certifying |f'| (see abs_derivative).
inline DerivativeHHReport derivative_hh_bound(const FunctionSpec& f, const ConvexityCertificate& cert, int p,
                                              const QuadraturePlan& plan = {}) {
  if (p < 1) fail(ErrorKind::domain, "derivative bound needs p >= 1");
  const double a = cert.a, b = cert.b;
  const FunctionSpec g = abs_derivative(f, a, b);
  detail::require_hh_certificate(cert, g.label(), p);
  DerivativeHHReport r;
  r.p = p;
  r.a = a;
  r.b = b;
  r.c_p = 2.0 * (p + std::pow(0.5, p)) / ((p + 1.0) * (p + 2.0));
  const double avg = integrate(f.as_fn(), a, b, plan).value / (b - a);
  r.lhs = std::abs(0.5 * (f(a) + f(b)) - avg);
  r.rhs = 0.25 * (b - a) * (r.c_p * g(a) + (1.0 - r.c_p) * g(b));
  return r;
}

enum class RLSide { left, right };  ///< I_{a+} and I_{b-}

/// I_{a+}^alpha f(x) = (1/Gamma(alpha)) int_a^x (x - t)^(alpha-1) f(t) dt, or
/// I_{b-}^alpha f(x) = (1/Gamma(alpha)) int_x^b (t - x)^(alpha-1) f(t) dt.
/// The kernel singularity is absorbed by Gauss-Jacobi. alpha = 0 returns f(x).
inline QuadratureResult rl_integral(const FunctionSpec& f, double alpha, RLSide side, double a, double b, double x,
                                    const QuadraturePlan& plan = {}) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::domain, "fractional order must be >= 0");
  if (!(a < b)) fail(ErrorKind::domain, "rl_integral needs a < b");
  if (x < a || x > b) fail(ErrorKind::domain, "x must lie in [a, b]");
  if (!f.domain().contains(Interval{a, b})) fail(ErrorKind::domain_mismatch, "[a, b] is not inside the domain of " + f.label());
  if (alpha == 0.0) return {f(x), 0.0};
  const RealFn g = f.as_fn();
  QuadratureResult r;
  if (side == RLSide::left) {
    if (x == a) return {0.0, 0.0};
    r = integrate_jacobi(g, a, x, alpha, WeightSide::right, plan);
  } else {
    if (x == b) return {0.0, 0.0};
    r = integrate_jacobi(g, x, b, alpha, WeightSide::left, plan);
  }
  const double inv_gamma = std::exp(-log_gamma(alpha));
  return {r.value * inv_gamma, r.error * inv_gamma};
}

/// Fractional bounds:
///   f(gamma^(1/p) b + (1 - gamma^(1/p)) a)
///     <= Gamma(alpha+1) / (2 (b-a)^alpha) (I_{a+}^alpha f(b) + I_{b-}^alpha f(a))
///     <= gamma f(b) + (1 - gamma) f(a),   gamma = gamma_coefficient(p, alpha).
inline HHReport fractional_hh_bounds(const FunctionSpec& f, const ConvexityCertificate& cert, int p, double alpha,
                                     const QuadraturePlan& plan = {}) {
  if (p < 1) fail(ErrorKind::domain, "fractional bounds need p >= 1");
  detail::require_hh_certificate(cert, f.label(), p);
  const double a = cert.a, b = cert.b;
  if (a < 0.0) fail(ErrorKind::domain, "fractional bounds need 0 <= a");
  HHReport r;
  r.p = p;
  r.alpha = alpha;
  r.a = a;
  r.b = b;
  r.gamma = gamma_coefficient(p, alpha);
  r.lower = f(detail::weighted_point(r.gamma, p, a, b));
  // With t = a + (b-a) u the prefactor and Gamma(alpha) cancel to
  //   mid = (alpha/2) (int_0^1 (1-u)^(alpha-1) f dt + int_0^1 u^(alpha-1) f du).
  auto h = [&](double u) { return f(a + (b - a) * u); };
  const auto left = integrate_jacobi(h, 0.0, 1.0, alpha, WeightSide::right, plan);
  const auto right = integrate_jacobi(h, 0.0, 1.0, alpha, WeightSide::left, plan);
  r.mid = 0.5 * alpha * (left.value + right.value);
  r.mid_error = 0.5 * alpha * (left.error + right.error);
  r.mid_density = expect(fractional_hh(alpha, a, b), f.as_fn()).value;
  const double fa = f(a), fb = f(b);
  r.upper = r.gamma * fb + (1.0 - r.gamma) * fa;
  r.classical_lower = f(0.5 * (a + b));
  r.classical_upper = 0.5 * (fa + fb);
  return r;
}

}  // namespace pconvex
