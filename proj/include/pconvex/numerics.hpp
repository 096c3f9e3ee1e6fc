#pragma once

// Numerical kernels shared by every other module: the gamma function,
// Gauss-Legendre / Gauss-Jacobi / adaptive Simpson quadrature, shifted
// p-norm rescaling, bracketed monotone inversion and finite differences.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pconvex/error.hpp"

namespace pconvex {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Tolerances used by certification and equality checks.
struct ToleranceProfile {
  double eq_abs = 1e-10;
  double eq_rel = 1e-9;
  double certify_slack = 1e-8;  ///< slack when testing "margin >= 0" on grids
  double fd_step = 1e-5;        ///< base step for finite differences

  void validate() const {
    if (!(eq_abs > 0 && eq_rel > 0 && certify_slack > 0 && fd_step > 0))
      fail(ErrorKind::input, "tolerance profile fields must be strictly positive");
  }
};

// ---------------------------------------------------------------------------
// Compensated summation

/// Neumaier summation; the discrete expectation oracle relies on it for the
/// 1e-12 equality checks.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    abs_ += std::abs(v);
  }
  double value() const { return sum_ + comp_; }
  /// Sum of magnitudes, used to size round-off estimates.
  double magnitude() const { return abs_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double abs_ = 0.0;
};

// ---------------------------------------------------------------------------
// Gamma function

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double xm1) {
  double acc = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) acc += kLanczosCoef[i] / (xm1 + static_cast<double>(i));
  return acc;
}

}  // namespace detail

/// Gamma function for 0 < x <= 170.
inline double gamma(double x) {
  if (!(x > 0.0) || std::isnan(x)) fail(ErrorKind::domain, "gamma requires x > 0, got " + std::to_string(x));
  if (x > 170.0) fail(ErrorKind::overflow, "gamma(" + std::to_string(x) + ") exceeds double range");
  if (x == std::floor(x)) {
    double r = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) r *= k;
    return r;
  }
  if (x < 0.5) {
    // reflection; 1 - x lies in (0.5, 1)
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma(1.0 - x));
  }
  const double xm1 = x - 1.0;
  const double t = xm1 + detail::kLanczosG + 0.5;
  // t^(xm1+0.5) is split in two halves so it cannot overflow before exp(-t) is applied.
  const double half = std::pow(t, 0.5 * (xm1 + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * detail::lanczos_sum(xm1);
}

/// log Gamma(x) for x > 0, no upper limit.
inline double log_gamma(double x) {
  if (!(x > 0.0) || std::isnan(x)) fail(ErrorKind::domain, "log_gamma requires x > 0");
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  const double xm1 = x - 1.0;
  const double t = xm1 + detail::kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) - t +
         std::log(detail::lanczos_sum(xm1));
}

// ---------------------------------------------------------------------------
// exp Taylor tail, e^x - sum_{j<=p} x^j / j!

/// Evaluated by its own power series wherever the direct difference would
/// cancel. p = -1 gives e^x.
inline double exp_taylor_tail(int p, double x) {
  if (p < 0) return std::exp(x);
  const double ax = std::abs(x);
  if (ax <= 2.0 || ax <= static_cast<double>(p) + 1.0) {
    double term = 1.0;
    for (int j = 1; j <= p + 1; ++j) term *= x / j;
    double sum = 0.0;
    for (int j = p + 1; j < p + 400; ++j) {
      sum += term;
      if (std::abs(term) <= kEps * 0.25 * std::abs(sum)) break;
      term *= x / (j + 1);
    }
    return sum;
  }
  double poly = 0.0;
  double term = 1.0;
  for (int j = 0; j <= p; ++j) {
    poly += term;
    term *= x / (j + 1);
  }
  return std::exp(x) - poly;
}

// ---------------------------------------------------------------------------
// Quadrature

enum class QuadratureRule { gauss_legendre, gauss_jacobi, adaptive_simpson };

struct QuadraturePlan {
  QuadratureRule rule = QuadratureRule::gauss_legendre;
  int node_count = 64;
  double abs_tolerance = 1e-10;
  int max_refinements = 12;
  double jacobi_alpha = 1.0;  ///< weight exponent is jacobi_alpha - 1; only read by gauss_jacobi

  void validate() const {
    if (node_count < 2) fail(ErrorKind::input, "quadrature node_count must be >= 2");
    if (!(abs_tolerance >= 0.0)) fail(ErrorKind::input, "quadrature abs_tolerance must be >= 0");
    if (max_refinements < 0) fail(ErrorKind::input, "quadrature max_refinements must be >= 0");
    if (rule == QuadratureRule::gauss_jacobi && !(jacobi_alpha > 0.0))
      fail(ErrorKind::input, "gauss-jacobi weight needs alpha > 0");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 4 * kEps) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

// Implicit QL on a symmetric tridiagonal matrix (diag d, off-diagonal e),
// carrying along the first components z of the eigenvectors. Golub-Welsch.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  if (n == 1) return;
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int iter = 0;; ++iter) {
      int m = l;
      for (; m < n - 1; ++m) {
        if (std::abs(e[m]) <= kEps * (std::abs(d[m]) + std::abs(d[m + 1]))) break;
      }
      if (m == l) break;
      if (iter >= 60) fail(ErrorKind::convergence, "tridiagonal QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
      double s = 1.0, c = 1.0, p = 0.0;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        if (std::abs(g) <= std::abs(f)) {
          c = g / f;
          r = std::hypot(c, 1.0);
          e[i + 1] = f * r;
          s = 1.0 / r;
          c *= s;
        } else {
          s = f / g;
          r = std::hypot(s, 1.0);
          e[i + 1] = g * r;
          c = 1.0 / r;
          s *= c;
        }
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

// Weight (1 - x)^wa (1 + x)^wb on [-1, 1], wa, wb > -1.
inline GaussRule compute_gauss_jacobi(int n, double wa, double wb) {
  const double ab = wa + wb;
  std::vector<double> d(n), e(n), z(n, 0.0);
  const double log_mu0 = (ab + 1.0) * std::log(2.0) + log_gamma(wa + 1.0) + log_gamma(wb + 1.0) -
                         log_gamma(ab + 2.0);
  double abi = 2.0 + ab;
  d[0] = (wb - wa) / abi;
  e[0] = std::sqrt(4.0 * (1.0 + wa) * (1.0 + wb) / ((abi + 1.0) * abi * abi));
  const double a2b2 = wb * wb - wa * wa;
  for (int i = 2; i <= n; ++i) {
    abi = 2.0 * i + ab;
    d[i - 1] = a2b2 / ((abi - 2.0) * abi);
    const double abi2 = abi * abi;
    e[i - 1] = std::sqrt(4.0 * i * (i + wa) * (i + wb) * (i + ab) / ((abi2 - 1.0) * abi2));
  }
  z[0] = std::exp(0.5 * log_mu0);
  tridiagonal_ql(d, e, z);
  std::vector<std::size_t> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  GaussRule r;
  r.nodes.reserve(n);
  r.weights.reserve(n);
  for (auto i : order) {
    r.nodes.push_back(d[i]);
    r.weights.push_back(z[i] * z[i]);
  }
  return r;
}

// Memoized rules. The cache only ever stores the deterministic output of the
// compute_* functions, so callers see identical values with or without it.
class RuleCache {
 public:
  const GaussRule& legendre(int n) {
    std::lock_guard lock(mu_);
    auto it = legendre_.find(n);
    if (it == legendre_.end()) it = legendre_.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
  }
  const GaussRule& jacobi(int n, double wa, double wb) {
    std::lock_guard lock(mu_);
    const auto key = std::make_tuple(n, wa, wb);
    auto it = jacobi_.find(key);
    if (it == jacobi_.end()) it = jacobi_.emplace(key, compute_gauss_jacobi(n, wa, wb)).first;
    return it->second;
  }

 private:
  std::mutex mu_;
  std::map<int, GaussRule> legendre_;
  std::map<std::tuple<int, double, double>, GaussRule> jacobi_;
};

inline RuleCache& rule_cache() {
  static RuleCache cache;
  return cache;
}

inline double apply_rule(const GaussRule& rule, const RealFn& f, double a, double b, double& magnitude) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  CompensatedSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
  magnitude += std::abs(half) * s.magnitude();
  return half * s.value();
}

struct SimpsonState {
  const RealFn* f;
  int max_depth;
  double error = 0.0;
  bool exhausted = false;
};

inline double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                           double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm), frm = (*st.f)(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= st.max_depth || std::abs(delta) <= 15.0 * tol || m <= a || m >= b) {
    if (std::abs(delta) > 15.0 * tol) st.exhausted = true;
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

inline GaussRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorKind::input, "gauss_legendre needs n >= 1");
  return detail::rule_cache().legendre(n);
}

/// Gauss-Jacobi rule for the weight (1 - x)^wa (1 + x)^wb on [-1, 1].
inline GaussRule gauss_jacobi(int n, double wa, double wb) {
  if (n < 1) fail(ErrorKind::input, "gauss_jacobi needs n >= 1");
  if (!(wa > -1.0 && wb > -1.0)) fail(ErrorKind::input, "gauss_jacobi weight exponents must exceed -1");
  return detail::rule_cache().jacobi(n, wa, wb);
}

/// Adaptive Simpson with Richardson correction. max_depth bounds recursion.
inline QuadratureResult adaptive_simpson(const RealFn& f, double a, double b, double tol, int max_depth = 50) {
  detail::SimpsonState st{&f, max_depth};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double v = detail::simpson_step(st, a, b, fa, fm, fb, whole, std::max(tol, 1e-300), 0);
  if (st.exhausted && st.error > tol)
    throw Error(ErrorKind::convergence, "adaptive Simpson exhausted its depth budget", v);
  return {v, st.error};
}

/// Integral of f over [a, b] with an error estimate.
///
/// Gauss-Legendre is applied on 1, 2, 4, ... equal panels; the difference of
/// two consecutive panel counts is the error estimate. The estimate is also
/// accepted once it reaches the round-off floor of the sum.
inline QuadratureResult integrate(const RealFn& f, double a, double b, const QuadraturePlan& plan = {}) {
  plan.validate();
  if (!(a < b)) fail(ErrorKind::domain, "integrate requires a < b");
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::domain, "integrate requires a finite interval");

  if (plan.rule == QuadratureRule::adaptive_simpson)
    return adaptive_simpson(f, a, b, plan.abs_tolerance, std::max(plan.max_refinements, 20));
  if (plan.rule == QuadratureRule::gauss_jacobi)
    fail(ErrorKind::input, "use integrate_jacobi for Jacobi-weighted integrals");

  auto composite = [&](int panels, double& magnitude) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    const GaussRule& rule = detail::rule_cache().legendre(plan.node_count);
    for (int k = 0; k < panels; ++k) {
      const double lo = a + k * h;
      const double hi = (k + 1 == panels) ? b : lo + h;
      sum += detail::apply_rule(rule, f, lo, hi, magnitude);
    }
    return sum;
  };

  double mag = 0.0;
  double prev = composite(1, mag);
  int panels = 1;
  for (int r = 0; r <= plan.max_refinements; ++r) {
    panels *= 2;
    double m2 = 0.0;
    const double cur = composite(panels, m2);
    const double err = std::abs(cur - prev);
    if (!std::isfinite(cur)) throw Error(ErrorKind::convergence, "integrand is not finite on the interval", cur);
    if (err <= plan.abs_tolerance || err <= 64.0 * kEps * m2) return {cur, err};
    prev = cur;
  }
  throw Error(ErrorKind::convergence, "Gauss-Legendre panel refinement did not reach tolerance", prev);
}

enum class WeightSide { left, right };

/// Integral over [a, b] of w(t) g(t) with w(t) = (t - a)^(alpha-1) (left) or
/// (b - t)^(alpha-1) (right). The weight is absorbed into Gauss-Jacobi nodes,
/// so g is never sampled at the singular endpoint.
inline QuadratureResult integrate_jacobi(const RealFn& g, double a, double b, double alpha, WeightSide side,
                                         const QuadraturePlan& plan = {}) {
  if (!(alpha > 0.0)) fail(ErrorKind::domain, "integrate_jacobi requires alpha > 0");
  if (!(a < b)) fail(ErrorKind::domain, "integrate_jacobi requires a < b");
  if (plan.node_count < 2) fail(ErrorKind::input, "quadrature node_count must be >= 2");
  const double w = alpha - 1.0;
  const double wa = side == WeightSide::right ? w : 0.0;  // (1 - x) <-> (b - t)
  const double wb = side == WeightSide::left ? w : 0.0;   // (1 + x) <-> (t - a)
  const double half = 0.5 * (b - a);
  const double scale = std::pow(half, alpha);
  const double mid = 0.5 * (a + b);

  auto eval = [&](int n, double& magnitude) {
    const GaussRule& rule = detail::rule_cache().jacobi(n, wa, wb);
    CompensatedSum s;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s.add(rule.weights[i] * g(mid + half * rule.nodes[i]));
    magnitude = scale * s.magnitude();
    return scale * s.value();
  };

  int n = plan.node_count;
  double mag = 0.0;
  double prev = eval(n, mag);
  for (int r = 0; r <= plan.max_refinements && n <= 2048; ++r) {
    n *= 2;
    const double cur = eval(n, mag);
    const double err = std::abs(cur - prev);
    if (!std::isfinite(cur)) throw Error(ErrorKind::convergence, "integrand is not finite on the interval", cur);
    if (err <= plan.abs_tolerance || err <= 64.0 * kEps * mag) return {cur, err};
    prev = cur;
  }
  throw Error(ErrorKind::convergence, "Gauss-Jacobi node doubling did not reach tolerance", prev);
}

// ---------------------------------------------------------------------------
// Norms

/// `scale * normalized^(1/order)`. Callers pass E|X-a|^order / scale^order so
/// the raw power never overflows for order <= 64.
inline double pnorm_shifted(double normalized_moment, int order, double scale = 1.0) {
  if (order < 1) fail(ErrorKind::domain, "pnorm order must be >= 1");
  if (normalized_moment < 0.0 || std::isnan(normalized_moment))
    fail(ErrorKind::domain, "pnorm of a negative moment");
  if (normalized_moment == 0.0) return 0.0;
  if (order == 1) return scale * normalized_moment;
  if (order == 2) return scale * std::sqrt(normalized_moment);
  return scale * std::pow(normalized_moment, 1.0 / order);
}

// ---------------------------------------------------------------------------
// Monotone inversion

/// Solve f(x) = y for strictly increasing f on [lo, hi].
///
/// Secant steps inside a shrinking bracket; a bisection step is forced
/// whenever a secant step fails to halve the bracket, so convergence never
/// relies on the secant. Iterates to the resolution of the bracket (at most
/// 200 steps), then checks |f(x) - y| <= eq_abs + eq_rel |y|.
inline double invert_monotone(const RealFn& f, double y, double lo, double hi, const ToleranceProfile& tol = {}) {
  if (!(lo <= hi)) fail(ErrorKind::bracket, "invert_monotone needs lo <= hi");
  double flo = f(lo) - y;
  double fhi = f(hi) - y;
  const double accept = tol.eq_abs + tol.eq_rel * std::abs(y);
  if (flo > 0.0) {
    if (flo <= accept) return lo;
    fail(ErrorKind::bracket, "target below f(lo)");
  }
  if (fhi < 0.0) {
    if (-fhi <= accept) return hi;
    fail(ErrorKind::bracket, "target above f(hi)");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  bool force_bisect = false;
  for (int it = 0; it < 200; ++it) {
    const double width = hi - lo;
    double x;
    if (!force_bisect && fhi != flo) {
      x = hi - fhi * (hi - lo) / (fhi - flo);
      if (!(x > lo && x < hi)) x = lo + 0.5 * width;
    } else {
      x = lo + 0.5 * width;
    }
    if (x <= lo || x >= hi) break;  // bracket at double resolution
    const double fx = f(x) - y;
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    force_bisect = !force_bisect && (hi - lo) > 0.5 * width;
  }
  const double x = (-flo <= fhi) ? lo : hi;
  const double r = std::min(-flo, fhi);
  if (!(r <= accept)) throw Error(ErrorKind::convergence, "invert_monotone residual above tolerance", x);
  return x;
}

/// As above without a bracket: starts at [lo, lo + 1] and doubles the width
/// up to 2^40 until the target is enclosed.
inline double invert_monotone(const RealFn& f, double y, double lo, const ToleranceProfile& tol = {}) {
  double width = 1.0;
  while (f(lo + width) < y) {
    width *= 2.0;
    if (width > 0x1.0p40) fail(ErrorKind::bracket, "no bracket found up to 2^40");
  }
  return invert_monotone(f, y, lo, lo + width, tol);
}

// ---------------------------------------------------------------------------
// Finite differences

namespace detail {

inline double central_difference(const RealFn& f, double x, int k, double h) {
  switch (k) {
    case 1: return (f(x + h) - f(x - h)) / (2.0 * h);
    case 2: return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    case 3: return (f(x + 2 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2 * h)) / (2.0 * h * h * h);
    default:
      return (f(x + 2 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2 * h)) / (h * h * h * h);
  }
}

// k-th forward (h > 0) or backward (h < 0) difference quotient, error O(h).
inline double one_sided_difference(const RealFn& f, double x, int k, double h) {
  double binom = 1.0, sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binom * f(x + j * h);
    binom = binom * (k - j) / (j + 1);
  }
  return sum / std::pow(h, k);
}

}  // namespace detail

/// k-th derivative (1 <= k <= 4) by finite differences with Richardson
/// extrapolation, O(h^4) in the base step. Central stencils are used when
/// they fit inside [lo, hi], one-sided ones otherwise.
inline double fd_derivative(const RealFn& f, double x, int k, double lo = -kInf, double hi = kInf,
                            double base_step = 1e-5) {
  if (k < 1 || k > 4) fail(ErrorKind::input, "fd_derivative supports orders 1..4");
  double h = std::max(1.0, std::abs(x)) * std::pow(base_step, 3.0 / (k + 4.0));
  if (std::isfinite(hi - lo)) h = std::min(h, (hi - lo) / (8.0 * k));
  const double reach = (k <= 2 ? 1.0 : 2.0) * h;
  if (x - reach >= lo && x + reach <= hi) {
    const double d1 = detail::central_difference(f, x, k, h);
    const double d2 = detail::central_difference(f, x, k, 0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
  }
  // One-sided: Richardson over h, h/2, h/4, h/8 removes the O(h), O(h^2), O(h^3) terms.
  const double dir = (x + k * h <= hi) ? 1.0 : -1.0;
  std::array<double, 4> t{};
  for (int i = 0; i < 4; ++i) t[i] = detail::one_sided_difference(f, x, k, dir * h / std::pow(2.0, i));
  for (int level = 1; level < 4; ++level) {
    const double factor = std::pow(2.0, level);
    for (int i = 3; i >= level; --i) t[i] = (factor * t[i] - t[i - 1]) / (factor - 1.0);
  }
  return t[3];
}

}  // namespace pconvex
