#pragma once

// Moment bounds on E exp(sX) for X >= 0, built from the (p-1)-th Taylor
// remainder of exp, and the generalized AM-GM bound obtained with X = ln Y.

#include "pconvex/distributions.hpp"

namespace pconvex {

struct MgfBoundReport {
  double s = 0.0;
  int p = 1;
  double norm = 0.0;  ///< ||X||_p
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> exact;  ///< E exp(sX), absent when the oracle does not converge
  double exact_error = 0.0;
  std::vector<double> moments_used;  ///< E X^j, j = 1..p-1
};

inline json to_json(const MgfBoundReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"s", r.s},         {"p", r.p},         {"norm", r.norm}, {"lower", opt(r.lower)}, {"upper", opt(r.upper)},
          {"exact", opt(r.exact)}, {"exact_error", r.exact_error}, {"moments_used", r.moments_used}};
}

namespace detail {

inline void check_mgf_inputs(const RandomVariable& X, double s, int p) {
  if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorKind::domain, "s must be finite and >= 0");
  if (p < 1 || p > 64) fail(ErrorKind::domain, "p must be in 1..64");
  if (X.support().lo < 0.0) fail(ErrorKind::support_violation, "X must be >= 0");
}

/// sum_{j<p} s^j E X^j / j!, filling E X^j into `moments`.
inline double taylor_head(const RandomVariable& X, double s, int p, std::vector<double>& moments) {
  CompensatedSum sum;
  sum.add(1.0);
  double coef = 1.0;
  for (int j = 1; j < p; ++j) {
    const double m = shifted_moment(X, 0.0, j).raw;
    moments.push_back(m);
    coef *= s / j;
    sum.add(coef * m);
  }
  return sum.value();
}

inline void attach_exact(MgfBoundReport& r, const RandomVariable& X, double s) {
  try {
    const auto e = expect(X, [s](double x) { return std::exp(s * x); });
    if (std::isfinite(e.value)) {
      r.exact = e.value;
      r.exact_error = e.error_estimate;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::moment_infinite && e.kind() != ErrorKind::convergence) throw;
  }
}

}  // namespace detail

/// E e^{sX} >= T_{p-1}(s ||X||_p) + sum_{j<p} s^j E X^j / j!.
inline MgfBoundReport mgf_lower(const RandomVariable& X, double s, int p) {
  detail::check_mgf_inputs(X, s, p);
  MgfBoundReport r;
  r.s = s;
  r.p = p;
  r.norm = shifted_moment(X, 0.0, p).norm;
  const double head = detail::taylor_head(X, s, p, r.moments_used);
  r.lower = exp_taylor_tail(p - 1, s * r.norm) + head;
  detail::attach_exact(r, X, s);
  return r;
}

/// E e^{sX} <= (E X^p / b^p) T_{p-1}(s b) + sum_{j<p} s^j E X^j / j! for X on [0, b].
/// b defaults to the upper end of the support.
inline MgfBoundReport mgf_upper(const RandomVariable& X, double s, int p, std::optional<double> b = std::nullopt) {
  detail::check_mgf_inputs(X, s, p);
  const double sup = X.support().hi;
  if (!std::isfinite(sup)) fail(ErrorKind::unbounded_support, "the upper bound needs X on a bounded [0, b]");
  const double B = b.value_or(sup);
  if (B < sup) fail(ErrorKind::support_violation, "X has mass above b");
  MgfBoundReport r;
  r.s = s;
  r.p = p;
  r.norm = shifted_moment(X, 0.0, p).norm;
  const double head = detail::taylor_head(X, s, p, r.moments_used);
  const double ratio = B > 0.0 ? detail::int_pow(r.norm / B, p) : 0.0;
  r.upper = ratio * exp_taylor_tail(p - 1, s * B) + head;
  detail::attach_exact(r, X, s);
  return r;
}

struct AmGmReport {
  int p = 1;
  double lower = 0.0;
  double mean = 0.0;            ///< E Y
  double geometric_mean = 0.0;  ///< exp(E ln Y)
};

inline json to_json(const AmGmReport& r) {
  return {{"p", r.p}, {"lower", r.lower}, {"mean", r.mean}, {"geometric_mean", r.geometric_mean}};
}

/// exp(||ln Y||_p) - sum_{j<p} ||ln Y||_p^j / j! + E sum_{j<p} (ln Y)^j / j!  <=  E Y, for Y >= 1.
/// At p = 1 this is the geometric mean.
inline AmGmReport am_gm_lower(const RandomVariable& Y, int p) {
  if (p < 1 || p > 64) fail(ErrorKind::domain, "p must be in 1..64");
  if (Y.support().lo < 1.0) fail(ErrorKind::support_violation, "Y must be >= 1");
  AmGmReport r;
  r.p = p;
  const double mp = expect(Y, [p](double y) { return detail::int_pow(std::log(y), p); }).value;
  const double n = pnorm_shifted(std::max(0.0, mp), p);
  CompensatedSum head;
  head.add(1.0);
  double fact = 1.0;
  for (int j = 1; j < p; ++j) {
    fact *= j;
    head.add(expect(Y, [j](double y) { return detail::int_pow(std::log(y), j); }).value / fact);
  }
  r.lower = exp_taylor_tail(p - 1, n) + head.value();
  r.mean = mean(Y);
  r.geometric_mean = std::exp(expect(Y, [](double y) { return std::log(y); }).value);
  return r;
}

}  // namespace pconvex
