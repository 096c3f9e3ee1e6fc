#pragma once

// Moment-based Jensen bounds for (p, a, b)-convex functions and their
// classical comparators. Each bound takes a passing certificate for the
// matching class; the certificate's p and [a, b] fix the bound's parameters.

#include <cstdio>

#include "pconvex/convexity.hpp"
#include "pconvex/distributions.hpp"

namespace pconvex {

enum class BoundDirection { lower, upper };

inline std::string_view to_string(BoundDirection d) { return d == BoundDirection::lower ? "lower" : "upper"; }

struct BoundReport {
  std::string kind;  ///< jensen-lower-I, jensen-upper-I, jensen-lower-D
  BoundDirection direction = BoundDirection::lower;
  int p = 0;
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  std::optional<double> oracle;  ///< E f(X), absent when skipped
  double oracle_error = 0.0;
  std::string classical_kind;  ///< classical-jensen-lower or classical-secant-upper
  double classical = 0.0;
  /// Oriented so that a valid bound gives gap_to_oracle >= 0 and a tighter
  /// than classical bound gives gap_to_classical >= 0.
  std::optional<double> gap_to_oracle;
  double gap_to_classical = 0.0;
  double moment_error = 0.0;
  std::string inputs_digest;
  std::string note;
};

struct BoundOptions {
  bool compute_oracle = true;
  ToleranceProfile tolerance;
};

inline json to_json(const BoundReport& r) {
  json j{{"kind", r.kind},
         {"direction", std::string(to_string(r.direction))},
         {"p", r.p},
         {"a", r.a},
         {"b", std::isfinite(r.b) ? json(r.b) : json("inf")},
         {"value", r.value},
         {"classical_kind", r.classical_kind},
         {"classical", r.classical},
         {"gap_to_classical", r.gap_to_classical},
         {"moment_error", r.moment_error},
         {"inputs_digest", r.inputs_digest}};
  j["oracle"] = r.oracle ? json(*r.oracle) : json(nullptr);
  j["oracle_error"] = r.oracle_error;
  j["gap_to_oracle"] = r.gap_to_oracle ? json(*r.gap_to_oracle) : json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

namespace detail {

/// FNV-1a over a canonical text of the inputs, as 16 hex digits.
inline std::string digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string describe(const RandomVariable& X) {
  if (X.is_density() && X.density().family == "custom")
    return "custom[" + fmt_num(X.support().lo) + "," + fmt_num(X.support().hi) + "]";
  return to_json(X).dump();
}

inline std::string inputs_digest(const std::string& kind, const FunctionSpec& f, const ConvexityCertificate& c,
                                 const RandomVariable& X) {
  const std::string fdesc = f.serializable() ? f.descriptor().dump() : f.label();
  json j{{"kind", kind}, {"f", fdesc}, {"p", c.p}, {"a", c.a}, {"b", c.b}, {"X", describe(X)}};
  return digest(j.dump());
}

inline void require_certificate(const ConvexityCertificate& c, ConvexityClass cls, const FunctionSpec& f) {
  if (c.check != "membership" || c.cls != cls)
    fail(ErrorKind::certificate, "bound needs a certificate of class " + std::string(to_string(cls)));
  if (!c.pass)
    fail(ErrorKind::certificate, "certificate for " + c.function_label + " did not pass (" +
                                     (c.witness ? c.witness->condition : std::string("no witness")) + ")");
  if (c.function_label != f.label())
    fail(ErrorKind::certificate, "certificate was issued for " + c.function_label + ", not " + f.label());
}

inline void fill_oracle(BoundReport& r, const FunctionSpec& f, const RandomVariable& X, const BoundOptions& o) {
  if (!o.compute_oracle) return;
  const auto e = expect(X, f, o.tolerance);
  r.oracle = e.value;
  r.oracle_error = e.error_estimate;
  r.gap_to_oracle = r.direction == BoundDirection::lower ? e.value - r.value : r.value - e.value;
}

}  // namespace detail

/// E f(X) >= f(a + ||X - a||_{p+1}) for f in I(p, a, b) and X on [a, b].
/// X may extend past b when f's domain is unbounded and the moment is finite.
inline BoundReport jensen_lower(const FunctionSpec& f, const ConvexityCertificate& cert, const RandomVariable& X,
                                const BoundOptions& opt = {}) {
  detail::require_certificate(cert, ConvexityClass::I, f);
  const double a = cert.a, tol = opt.tolerance.eq_abs;
  BoundReport r;
  r.kind = "jensen-lower-I";
  r.direction = BoundDirection::lower;
  r.p = cert.p;
  r.a = a;
  r.b = cert.b;
  if (X.support().lo < a - tol) fail(ErrorKind::support_violation, "X has mass below a = " + detail::fmt_num(a));
  if (X.support().hi > cert.b + tol) {
    if (std::isfinite(f.domain().hi))
      fail(ErrorKind::support_violation, "X has mass above b = " + detail::fmt_num(cert.b));
    r.b = kInf;
    r.note = "X extends past the certified interval; f certified on [a, " + detail::fmt_num(cert.b) + "]";
  }
  const auto m = shifted_moment(X, a, cert.p + 1, MomentSide::above, opt.tolerance);
  r.moment_error = m.error_estimate;
  r.value = f(a + m.norm);
  r.classical_kind = "classical-jensen-lower";
  r.classical = f(mean(X));
  r.gap_to_classical = r.value - r.classical;
  r.inputs_digest = detail::inputs_digest(r.kind, f, cert, X);
  detail::fill_oracle(r, f, X, opt);
  return r;
}

/// E f(X) <= (1 - m) f(a) + m f(b), m = E(X - a)^{p+1} / (b - a)^{p+1}, for X on bounded [a, b].
inline BoundReport jensen_upper(const FunctionSpec& f, const ConvexityCertificate& cert, const RandomVariable& X,
                                const BoundOptions& opt = {}) {
  detail::require_certificate(cert, ConvexityClass::I, f);
  const double a = cert.a, b = cert.b, tol = opt.tolerance.eq_abs;
  if (!std::isfinite(X.support().hi)) fail(ErrorKind::unbounded_support, "the upper bound needs X on a bounded [a, b]");
  if (X.support().lo < a - tol || X.support().hi > b + tol)
    fail(ErrorKind::support_violation, "X is not supported in [" + detail::fmt_num(a) + ", " + detail::fmt_num(b) + "]");
  BoundReport r;
  r.kind = "jensen-upper-I";
  r.direction = BoundDirection::upper;
  r.p = cert.p;
  r.a = a;
  r.b = b;
  const auto mom = shifted_moment(X, a, cert.p + 1, MomentSide::above, opt.tolerance);
  const double m = detail::int_pow(mom.norm / (b - a), cert.p + 1);
  r.moment_error = mom.error_estimate;
  const double fa = f(a), fb = f(b);
  r.value = (1.0 - m) * fa + m * fb;
  const double m1 = (mean(X) - a) / (b - a);
  r.classical_kind = "classical-secant-upper";
  r.classical = (1.0 - m1) * fa + m1 * fb;
  r.gap_to_classical = r.classical - r.value;
  r.inputs_digest = detail::inputs_digest(r.kind, f, cert, X);
  detail::fill_oracle(r, f, X, opt);
  return r;
}

/// f(b - ||b - X||_{p+1}) for f in D(p, a, b) and X on [a, b].
///
/// With the derivative pattern f' >= 0, f'' <= 0, f''' >= 0, ... this value
/// lies between E f(X) and f(E X): E f(X) <= f(b - ||b - X||_{p+1}) <= f(E X).
/// The report is therefore an upper bound that tightens concave Jensen.
inline BoundReport jensen_lower_decreasing(const FunctionSpec& f, const ConvexityCertificate& cert, const RandomVariable& X,
                                           const BoundOptions& opt = {}) {
  detail::require_certificate(cert, ConvexityClass::D, f);
  const double a = cert.a, b = cert.b, tol = opt.tolerance.eq_abs;
  if (X.support().lo < a - tol || X.support().hi > b + tol)
    fail(ErrorKind::support_violation, "X is not supported in [" + detail::fmt_num(a) + ", " + detail::fmt_num(b) + "]");
  BoundReport r;
  r.kind = "jensen-lower-D";
  r.direction = BoundDirection::upper;
  r.p = cert.p;
  r.a = a;
  r.b = b;
  const auto m = shifted_moment(X, b, cert.p + 1, MomentSide::below, opt.tolerance);
  r.moment_error = m.error_estimate;
  r.value = f(b - m.norm);
  r.classical_kind = "classical-jensen-concave";
  r.classical = f(mean(X));
  r.gap_to_classical = r.classical - r.value;
  r.inputs_digest = detail::inputs_digest(r.kind, f, cert, X);
  detail::fill_oracle(r, f, X, opt);
  return r;
}

}  // namespace pconvex
