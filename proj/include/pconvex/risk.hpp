#pragma once

// Loss-function comparisons and the risk measure sup over L_p of certainty
// equivalents. "l is p-more risk averse than f" means ||f(X)||_p <= f(c)
// whenever E l(X) <= l(c); it is certified through (p-1, 0, inf)-convexity of
// l o f^{-1} and probed directly with two-point lotteries.

#include "pconvex/jensen.hpp"

namespace pconvex {

/// l^{-1}(E l(X)) for strictly increasing l.
inline double certainty_equivalent(const FunctionSpec& l, const RandomVariable& X, const ToleranceProfile& tol = {}) {
  const auto e = expect(X, l, tol);
  const Interval s = X.support();
  const double lo = l.domain().lo;
  // E l(X) lies in [l(inf X), l(sup X)], which brackets the root
  const double hi = std::isfinite(s.hi) ? s.hi : l.domain().capped_hi();
  const double lo_b = std::max(lo, s.lo);
  if (s.lo == s.hi) return s.lo;
  return invert_monotone(l.as_fn(), e.value, lo_b, hi, tol);
}

struct Lottery {
  std::vector<double> atoms;
  std::vector<double> probs;
};

struct Falsifier {
  Lottery lottery;
  double threshold = 0.0;  ///< c with E l(X) = l(c)
  double lhs = 0.0;        ///< ||f(X)||_p
  double rhs = 0.0;        ///< f(c)
  double margin = 0.0;     ///< (lhs - rhs) / max(1, rhs)
  int trial = 0;
  bool directed = false;
};

struct RiskComparison {
  std::string l_label;
  std::string f_label;
  int p = 1;
  double horizon = 10.0;
  ConvexityCertificate certificate;
  std::optional<Falsifier> falsifier;
  int trials_run = 0;
};

inline json to_json(const Falsifier& f) {
  return {{"atoms", f.lottery.atoms}, {"probs", f.lottery.probs}, {"threshold", f.threshold}, {"norm_f", f.lhs},
          {"f_threshold", f.rhs},     {"margin", f.margin},         {"trial", f.trial},         {"directed", f.directed}};
}

inline json to_json(const RiskComparison& r) {
  json j{{"l", r.l_label}, {"f", r.f_label}, {"p", r.p}, {"horizon", r.horizon}, {"certificate", to_json(r.certificate)}};
  j["falsifier"] = r.falsifier ? to_json(*r.falsifier) : json(nullptr);
  j["trials"] = r.trials_run;
  return j;
}

/// certify_I at order p-1 on l o f^{-1} over [f(0), f(horizon)].
inline RiskComparison certify_p_more_risk_averse(const FunctionSpec& l, const FunctionSpec& f, int p, double horizon = 10.0,
                                                 const CertifyOptions& opt = {}) {
  if (p < 1) fail(ErrorKind::order, "risk comparison needs p >= 1");
  if (!(horizon > 0.0)) fail(ErrorKind::domain, "risk comparison needs horizon > 0");
  RiskComparison r;
  r.l_label = l.label();
  r.f_label = f.label();
  r.p = p;
  r.horizon = horizon;
  const FunctionSpec h = compose_inverse(l, f, horizon);
  r.certificate = certify_I(h, p - 1, h.domain().lo, h.domain().hi, opt);
  return r;
}

struct FalsifyOptions {
  int trials = 10000;
  std::uint64_t seed = 42;
  double horizon = 10.0;
  double rel_tolerance = 1e-9;
  /// Point of the l o f^{-1} domain to search around first, usually the certificate witness.
  std::optional<double> witness_y;
};

namespace detail {

inline std::optional<Falsifier> probe(const FunctionSpec& l, const FunctionSpec& f, int p, double x1, double x2, double t,
                                      double rel_tol) {
  if (!(x1 < x2) || !(t > 0.0 && t < 1.0)) return std::nullopt;
  const RandomVariable X(Discrete{{x1, x2}, {t, 1.0 - t}});
  const double c = certainty_equivalent(l, X);
  const double f1 = f(x1), f2 = f(x2);
  double lhs;
  if (p == 1) {
    lhs = t * f1 + (1 - t) * f2;
  } else {
    const double s = std::max(std::abs(f1), std::abs(f2));
    if (s == 0.0) return std::nullopt;
    lhs = s * std::pow(t * std::pow(std::abs(f1) / s, p) + (1 - t) * std::pow(std::abs(f2) / s, p), 1.0 / p);
  }
  const double rhs = f(c);
  const double margin = (lhs - rhs) / std::max(1.0, std::abs(rhs));
  if (margin <= rel_tol) return std::nullopt;
  Falsifier out;
  out.lottery = {{x1, x2}, {t, 1.0 - t}};
  out.threshold = c;
  out.lhs = lhs;
  out.rhs = rhs;
  out.margin = margin;
  return out;
}

}  // namespace detail

/// Search two-point lotteries for ||f(X)||_p > f(c) with E l(X) = l(c).
/// Directed probes around the witness run first, then `trials` random ones.
inline std::optional<Falsifier> falsify_p_more_risk_averse(const FunctionSpec& l, const FunctionSpec& f, int p,
                                                           const FalsifyOptions& opt = {}, int* trials_run = nullptr) {
  if (p < 1) fail(ErrorKind::order, "risk comparison needs p >= 1");
  const double H = opt.horizon;
  int count = 0;
  if (opt.witness_y) {
    const double xs = invert_monotone(f.as_fn(), std::clamp(*opt.witness_y, f(0.0), f(H)), 0.0, H);
    for (double frac : {1e-3, 1e-2, 0.1, 0.3, 1.0}) {
      const double s = frac * H;
      for (double t : {0.25, 0.5, 0.75}) {
        ++count;
        auto hit = detail::probe(l, f, p, std::max(0.0, xs - s), std::min(H, xs + s), t, opt.rel_tolerance);
        if (hit) {
          hit->trial = count;
          hit->directed = true;
          if (trials_run) *trials_run = count;
          return hit;
        }
      }
    }
  }
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < opt.trials; ++i) {
    double x1 = H * detail::uniform01(rng), x2 = H * detail::uniform01(rng);
    const double t = detail::uniform01(rng);
    if (x1 > x2) std::swap(x1, x2);
    ++count;
    auto hit = detail::probe(l, f, p, x1, x2, t, opt.rel_tolerance);
    if (hit) {
      hit->trial = count;
      if (trials_run) *trials_run = count;
      return hit;
    }
  }
  if (trials_run) *trials_run = count;
  return std::nullopt;
}

/// Certificate plus a falsifier search seeded at the certificate witness.
inline RiskComparison compare_risk_aversion(const FunctionSpec& l, const FunctionSpec& f, int p, double horizon,
                                            FalsifyOptions fo = {}, const CertifyOptions& co = {}) {
  RiskComparison r = certify_p_more_risk_averse(l, f, p, horizon, co);
  fo.horizon = horizon;
  if (r.certificate.witness) fo.witness_y = r.certificate.witness->point;
  r.falsifier = falsify_p_more_risk_averse(l, f, p, fo, &r.trials_run);
  return r;
}

struct RiskCandidate {
  std::string label;
  bool certified = false;
  std::optional<double> certainty_equivalent;
  std::string skipped_reason;
};

struct RiskMeasureReport {
  std::string x_digest;
  int p = 1;
  double closed_form = 0.0;  ///< ||X||_{p+1}
  double sweep_infimum = kInf;
  std::string achiever;
  double horizon = 0.0;
  std::vector<RiskCandidate> candidates;
};

inline json to_json(const RiskMeasureReport& r) {
  json c = json::array();
  for (const auto& k : r.candidates) {
    json e{{"label", k.label}, {"certified", k.certified}};
    e["certainty_equivalent"] = k.certainty_equivalent ? json(*k.certainty_equivalent) : json(nullptr);
    if (!k.skipped_reason.empty()) e["skipped"] = k.skipped_reason;
    c.push_back(e);
  }
  return {{"X", r.x_digest},         {"p", r.p},           {"closed_form", r.closed_form}, {"sweep_infimum", r.sweep_infimum},
          {"achiever", r.achiever}, {"horizon", r.horizon}, {"candidates", c}};
}

/// Loss functions tried by risk_measure, x^{p+1} first.
inline std::vector<FunctionSpec> risk_sweep_family(int p) {
  const double q0 = p + 1.0;
  std::vector<FunctionSpec> fam;
  fam.push_back(shifted_power(q0));
  for (double dq : {0.5, 1.0, 2.0, q0}) fam.push_back(shifted_power(q0 + dq));
  for (double beta : {0.1, 1.0})
    for (double gamma : {1.0, 2.0, 3.0}) fam.push_back(product(shifted_power(q0), affine_precompose(shifted_power(gamma), beta, 1.0)));
  for (double beta : {0.05, 0.5}) fam.push_back(product(shifted_power(q0), exponential(beta)));
  // not in L_p; the certificate must reject it
  fam.push_back(shifted_power(std::max(1.0, q0 - 0.5)));
  return fam;
}

/// ||X||_{p+1} together with a sweep of certainty equivalents over certified members of L_p.
inline RiskMeasureReport risk_measure(const RandomVariable& X, int p, const CertifyOptions& co = {}) {
  if (p < 1) fail(ErrorKind::order, "risk measure needs p >= 1");
  if (X.support().lo < 0.0) fail(ErrorKind::support_violation, "risk measure needs X >= 0");
  RiskMeasureReport r;
  r.p = p;
  r.x_digest = detail::digest(detail::describe(X));
  r.closed_form = shifted_moment(X, 0.0, p + 1).norm;
  const double sup = X.support().hi;
  r.horizon = std::isfinite(sup) ? std::max(10.0 * sup, 10.0) : std::max(10.0, 100.0 * r.closed_form);
  const double tie = 1e-12;
  for (const auto& l : risk_sweep_family(p)) {
    RiskCandidate cand;
    cand.label = l.label();
    const auto cert = certify_Lp(l, p, r.horizon, co);
    cand.certified = cert.pass;
    if (!cert.pass) {
      cand.skipped_reason = "not certified in L_p";
      r.candidates.push_back(cand);
      continue;
    }
    try {
      const double ce = certainty_equivalent(l, X);
      cand.certainty_equivalent = ce;
      if (r.achiever.empty() || ce < r.sweep_infimum * (1.0 - tie)) {
        r.sweep_infimum = ce;
        r.achiever = l.label();
      }
    } catch (const Error& e) {
      cand.skipped_reason = e.what();
    }
    r.candidates.push_back(cand);
  }
  return r;
}

inline RandomVariable scaled(const RandomVariable& X, double lambda) {
  if (!(lambda > 0.0)) fail(ErrorKind::domain, "scale must be > 0");
  if (X.is_discrete()) {
    Discrete d = X.discrete();
    for (auto& x : d.atoms) x *= lambda;
    return RandomVariable(d);
  }
  if (X.is_sample()) {
    Sample s = X.sample();
    for (auto& x : s.values) x *= lambda;
    return RandomVariable(s);
  }
  fail(ErrorKind::input, "scaling is implemented for discrete laws and samples");
}

}  // namespace pconvex
