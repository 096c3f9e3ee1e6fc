#pragma once

// Log-likelihood minorants for models with finite latent variables, and an EM
// run on a Bernoulli mixture that logs them.
//
// For datum i with joint likelihoods p(x_i, z) and responsibilities q_i(z),
// X_i takes the value p(x_i, z) / q_i(z) with probability q_i(z), so that
// ln E X_i is the datum's log-likelihood. The classical bound is E ln X_i;
// the tight one evaluates ln(x) - x/b_i at b_i - ||b_i - X_i||_2.

#include "pconvex/distributions.hpp"

namespace pconvex {

struct LikelihoodDatum {
  std::vector<double> joint;           ///< p(x_i, z | theta) over latent values z
  std::vector<double> responsibility;  ///< q_i(z), positive, summing to 1
};

struct LikelihoodInstance {
  std::vector<LikelihoodDatum> data;

  /// Throws on invalid rows; returns warnings for numerically dominated bounds.
  std::vector<std::string> validate() const {
    if (data.empty()) fail(ErrorKind::input, "likelihood instance needs at least one datum");
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& d = data[i];
      const std::string at = "datum " + std::to_string(i) + ": ";
      if (d.joint.empty() || d.joint.size() != d.responsibility.size())
        fail(ErrorKind::input, at + "joint and responsibility rows must be nonempty and equally long");
      CompensatedSum s;
      double b = 0.0, ex = 0.0;
      for (std::size_t z = 0; z < d.joint.size(); ++z) {
        if (!(d.joint[z] > 0.0) || !std::isfinite(d.joint[z])) fail(ErrorKind::degenerate, at + "likelihood values must be > 0");
        if (!(d.responsibility[z] > 0.0)) fail(ErrorKind::input, at + "responsibilities must be > 0");
        s.add(d.responsibility[z]);
        b = std::max(b, d.joint[z] / d.responsibility[z]);
        ex += d.joint[z];
      }
      if (std::abs(s.value() - 1.0) > 1e-12) fail(ErrorKind::input, at + "responsibilities must sum to 1");
      if (b / ex > 1e6) warnings.push_back(at + "b/E X exceeds 1e6; the tight bound is numerically dominated");
    }
    return warnings;
  }
};

/// X_i = p(x_i, z) / q_i(z) with probability q_i(z).
inline RandomVariable latent_ratio(const LikelihoodDatum& d) {
  Discrete x;
  for (std::size_t z = 0; z < d.joint.size(); ++z) {
    x.atoms.push_back(d.joint[z] / d.responsibility[z]);
    x.probs.push_back(d.responsibility[z]);
  }
  return RandomVariable(std::move(x));
}

inline double loglik_exact(const LikelihoodInstance& inst) {
  inst.validate();
  CompensatedSum s;
  for (const auto& d : inst.data) {
    CompensatedSum row;
    for (double v : d.joint) row.add(v);
    s.add(std::log(row.value()));
  }
  return s.value();
}

inline double elbo_classical(const LikelihoodInstance& inst) {
  inst.validate();
  CompensatedSum s;
  for (const auto& d : inst.data)
    for (std::size_t z = 0; z < d.joint.size(); ++z)
      s.add(d.responsibility[z] * std::log(d.joint[z] / d.responsibility[z]));
  return s.value();
}

struct ElboOptions {
  /// Norm order p+1 in ||b - X||_{p+1}. Only p = 1 is backed by a certificate
  /// of ln(x) - x/b; larger p needs `experimental_higher_order`.
  int p = 1;
  bool experimental_higher_order = false;
};

inline double elbo_tight(const LikelihoodInstance& inst, const ElboOptions& opt = {}) {
  inst.validate();
  if (opt.p < 1) fail(ErrorKind::order, "elbo order must be >= 1");
  if (opt.p > 1 && !opt.experimental_higher_order)
    fail(ErrorKind::order, "orders above 1 are experimental and disabled by default");
  CompensatedSum s;
  for (const auto& d : inst.data) {
    const RandomVariable X = latent_ratio(d);
    const double b = X.support().hi;
    const double n = shifted_moment(X, b, opt.p + 1, MomentSide::below).norm;
    const double t = b - n;
    s.add(std::log(t) - (t - mean(X)) / b);
  }
  return s.value();
}

// ---------------------------------------------------------------------------
// EM on a K-component multivariate Bernoulli mixture

struct BernoulliMixture {
  std::vector<double> weights;             ///< pi_k
  std::vector<std::vector<double>> means;  ///< mu_{k,d}

  std::size_t components() const { return weights.size(); }
  std::size_t dims() const { return means.empty() ? 0 : means[0].size(); }

  /// p(x, z = k | theta).
  double joint(const std::vector<int>& x, std::size_t k) const {
    double v = weights[k];
    for (std::size_t d = 0; d < x.size(); ++d) v *= x[d] ? means[k][d] : 1.0 - means[k][d];
    return v;
  }
};

using BinaryData = std::vector<std::vector<int>>;

inline BinaryData sample_bernoulli_mixture(const BernoulliMixture& m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BinaryData out;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = detail::uniform01(rng);
    std::size_t k = 0;
    double acc = m.weights[0];
    while (u >= acc && k + 1 < m.components()) acc += m.weights[++k];
    std::vector<int> x(m.dims());
    for (std::size_t d = 0; d < m.dims(); ++d) x[d] = detail::uniform01(rng) < m.means[k][d] ? 1 : 0;
    out.push_back(std::move(x));
  }
  return out;
}

/// The 60-point, 6-dimensional demonstration data set.
inline BernoulliMixture demo_mixture() {
  return {{0.4, 0.6}, {{0.9, 0.8, 0.85, 0.1, 0.2, 0.15}, {0.1, 0.2, 0.15, 0.9, 0.8, 0.85}}};
}

struct EmRow {
  int iter = 0;
  double loglik = 0.0;
  double elbo_classical = 0.0;
  double elbo_tight = 0.0;
};

struct EmTrace {
  std::vector<EmRow> rows;
  BernoulliMixture initial;
  BernoulliMixture final_model;
  std::optional<int> converged_at;  ///< first iteration whose loglik gain was below 1e-10
};

inline LikelihoodInstance likelihood_instance(const BernoulliMixture& m, const BinaryData& data,
                                              const std::vector<std::vector<double>>& q) {
  LikelihoodInstance inst;
  for (std::size_t i = 0; i < data.size(); ++i) {
    LikelihoodDatum d;
    for (std::size_t k = 0; k < m.components(); ++k) d.joint.push_back(m.joint(data[i], k));
    d.responsibility = q[i];
    inst.data.push_back(std::move(d));
  }
  return inst;
}

/// Textbook EM with exact posteriors and the closed-form M-step. Row t is
/// evaluated at theta_t with the responsibilities of the previous E-step
/// (uniform at t = 0), where X_i is not a point mass.
inline EmTrace em_demo(const BinaryData& data, int iters, std::uint64_t seed, std::size_t K = 2) {
  if (data.empty()) fail(ErrorKind::input, "em_demo needs data");
  if (iters < 1) fail(ErrorKind::input, "em_demo needs iters >= 1");
  const std::size_t D = data[0].size();
  for (const auto& x : data)
    if (x.size() != D) fail(ErrorKind::input, "data vectors must have equal length");
  std::mt19937_64 rng(seed);
  BernoulliMixture m;
  m.weights.assign(K, 1.0 / K);
  m.means.assign(K, std::vector<double>(D));
  for (auto& row : m.means)
    for (auto& v : row) v = 0.25 + 0.5 * detail::uniform01(rng);

  EmTrace trace;
  trace.initial = m;
  std::vector<std::vector<double>> q(data.size(), std::vector<double>(K, 1.0 / K));
  for (int t = 0; t < iters; ++t) {
    const auto inst = likelihood_instance(m, data, q);
    EmRow row{t, loglik_exact(inst), elbo_classical(inst), elbo_tight(inst)};
    if (!trace.rows.empty() && !trace.converged_at && row.loglik - trace.rows.back().loglik < 1e-10) trace.converged_at = t;
    trace.rows.push_back(row);
    // E-step
    for (std::size_t i = 0; i < data.size(); ++i) {
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) total += (q[i][k] = m.joint(data[i], k));
      for (auto& v : q[i]) v /= total;
    }
    // M-step
    for (std::size_t k = 0; k < K; ++k) {
      double nk = 0.0;
      std::vector<double> s(D, 0.0);
      for (std::size_t i = 0; i < data.size(); ++i) {
        nk += q[i][k];
        for (std::size_t d = 0; d < D; ++d) s[d] += q[i][k] * data[i][d];
      }
      m.weights[k] = nk / data.size();
      for (std::size_t d = 0; d < D; ++d) m.means[k][d] = s[d] / nk;
    }
  }
  trace.final_model = m;
  return trace;
}

}  // namespace pconvex
