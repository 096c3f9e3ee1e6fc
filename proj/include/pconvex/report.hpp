#pragma once

// CSV tables, the gap plot, and the seeded sweep suites behind `pconvex sweep`.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include "pconvex/hermite_hadamard.hpp"
#include "pconvex/jensen.hpp"
#include "pconvex/likelihood.hpp"
#include "pconvex/mgf.hpp"

namespace pconvex {

/// %.17g with the C locale's '.' separator; non-finite values spelled nan, inf, -inf.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_number(const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    fail(ErrorKind::input, "no column named \"" + name + "\"");
  }

  /// Column values as numbers; empty cells read as NaN.
  std::vector<double> numbers(std::size_t col) const {
    std::vector<double> v;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string& s = rows[r][col];
      if (s.empty()) {
        v.push_back(std::nan(""));
        continue;
      }
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size())
        fail(ErrorKind::input, "row " + std::to_string(r + 2) + ", column \"" + header[col] + "\": not a number: " + s);
      v.push_back(x);
    }
    return v;
  }

  /// RFC 4180 with CRLF record separators.
  std::string to_csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(cells[i]);
      }
      out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

/// Parse RFC 4180 text (CRLF or LF). The first record is the header; every
/// record must have as many fields as the header, and the body must be nonempty.
inline Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, was_quoted = false;
  int line = 1;
  std::size_t i = 0;
  auto end_record = [&] {
    rec.push_back(field);
    field.clear();
    was_quoted = false;
    if (!(rec.size() == 1 && rec[0].empty())) records.push_back(rec);
    rec.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty() || was_quoted) fail(ErrorKind::input, "line " + std::to_string(line) + ": stray quote in field");
      quoted = was_quoted = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
      was_quoted = false;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++line;
      ++i;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      if (was_quoted) fail(ErrorKind::input, "line " + std::to_string(line) + ": text after closing quote");
      field += c;
    }
    ++i;
  }
  if (quoted) fail(ErrorKind::input, "line " + std::to_string(line) + ": unterminated quoted field");
  if (!field.empty() || !rec.empty() || was_quoted) end_record();
  if (records.empty()) fail(ErrorKind::input, "CSV is empty");
  Table t;
  t.header = records[0];
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      fail(ErrorKind::input, "record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(records[r]);
  }
  if (t.rows.empty()) fail(ErrorKind::input, "CSV has a header but no rows");
  return t;
}

// ---------------------------------------------------------------------------
// SVG line chart

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

/// Line chart of every column whose name ends in "gap" against the first column.
inline std::string render_gap_plot(const Table& t) {
  if (t.header.empty() || t.rows.empty()) fail(ErrorKind::input, "plot needs a CSV with at least one row");
  const std::vector<double> xs = t.numbers(0);
  std::vector<std::size_t> series;
  for (std::size_t c = 1; c < t.header.size(); ++c)
    if (detail::ends_with(t.header[c], "gap")) series.push_back(c);
  if (series.empty()) fail(ErrorKind::input, "plot needs at least one column whose name ends in \"gap\"");
  std::vector<std::vector<double>> ys;
  for (auto c : series) ys.push_back(t.numbers(c));

  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (double x : xs)
    if (std::isfinite(x)) x0 = std::min(x0, x), x1 = std::max(x1, x);
  for (const auto& s : ys)
    for (double y : s)
      if (std::isfinite(y)) y0 = std::min(y0, y), y1 = std::max(y1, y);
  if (!std::isfinite(x0)) fail(ErrorKind::input, "column \"" + t.header[0] + "\" has no finite values");
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) {
    const double pad = std::max(0.5, std::abs(y0) * 0.1);
    y0 -= pad, y1 += pad;
  }
  y0 = std::min(y0, 0.0);

  constexpr double W = 720, H = 420, L = 80, R = 170, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  using detail::svg_num;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"420\" viewBox=\"0 0 720 420\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"720\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">gap vs " +
       detail::xml_escape(t.header[0]) + "</text>\n";
  s += "<rect x=\"" + svg_num(L) + "\" y=\"" + svg_num(T) + "\" width=\"" + svg_num(pw) + "\" height=\"" + svg_num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s += "<line x1=\"" + svg_num(sx(xv)) + "\" y1=\"" + svg_num(T + ph) + "\" x2=\"" + svg_num(sx(xv)) + "\" y2=\"" +
         svg_num(T + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + svg_num(sx(xv)) + "\" y=\"" + svg_num(T + ph + 18) + "\" text-anchor=\"middle\">" +
         detail::tick_label(xv) + "</text>\n";
    s += "<line x1=\"" + svg_num(L - 5) + "\" y1=\"" + svg_num(sy(yv)) + "\" x2=\"" + svg_num(L + pw) + "\" y2=\"" +
         svg_num(sy(yv)) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + svg_num(L - 8) + "\" y=\"" + svg_num(sy(yv) + 4) + "\" text-anchor=\"end\">" +
         detail::tick_label(yv) + "</text>\n";
  }
  s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(H - 10) + "\" text-anchor=\"middle\">" +
       detail::xml_escape(t.header[0]) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::string color = kColors[k % std::size(kColors)];
    std::string pts;
    for (std::size_t r = 0; r < xs.size(); ++r) {
      if (!std::isfinite(xs[r]) || !std::isfinite(ys[k][r])) continue;
      if (!pts.empty()) pts += ' ';
      pts += svg_num(sx(xs[r])) + "," + svg_num(sy(ys[k][r]));
    }
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    for (std::size_t r = 0; r < xs.size(); ++r) {
      if (!std::isfinite(xs[r]) || !std::isfinite(ys[k][r])) continue;
      s += "<circle cx=\"" + svg_num(sx(xs[r])) + "\" cy=\"" + svg_num(sy(ys[k][r])) + "\" r=\"3\" fill=\"" + color +
           "\"/>\n";
    }
    const double ly = T + 10 + 20.0 * k;
    s += "<line x1=\"" + svg_num(L + pw + 15) + "\" y1=\"" + svg_num(ly) + "\" x2=\"" + svg_num(L + pw + 40) + "\" y2=\"" +
         svg_num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + svg_num(L + pw + 46) + "\" y=\"" + svg_num(ly + 4) + "\">" + detail::xml_escape(t.header[series[k]]) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// Parallel evaluation

/// PCONVEX_THREADS if set to a positive integer, else the hardware concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("PCONVEX_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(i), computed on up to thread_budget() threads. The first
/// exception by index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(thread_budget(), n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep suites

inline constexpr std::uint64_t kDefaultSeed = 42;

struct JensenCase {
  int p = 1;
  json function;
  json distribution;
  double a = 0.0;
  double b = 1.0;
};

/// Seeded (f, X, p) triples with f in I(p, a, b) and X on [a, b].
inline std::vector<JensenCase> jensen_cases(std::uint64_t seed, int n = 200) {
  std::mt19937_64 rng(seed);
  auto u = [&] { return detail::uniform01(rng); };
  std::vector<JensenCase> out;
  for (int i = 0; i < n; ++i) {
    JensenCase c;
    c.p = 1 + i % 3;
    c.a = (rng() % 2) ? 0.5 : 0.0;
    c.b = c.a + 1.0 + std::floor(4 * u()) * 0.5;
    switch (rng() % 4) {
      case 0:
        c.function = {{"family", "shifted-power"}, {"params", {{"q", c.p + 1.0 + 0.5 * (rng() % 4)}, {"a", c.a}}}};
        break;
      case 1:
        c.a = 0.0;
        c.function = {{"family", "exp-taylor-remainder"}, {"params", {{"p", c.p}, {"s", 0.5 + 1.5 * u()}}}};
        break;
      case 2:
        c.a = 0.0;
        c.function = {{"family", "taylor-remainder"},
                      {"params", {{"p", c.p}, {"base", {{"family", "exponential"}, {"params", {{"s", 0.5 + u()}}}}}}}};
        break;
      default:
        c.function = {{"family", "shifted-power"}, {"params", {{"q", c.p + 1.0}, {"a", c.a}}}};
        break;
    }
    const double a = c.a, b = c.b;
    switch (rng() % 4) {
      case 0: {
        const int k = 1 + static_cast<int>(rng() % 6);
        std::vector<double> atoms, probs;
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
          atoms.push_back(a + (b - a) * u());
          probs.push_back(0.05 + u());
          total += probs.back();
        }
        for (auto& q : probs) q /= total;
        CompensatedSum s;
        for (int j = 0; j + 1 < k; ++j) s.add(probs[j]);
        probs.back() = 1.0 - s.value();
        c.distribution = {{"kind", "discrete"}, {"atoms", atoms}, {"probs", probs}};
        break;
      }
      case 1: {
        const double t = 0.05 + 0.9 * u();
        c.distribution = {{"kind", "discrete"}, {"atoms", {a, b}}, {"probs", {t, 1.0 - t}}};
        break;
      }
      case 2:
        c.distribution = {{"kind", "density"},
                          {"family", "beta-like"},
                          {"params", {{"alpha", 1.0 + 3 * u()}, {"beta", 1.0 + 3 * u()}}},
                          {"support", {a, b}}};
        break;
      default:
        c.distribution = {
            {"kind", "density"}, {"family", "fractional-hh"}, {"params", {{"alpha", 0.2 + 3 * u()}}}, {"support", {a, b}}};
        break;
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct JensenCaseResult {
  std::string label;
  BoundReport lower;
  BoundReport upper;
};

inline JensenCaseResult evaluate_jensen_case(const JensenCase& c, const CertifyOptions& co = {}) {
  const FunctionSpec f = make_catalog(c.function);
  const RandomVariable X = random_variable_from_json(c.distribution);
  const auto cert = certify_I(f, c.p, c.a, c.b, co);
  return {f.label(), jensen_lower(f, cert, X), jensen_upper(f, cert, X)};
}

inline Table sweep_jensen(std::uint64_t seed = kDefaultSeed, int n = 200) {
  const auto cases = jensen_cases(seed, n);
  const auto res = parallel_map(cases.size(), [&](std::size_t i) { return evaluate_jensen_case(cases[i]); });
  Table t;
  t.header = {"case", "p", "function", "a", "b", "lower", "oracle", "upper", "oracle_error", "classical_lower",
              "classical_upper", "lower_gap", "upper_gap"};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& r = res[i];
    const double oracle = *r.lower.oracle;
    t.rows.push_back({std::to_string(i), std::to_string(cases[i].p), r.label, csv_number(cases[i].a),
                      csv_number(cases[i].b), csv_number(r.lower.value), csv_number(oracle), csv_number(r.upper.value),
                      csv_number(r.lower.oracle_error), csv_number(r.lower.classical), csv_number(r.upper.classical),
                      csv_number(oracle - r.lower.value), csv_number(r.upper.value - oracle)});
  }
  return t;
}

inline const std::vector<std::string>& hh_columns() {
  static const std::vector<std::string> cols = {"p",     "alpha",           "lower",           "mid",      "upper",
                                                "classical_lower", "classical_upper", "lower_gap", "upper_gap"};
  return cols;
}

inline std::vector<std::string> hh_row(const HHReport& r) {
  return {std::to_string(r.p),        csv_number(r.alpha),           csv_number(r.lower),
          csv_number(r.mid),          csv_number(r.upper),           csv_number(r.classical_lower),
          csv_number(r.classical_upper), csv_number(r.mid - r.lower), csv_number(r.upper - r.mid)};
}

/// f = x^8 on [0, 1] for p = 1..6.
inline Table sweep_hh() {
  const FunctionSpec f = shifted_power(8.0);
  const auto res = parallel_map(6, [&](std::size_t i) {
    const int p = static_cast<int>(i) + 1;
    return hh_bounds(f, certify_I(f, p - 1, 0.0, 1.0), p);
  });
  Table t;
  t.header = hh_columns();
  for (const auto& r : res) t.rows.push_back(hh_row(r));
  return t;
}

/// f = x^8 on [0, 1], p = 3, across fractional orders. alpha comes first so it is the plot axis.
inline Table sweep_hh_fractional() {
  const FunctionSpec f = shifted_power(8.0);
  const std::vector<double> alphas = {0.25, 0.5, 1.0, 1.5, 2.5, 4.0, 8.0};
  const int p = 3;
  const auto cert = certify_I(f, p - 1, 0.0, 1.0);
  const auto res = parallel_map(alphas.size(), [&](std::size_t i) { return fractional_hh_bounds(f, cert, p, alphas[i]); });
  Table t;
  t.header = {"alpha", "p", "gamma", "lower", "mid", "mid_density", "upper", "classical_lower", "classical_upper",
              "lower_gap", "upper_gap"};
  for (const auto& r : res)
    t.rows.push_back({csv_number(r.alpha), std::to_string(r.p), csv_number(r.gamma), csv_number(r.lower),
                      csv_number(r.mid), csv_number(r.mid_density), csv_number(r.upper), csv_number(r.classical_lower),
                      csv_number(r.classical_upper), csv_number(r.mid - r.lower), csv_number(r.upper - r.mid)});
  return t;
}

/// X = {0, 0.5, 1.5, 2; 0.3, 0.3, 0.2, 0.2}, s = 1, p = 1..8.
inline Table sweep_mgf() {
  const RandomVariable X(Discrete{{0.0, 0.5, 1.5, 2.0}, {0.3, 0.3, 0.2, 0.2}});
  const auto res = parallel_map(8, [&](std::size_t i) {
    const int p = static_cast<int>(i) + 1;
    return std::make_pair(mgf_lower(X, 1.0, p), mgf_upper(X, 1.0, p));
  });
  Table t;
  t.header = {"p", "s", "lower", "exact", "upper", "lower_gap", "upper_gap"};
  for (const auto& [lo, hi] : res)
    t.rows.push_back({std::to_string(lo.p), csv_number(lo.s), csv_number(lo.lower), csv_number(lo.exact),
                      csv_number(hi.upper), csv_number(*lo.exact - *lo.lower), csv_number(*hi.upper - *lo.exact)});
  return t;
}

inline Table em_trace_table(const EmTrace& trace) {
  Table t;
  t.header = {"iter", "loglik", "elbo_classical", "elbo_tight", "classical_gap", "tight_gap"};
  for (const auto& r : trace.rows)
    t.rows.push_back({std::to_string(r.iter), csv_number(r.loglik), csv_number(r.elbo_classical), csv_number(r.elbo_tight),
                      csv_number(r.loglik - r.elbo_classical), csv_number(r.loglik - r.elbo_tight)});
  return t;
}

/// EM on 60 draws from the demonstration mixture.
inline Table sweep_elbo(std::uint64_t seed = kDefaultSeed, int iters = 30) {
  const auto data = sample_bernoulli_mixture(demo_mixture(), 60, seed);
  return em_trace_table(em_demo(data, iters, seed));
}

inline const std::vector<std::string>& sweep_suites() {
  static const std::vector<std::string> names = {"jensen", "hh", "hh-fractional", "mgf", "elbo"};
  return names;
}

inline Table run_sweep(const std::string& suite, std::uint64_t seed = kDefaultSeed) {
  if (suite == "jensen") return sweep_jensen(seed);
  if (suite == "hh") return sweep_hh();
  if (suite == "hh-fractional") return sweep_hh_fractional();
  if (suite == "mgf") return sweep_mgf();
  if (suite == "elbo") return sweep_elbo(seed);
  fail(ErrorKind::input, "unknown sweep suite \"" + suite + "\" (jensen, hh, hh-fractional, mgf, elbo, all)");
}

}  // namespace pconvex
