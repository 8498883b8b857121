#include "wfl/holder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "wfl/errors.hpp"
#include "wfl/fft.hpp"
#include "wfl/rng.hpp"
#include "wfl/stats.hpp"

namespace wfl {

double k_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("eta must lie in (0, 1)");
  return 4.0 / ((std::pow(2.0, eta) - 1.0) * (std::pow(2.0, 1.0 - eta) - 1.0));
}

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("eta must lie in (0, 1)");
}

std::vector<std::size_t> lags_to_scan(std::size_t n, bool exact, std::size_t window) {
  std::vector<std::size_t> lags;
  if (exact) {
    lags.resize(n);
    for (std::size_t l = 1; l <= n; ++l) lags[l - 1] = l;
    return lags;
  }
  for (std::size_t l = 1; l <= std::min(window, n); ++l) lags.push_back(l);
  for (std::size_t l = std::bit_ceil(window + 1); l <= n; l <<= 1) lags.push_back(l);
  if (lags.back() != n) lags.push_back(n);
  return lags;
}

// Generic lag scan. dist(i, j) returns the norm of x_j - x_i.
template <class Dist>
SeminormResult scan(std::size_t steps, double dt, double eta, const SeminormOptions& opt, Dist&& dist) {
  check_eta(eta);
  if (steps < 1) throw ParameterError("holder_seminorm: path needs at least two points");
  const bool exact = opt.force_exact || steps <= kExactSeminormLimit;
  SeminormResult r;
  r.approximate = !exact;
  for (std::size_t lag : lags_to_scan(steps, exact, opt.window)) {
    double best = 0.0;
    for (std::size_t i = 0; i + lag <= steps; ++i) best = std::max(best, dist(i, i + lag));
    r.value = std::max(r.value, best / std::pow(static_cast<double>(lag) * dt, eta));
  }
  return r;
}

// Physical samples of a band-limited field on Q points with Q > 4 kmax, so the
// trapezoid rule integrates |f|^4 exactly. Row-major (steps+1) x Q.
struct L4Table {
  std::size_t Q = 0;
  double dxq = 0.0;
  std::vector<double> values;
};

L4Table l4_table(const FieldPath& p) {
  L4Table t;
  t.Q = std::bit_ceil(4 * p.kmax() + 2);
  const Grid g(p.L, t.Q);
  t.dxq = g.dx();
  BasisTable basis(p.mode_map, g);
  t.values.resize((p.steps + 1) * t.Q);
  for (std::size_t k = 0; k <= p.steps; ++k)
    basis.evaluate(p.row(k), std::span<double>(t.values.data() + k * t.Q, t.Q));
  return t;
}

double l2_diff(const FieldPath& p, std::size_t i, std::size_t j) {
  const double* a = p.coeffs.data() + i * p.M;
  const double* b = p.coeffs.data() + j * p.M;
  double s = 0.0;
  for (std::size_t m = 0; m < p.M; ++m) s += (b[m] - a[m]) * (b[m] - a[m]);
  return std::sqrt(s);
}

double l4_diff(const L4Table& t, std::size_t i, std::size_t j) {
  const double* a = t.values.data() + i * t.Q;
  const double* b = t.values.data() + j * t.Q;
  double s = 0.0;
  for (std::size_t q = 0; q < t.Q; ++q) {
    const double d = (b[q] - a[q]) * (b[q] - a[q]);
    s += d * d;
  }
  return std::pow(s * t.dxq, 0.25);
}

template <class Dist>
double ciesielski_generic(std::size_t steps, double eta, double end_norm, Dist&& dist2) {
  check_eta(eta);
  if (!fft::is_power_of_two(steps))
    throw ParameterError("ciesielski_norm: number of steps must be a power of two, got " + std::to_string(steps));
  const int levels = std::countr_zero(steps);
  double sup = 0.0;
  for (int j = 1; j <= levels; ++j) {
    const std::size_t stride = steps >> j; // grid steps per 2^{-j}
    double mx = 0.0;
    for (std::size_t k = 1; k <= (std::size_t{1} << (j - 1)); ++k)
      mx = std::max(mx, dist2((2 * k - 2) * stride, (2 * k - 1) * stride, 2 * k * stride));
    sup = std::max(sup, std::pow(2.0, j * eta) * mx);
  }
  return end_norm + sup;
}

} // namespace

SeminormResult holder_seminorm(std::span<const double> v, double dt, double eta, const SeminormOptions& opt) {
  if (v.size() < 2) throw ParameterError("holder_seminorm: path needs at least two points");
  return scan(v.size() - 1, dt, eta, opt, [&](std::size_t i, std::size_t j) { return std::abs(v[j] - v[i]); });
}

double holder_seminorm(const ScalarPath& p, double eta) { return holder_seminorm(p.values, p.dt(), eta).value; }

SeminormResult holder_seminorm_field(const FieldPath& p, double eta, FieldNorm norm,
                                     const SeminormOptions& opt) {
  if (norm == FieldNorm::l2)
    return scan(p.steps, p.dt(), eta, opt, [&](std::size_t i, std::size_t j) { return l2_diff(p, i, j); });
  const L4Table t = l4_table(p);
  if (norm == FieldNorm::l4)
    return scan(p.steps, p.dt(), eta, opt, [&](std::size_t i, std::size_t j) { return l4_diff(t, i, j); });
  return scan(p.steps, p.dt(), eta, opt,
              [&](std::size_t i, std::size_t j) { return std::max(l2_diff(p, i, j), l4_diff(t, i, j)); });
}

double holder_seminorm(const FieldPath& p, double eta, FieldNorm norm) {
  return holder_seminorm_field(p, eta, norm).value;
}

double ciesielski_norm(std::span<const double> v, double eta) {
  if (v.size() < 2) throw ParameterError("ciesielski_norm: path needs at least two points");
  const std::size_t steps = v.size() - 1;
  return ciesielski_generic(steps, eta, std::abs(v[steps]), [&](std::size_t a, std::size_t b, std::size_t c) {
    return std::abs(v[c] - 2.0 * v[b] + v[a]);
  });
}

double ciesielski_norm(const ScalarPath& p, double eta) { return ciesielski_norm(p.values, eta); }

double ciesielski_norm(const FieldPath& p, double eta, FieldNorm norm) {
  // Second differences are again band-limited fields; measure them like increments.
  const std::size_t M = p.M;
  auto second = [&](std::size_t a, std::size_t b, std::size_t c) {
    std::vector<double> r(M);
    for (std::size_t m = 0; m < M; ++m) r[m] = p.coeff(c, m) - 2.0 * p.coeff(b, m) + p.coeff(a, m);
    return r;
  };
  auto measure = [&](const std::vector<double>& coeffs) {
    double l2 = 0.0;
    for (double c : coeffs) l2 += c * c;
    l2 = std::sqrt(l2);
    if (norm == FieldNorm::l2) return l2;
    FieldPath one = p;
    one.steps = 1;
    one.coeffs.assign(2 * M, 0.0);
    std::copy(coeffs.begin(), coeffs.end(), one.coeffs.begin() + static_cast<std::ptrdiff_t>(M));
    const L4Table t = l4_table(one);
    const double l4 = l4_diff(t, 0, 1);
    return norm == FieldNorm::l4 ? l4 : std::max(l2, l4);
  };
  std::vector<double> end(p.row(p.steps).begin(), p.row(p.steps).end());
  return ciesielski_generic(p.steps, eta, measure(end), [&](std::size_t a, std::size_t b, std::size_t c) {
    return measure(second(a, b, c));
  });
}

std::string HolderReport::to_json() const {
  nlohmann::json j{{"eta", eta},
                   {"seminorm_direct", seminorm_direct},
                   {"norm_ciesielski", norm_ciesielski},
                   {"levels_used", levels_used},
                   {"approximate", approximate}};
  return j.dump();
}

HolderReport holder_report(const ScalarPath& p, double eta) {
  HolderReport r;
  r.eta = eta;
  const auto s = holder_seminorm(p.values, p.dt(), eta);
  r.seminorm_direct = s.value;
  r.approximate = s.approximate;
  r.norm_ciesielski = ciesielski_norm(p.values, eta);
  r.levels_used = std::countr_zero(p.steps());
  return r;
}

std::uint64_t scaling_seed(std::uint64_t master, double T, std::size_t trial) {
  return derive_seed(derive_seed(master, std::bit_cast<std::uint64_t>(T)), trial);
}

ScalingReport verify_scaling(const ScalarSampler& sampler, double H, double eta, const std::vector<double>& T_list,
                             std::size_t trials, std::uint64_t master_seed) {
  check_eta(eta);
  if (!(eta < H)) throw ParameterError("verify_scaling: eta must be below H; eta >= H admits no nondegenerate process");
  if (trials < 100) throw ParameterError("verify_scaling: trials must be >= 100");
  ScalingReport rep;
  rep.H = H;
  rep.eta = eta;
  rep.trials = trials;
  std::vector<double> unit(trials);
  for (std::size_t t = 0; t < trials; ++t) unit[t] = holder_seminorm(sampler(1.0, scaling_seed(master_seed, 1.0, t)), eta);
  rep.pass = true;
  for (double T : T_list) {
    ScalingCell c;
    c.T = T;
    c.scale_factor = std::pow(T, H - eta);
    std::vector<double> big(trials), scaled(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      big[t] = holder_seminorm(sampler(T, scaling_seed(master_seed, T, t)), eta);
      scaled[t] = c.scale_factor * unit[t];
    }
    const auto ks = stats::ks_two_sample(big, scaled);
    c.ks_statistic = ks.statistic;
    c.p_value = ks.p_value;
    if (!(c.p_value > 0.01)) rep.pass = false;
    rep.cells.push_back(c);
  }
  return rep;
}

namespace {

struct LightFit {
  double alpha = 0.0;
  double k = 1.0;
  double b0 = 0.0;
  double naive = 0.0;
};

// Fits log(-log S(b)) = alpha log(b - b0) - log k on the upper half of the
// sample, scanning the offset b0 over [0, median).
LightFit fit_light(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> b, ll;
  const std::size_t first = n / 2;
  const std::size_t last = n > 10 ? n - 10 : n;
  for (std::size_t i = first; i < last; ++i) {
    if (i + 1 < n && v[i + 1] == v[i]) continue;
    const double S = (static_cast<double>(n - i) - 0.5) / static_cast<double>(n);
    if (S <= 0.0 || S >= 1.0) continue;
    b.push_back(v[i]);
    ll.push_back(std::log(-std::log(S)));
  }
  if (b.size() < 5) throw DegenerateInputError("estimate_tail: too few distinct tail points");
  LightFit best;
  {
    std::vector<double> lb(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) lb[i] = std::log(b[i]);
    best.naive = stats::ols(lb, ll).slope;
  }
  const double med = v[n / 2];
  double best_rss = INFINITY;
  const int grid = 200;
  std::vector<double> x(b.size());
  for (int g = 0; g < grid; ++g) {
    const double b0 = med * static_cast<double>(g) / grid;
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = std::log(b[i] - b0);
    const auto f = stats::ols(x, ll);
    double rss = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double r = ll[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    if (rss < best_rss) {
      best_rss = rss;
      best.alpha = f.slope;
      best.k = std::exp(-f.intercept);
      best.b0 = b0;
    }
  }
  return best;
}

} // namespace

double TailReport::fitted_survival(double b) const {
  if (regime == TailRegime::heavy) {
    if (b <= threshold) return NAN;
    return tail_fraction * std::pow(b / threshold, -exponent_estimate);
  }
  if (b <= location) return 1.0;
  return std::exp(-std::pow(b - location, exponent_estimate) / scale_k);
}

std::string TailReport::to_json() const {
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& [f, e] : sweep) sw.push_back({{"fraction", f}, {"estimate", e}});
  nlohmann::json j{{"regime", regime == TailRegime::heavy ? "heavy" : "light"},
                   {"exponent_estimate", exponent_estimate},
                   {"ci", {ci_lo, ci_hi}},
                   {"sample_count", sample_count},
                   {"sweep", sw}};
  if (regime == TailRegime::heavy) {
    j["threshold"] = threshold;
    j["tail_fraction"] = tail_fraction;
  } else {
    j["scale_k"] = scale_k;
    j["location"] = location;
    j["naive_slope"] = naive_slope;
  }
  return j.dump();
}

TailReport estimate_tail(std::span<const double> samples, TailRegime regime, const TailOptions& opt) {
  if (samples.size() < 1000) throw ParameterError("estimate_tail: need at least 1000 samples");
  for (double s : samples)
    if (s < 0.0 || !std::isfinite(s)) throw ParameterError("estimate_tail: samples must be finite and nonnegative");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mn == *mx) throw DegenerateInputError("estimate_tail: all samples are equal");

  TailReport r;
  r.regime = regime;
  r.sample_count = samples.size();
  if (regime == TailRegime::heavy) {
    r.exponent_estimate = stats::hill(samples, opt.hill_fraction);
    for (double f : opt.sweep) r.sweep.emplace_back(f, stats::hill(samples, f));
    const std::size_t k = static_cast<std::size_t>(std::floor(opt.hill_fraction * static_cast<double>(samples.size())));
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    r.threshold = v[v.size() - k - 1];
    r.tail_fraction = static_cast<double>(k) / static_cast<double>(v.size());
    const auto ci = stats::bootstrap_ci(
        samples, [&](std::span<const double> s) { return stats::hill(s, opt.hill_fraction); }, opt.bootstrap,
        opt.level, opt.seed);
    r.ci_lo = ci.lo;
    r.ci_hi = ci.hi;
  } else {
    const LightFit f = fit_light(std::vector<double>(samples.begin(), samples.end()));
    r.exponent_estimate = f.alpha;
    r.scale_k = f.k;
    r.location = f.b0;
    r.naive_slope = f.naive;
    const auto ci = stats::bootstrap_ci(
        samples, [&](std::span<const double> s) { return fit_light(std::vector<double>(s.begin(), s.end())).alpha; },
        opt.bootstrap, opt.level, opt.seed);
    r.ci_lo = ci.lo;
    r.ci_hi = ci.hi;
  }
  if (!(r.exponent_estimate > 0.0)) throw DegenerateInputError("estimate_tail: nonpositive exponent estimate");
  // The percentile interval of a biased statistic can miss the point estimate.
  r.ci_lo = std::min(r.ci_lo, r.exponent_estimate);
  r.ci_hi = std::max(r.ci_hi, r.exponent_estimate);
  return r;
}

std::vector<std::vector<double>> survival_table(std::span<const double> samples, const TailReport& rep,
                                                std::size_t max_rows) {
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const std::size_t start = rep.regime == TailRegime::heavy
                                ? n - static_cast<std::size_t>(std::ceil(rep.tail_fraction * static_cast<double>(n))) - 1
                                : n / 2;
  const std::size_t span = n - start;
  const std::size_t stride = std::max<std::size_t>(1, span / std::max<std::size_t>(1, max_rows));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = start; i < n; i += stride) {
    const double S = (static_cast<double>(n - i) - 0.5) / static_cast<double>(n);
    rows.push_back({v[i], S, rep.fitted_survival(v[i])});
  }
  return rows;
}

} // namespace wfl
