#include "wfl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wfl/errors.hpp"
#include "wfl/rng.hpp"

namespace wfl::stats {

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // Dual series, accurate for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = (2.0 * k - 1.0);
      s += std::exp(-t * t * pi2 / (8.0 * x * x));
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

// Stephens' finite-sample adjustment of the asymptotic distribution.
double ks_p(double D, double ne) {
  const double sq = std::sqrt(ne);
  return kolmogorov_survival((sq + 0.12 + 0.11 / sq) * D);
}

} // namespace

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("ks: empty sample");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double D = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = cdf(v[i]);
    D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return {D, ks_p(D, n)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    D = std::max(D, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {D, ks_p(D, na * nb / (na + nb))};
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ParameterError("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double hill(std::span<const double> samples, double fraction) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (double x : samples)
    if (x > 0.0) v.push_back(x);
  const std::size_t k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(v.size())));
  if (k < 2 || k >= v.size()) throw DegenerateInputError("hill: too few positive samples for the requested fraction");
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() - k - 1), v.end());
  const double threshold = v[v.size() - k - 1];
  if (!(threshold > 0.0)) throw DegenerateInputError("hill: nonpositive threshold");
  double s = 0.0;
  for (std::size_t i = v.size() - k; i < v.size(); ++i) s += std::log(v[i] / threshold);
  if (!(s > 0.0)) throw DegenerateInputError("hill: upper order statistics are all equal");
  return static_cast<double>(k) / s;
}

Interval bootstrap_ci(std::span<const double> samples, const std::function<double(std::span<const double>)>& stat,
                      std::size_t resamples, double level, std::uint64_t seed) {
  RandomStream rs(seed);
  std::vector<double> res;
  res.reserve(resamples);
  std::vector<double> buf(samples.size());
  const std::uint64_t n = samples.size();
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& x : buf) x = samples[rs.next_u64() % n];
    try {
      res.push_back(stat(buf));
    } catch (const DegenerateInputError&) {
    }
  }
  if (res.empty()) throw DegenerateInputError("bootstrap: every resample was degenerate");
  const double a = 0.5 * (1.0 - level);
  return {quantile(res, a), quantile(res, 1.0 - a)};
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("ols: need at least two paired points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInputError("ols: x has no spread");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / (n - 2.0);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

} // namespace wfl::stats
