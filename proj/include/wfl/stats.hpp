#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace wfl::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);
double mean(std::span<const double> v);
double stddev(std::span<const double> v);

/// Hill estimate of the tail index from the top `fraction` order statistics.
double hill(std::span<const double> samples, double fraction);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of a statistic.
Interval bootstrap_ci(std::span<const double> samples, const std::function<double(std::span<const double>)>& stat,
                      std::size_t resamples, double level, std::uint64_t seed);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  std::size_t n = 0;
};

LinearFit ols(std::span<const double> x, std::span<const double> y);

} // namespace wfl::stats
