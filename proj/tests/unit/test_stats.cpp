#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/rng.hpp"
#include "wfl/stats.hpp"

using namespace wfl;

TEST(Kolmogorov, ReferenceValues) {
  EXPECT_NEAR(stats::kolmogorov_survival(1.0), 0.26999967167735456, 1e-10);
  EXPECT_NEAR(stats::kolmogorov_survival(0.5), 0.9639452436648751, 1e-10);
  EXPECT_NEAR(stats::kolmogorov_survival(2.0), 0.0006709252557796953, 1e-12);
  EXPECT_NEAR(stats::kolmogorov_survival(0.1), 1.0, 1e-12);
}

TEST(Ks, TwoSampleStatistic) {
  const std::vector<double> a{0.1, 0.4, 0.7, 1.3, 2.2, 0.5, 0.9}, b{1.5, 2.5, 0.3, 3.1, 2.8, 1.9};
  EXPECT_NEAR(stats::ks_two_sample(a, b).statistic, 0.6904761904761905, 1e-12);
}

TEST(Ks, UniformSampleAgainstUniformCdf) {
  RandomStream rs(3);
  std::vector<double> x(5000);
  for (double& v : x) v = rs.uniform();
  EXPECT_GT(stats::ks_one_sample(x, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value, 0.01);
  for (double& v : x) v = v * v;
  EXPECT_LT(stats::ks_one_sample(x, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value, 1e-6);
}

TEST(Quantiles, TypeSeven) {
  const std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.5), 3.5);
  EXPECT_NEAR(stats::quantile(v, 0.9), 6.9, 1e-12);
  EXPECT_DOUBLE_EQ(stats::median(v), 3.5);
}

TEST(Hill, ParetoIndex) {
  RandomStream rs(17);
  for (double alpha : {0.8, 1.5, 3.0}) {
    std::vector<double> x(100000);
    for (double& v : x) v = std::pow(rs.uniform(), -1.0 / alpha);
    EXPECT_NEAR(stats::hill(x, 0.05), alpha, 0.06 * alpha) << alpha;
  }
}

TEST(Hill, DegenerateInput) {
  const std::vector<double> x(1000, 2.0);
  EXPECT_THROW(stats::hill(x, 0.05), DegenerateInputError);
}

TEST(Ols, ExactLineAndStandardErrors) {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
  const auto f = stats::ols(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-12);
  // Hand-computed: slope 1.98, intercept 1.04, residual sum of squares 0.396, Sxx = 10.
  const std::vector<double> y2{1.2, 2.6, 5.4, 6.8, 9.0};
  const auto g = stats::ols(x, y2);
  EXPECT_NEAR(g.slope, 1.98, 1e-12);
  EXPECT_NEAR(g.intercept, 1.04, 1e-12);
  EXPECT_NEAR(g.slope_se, std::sqrt(0.396 / 3.0 / 10.0), 1e-12);
}

TEST(Bootstrap, IntervalCoversMean) {
  RandomStream rs(23);
  std::vector<double> x(500);
  for (double& v : x) v = rs.normal();
  const auto ci = stats::bootstrap_ci(x, [](std::span<const double> s) { return stats::mean(s); }, 400, 0.95, 1);
  const double m = stats::mean(x);
  EXPECT_LT(ci.lo, m);
  EXPECT_GT(ci.hi, m);
  EXPECT_NEAR(ci.hi - ci.lo, 2 * 1.96 / std::sqrt(500.0), 0.05);
}
