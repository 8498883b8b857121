#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/noise.hpp"
#include "wfl/rng.hpp"
#include "wfl/stats.hpp"

using namespace wfl;

namespace {

double fbm_cov(double s, double t, double H) {
  return 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

} // namespace

TEST(Fbm, StartsAtZeroAndIsDeterministic) {
  const ScalarPath a = sample_fbm(0.7, 256, 2.0, 17), b = sample_fbm(0.7, 256, 2.0, 17);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.front(), 0.0);
  EXPECT_EQ(a.steps(), 256u);
  EXPECT_THROW(sample_fbm(0.7, 100, 1.0, 1), ParameterError);
  EXPECT_THROW(sample_fbm(1.2, 64, 1.0, 1), ParameterError);
}

class FbmCovariance : public ::testing::TestWithParam<double> {};

TEST_P(FbmCovariance, MatchesClosedForm) {
  const double H = GetParam();
  const std::size_t n = 32, paths = 4000;
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{8, 8}, {8, 24}, {16, 32}, {32, 32}, {4, 28}};
  std::vector<double> acc(pairs.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const ScalarPath x = sample_fbm(H, n, 1.0, derive_seed(99, p));
    for (std::size_t i = 0; i < pairs.size(); ++i) acc[i] += x.values[pairs[i].first] * x.values[pairs[i].second];
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double s = pairs[i].first / 32.0, t = pairs[i].second / 32.0;
    const double c = fbm_cov(s, t, H);
    // sd of a product of two unit-scale normals is at most sqrt(2) c_max
    const double tol = 5.0 * std::sqrt(2.0 / paths) * std::max(std::pow(s, 2 * H), std::pow(t, 2 * H));
    EXPECT_NEAR(acc[i] / paths, c, tol) << "s=" << s << " t=" << t;
  }
}

INSTANTIATE_TEST_SUITE_P(Hurst, FbmCovariance, ::testing::Values(0.3, 0.5, 0.75));

TEST(Fbm, IncrementsAreStationaryGaussian) {
  // B(1) - B(1/2) ~ N(0, 2^{-2H})
  const double H = 0.7;
  std::vector<double> z;
  for (std::size_t p = 0; p < 3000; ++p) {
    const ScalarPath x = sample_fbm(H, 16, 1.0, derive_seed(5, p));
    z.push_back((x.values[16] - x.values[8]) / std::pow(0.5, H));
  }
  const auto ks = stats::ks_one_sample(z, [](double t) { return stats::normal_cdf(t); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Stable, AlphaTwoIsGaussianWithVarianceTwo) {
  StableSpec s;
  s.alpha = 2.0;
  const auto x = sample_stable_increments(s, 20000, 3);
  const auto ks = stats::ks_one_sample(x, [](double t) { return stats::normal_cdf(t, 0.0, std::sqrt(2.0)); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Stable, AlphaOneIsCauchy) {
  StableSpec s;
  s.alpha = 1.0;
  s.scale = 2.0;
  const auto x = sample_stable_increments(s, 20000, 4);
  const auto ks = stats::ks_one_sample(x, [](double t) { return 0.5 + std::atan(t / 2.0) / std::numbers::pi; });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Stable, HillRecoversAlpha) {
  StableSpec s;
  s.alpha = 1.5;
  auto x = sample_stable_increments(s, 200000, 8);
  for (double& v : x) v = std::abs(v);
  EXPECT_NEAR(stats::hill(x, 0.01), 1.5, 0.15);
}

TEST(Stable, RejectsBadAlpha) {
  StableSpec s;
  s.alpha = 2.5;
  EXPECT_THROW(sample_stable_increments(s, 10, 1), ParameterError);
}

TEST(Lfsm, ZeroMemoryExponentIsLevyMotion) {
  // d = H - 1/alpha -> 0: X(1) tends to a stable variate with unit scale. d = 0 itself is excluded.
  StableSpec s;
  s.alpha = 1.5;
  EXPECT_THROW(sample_lfsm(1.0 / 1.5, s, 64, 1.0, 64, 1), ParameterError);
  std::vector<double> a;
  for (std::size_t p = 0; p < 2000; ++p)
    a.push_back(sample_lfsm(1.0 / 1.5 + 1e-9, s, 64, 1.0, 64, derive_seed(21, p)).values.back());
  const auto b = sample_stable_increments(s, 2000, 77);
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.01);
}

TEST(Lfsm, SelfSimilarEndpoint) {
  StableSpec s;
  s.alpha = 1.5;
  const double H = 0.8;
  std::vector<double> a, b;
  for (std::size_t p = 0; p < 1500; ++p) {
    a.push_back(sample_lfsm(H, s, 128, 1.0, 0, derive_seed(31, p)).values.back());
    b.push_back(sample_lfsm(H, s, 128, 4.0, 0, derive_seed(32, p)).values.back() / std::pow(4.0, H));
  }
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.01);
}

TEST(Lfsm, BurnMustCoverPath) {
  StableSpec s;
  s.alpha = 1.5;
  EXPECT_THROW(sample_lfsm(0.8, s, 64, 1.0, 10, 1), ParameterError);
}

TEST(Basis, ModeMapAndOrthonormality) {
  const auto modes = default_mode_map(6);
  ASSERT_EQ(modes.size(), 6u);
  EXPECT_EQ(modes[0].k, 1u);
  EXPECT_FALSE(modes[0].sine);
  EXPECT_EQ(modes[1].k, 1u);
  EXPECT_TRUE(modes[1].sine);
  EXPECT_EQ(modes[5].k, 3u);
  const Grid g(20.0, 128);
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < g.n; ++q) s += basis_value(modes[i], g.x(q), g.L) * basis_value(modes[j], g.x(q), g.L);
      EXPECT_NEAR(s * g.dx(), i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(FieldNoise, WeightsAndEvaluation) {
  FieldNoiseSpec spec;
  spec.M = 4;
  spec.decay_exponent = 2.0;
  const Grid g(20.0, 64);
  const FieldPath N = sample_field_noise(spec, 32, 1.0, 5, g);
  ASSERT_EQ(N.lambdas.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(N.lambdas[i], std::pow(static_cast<double>(i) + 2.0, -2.0), 1e-15);
  EXPECT_DOUBLE_EQ(N.L, 20.0);
  // Mode i uses seed derive_seed(seed, i) and carries lambda_i.
  const ScalarPath x2 = sample_fbm(spec.H, 32, 1.0, derive_seed(5, 2));
  for (std::size_t k = 0; k <= 32; ++k) EXPECT_NEAR(N.coeff(k, 2), N.lambdas[2] * x2.values[k], 1e-15);
  const auto v = N.evaluate(17, g);
  for (std::size_t q = 0; q < g.n; ++q) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += N.coeff(17, i) * basis_value(N.mode_map[i], g.x(q), g.L);
    EXPECT_NEAR(v[q], s, 1e-14);
  }
  double l2 = 0.0;
  for (double y : v) l2 += y * y;
  EXPECT_NEAR(std::sqrt(l2 * g.dx()), N.l2_norm(17), 1e-12);
}

TEST(FieldNoise, ExplicitWeightsOverrideRule) {
  FieldNoiseSpec spec;
  spec.M = 2;
  spec.weights = {1.0, 0.5};
  EXPECT_EQ(spec.lambdas(), (std::vector<double>{1.0, 0.5}));
}

TEST(FieldNoise, NyquistGuard) {
  FieldNoiseSpec spec;
  spec.M = 16;
  EXPECT_THROW(sample_field_noise(spec, 16, 1.0, 1, Grid(20.0, 16)), ParameterError);
}

TEST(FieldNoise, PrefixAndCoarsen) {
  FieldNoiseSpec spec;
  spec.M = 3;
  const FieldPath N = sample_field_noise(spec, 64, 2.0, 9, Grid(20.0, 64));
  const FieldPath P = N.prefix(16);
  EXPECT_EQ(P.steps, 16u);
  EXPECT_DOUBLE_EQ(P.T, 0.5);
  EXPECT_EQ(P.coeff(16, 1), N.coeff(16, 1));
  const FieldPath C = N.coarsen(4);
  EXPECT_EQ(C.steps, 16u);
  EXPECT_EQ(C.coeff(5, 2), N.coeff(20, 2));
  EXPECT_DOUBLE_EQ(C.T, 2.0);
}

TEST(FieldNoise, LfsmDriver) {
  FieldNoiseSpec spec;
  spec.driver = NoiseDriver::lfsm;
  spec.H = 0.8;
  spec.stable.alpha = 1.5;
  spec.M = 2;
  const FieldPath N = sample_field_noise(spec, 32, 1.0, 3, Grid(20.0, 32));
  const ScalarPath x = sample_scalar(spec, 32, 1.0, derive_seed(3, 1));
  for (std::size_t k = 0; k <= 32; ++k) EXPECT_NEAR(N.coeff(k, 1), N.lambdas[1] * x.values[k], 1e-14);
}
