#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/noise.hpp"
#include "wfl/solver.hpp"

using namespace wfl;

namespace {

SimConfig base(double a, double T, std::size_t steps) {
  SimConfig c;
  c.grid = Grid(40.0, 512);
  c.a = a;
  c.T = T;
  c.steps = steps;
  c.diag_stride = 8;
  c.orbit_window = 1.0;
  return c;
}

FieldPath noise(const SimConfig& c, std::size_t steps, std::uint64_t seed) {
  FieldNoiseSpec s;
  s.H = 0.75;
  s.M = 8;
  return sample_field_noise(s, steps, c.T, seed, c.grid);
}

double rel_l2(const std::vector<double>& a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += (a[j] - b[j]) * (a[j] - b[j]);
    den += b[j] * b[j];
  }
  return std::sqrt(num / den);
}

} // namespace

TEST(Solver, ZeroNoiseKeepsTheTravellingWave) {
  SimConfig c = base(0.3, 5.0, 512);
  c.eps = 0.0;
  const Trajectory tr = solve(c, FieldPath{});
  for (const auto& r : tr.rows) {
    EXPECT_LT(r.d, 1e-6) << "t = " << r.t;
    EXPECT_NEAR(r.C, tr.c * r.t, 1e-6);
    EXPECT_LT(r.norm_U, 1e-5);
  }
  EXPECT_NEAR(tr.c, std::sqrt(2.0) * (0.3 - 0.5), 1e-15);
}

TEST(Solver, NoProjectionMeansConstantSpeed) {
  SimConfig c = base(0.3, 2.0, 256);
  c.m = 0.0;
  const Trajectory tr = solve(c, noise(c, 256, 3));
  for (std::size_t k = 0; k < tr.C_all.size(); ++k)
    EXPECT_NEAR(tr.C_all[k], tr.c * static_cast<double>(k) * c.dt(), 1e-12);
}

TEST(Solver, PhaseRelaxesToTheInitialShift) {
  SimConfig c = base(0.5, 20.0, 400);
  c.eps = 0.0;
  c.initial_shift = 0.5;
  const Trajectory tr = solve(c, FieldPath{});
  for (std::size_t k = 1; k < tr.C_all.size(); ++k) EXPECT_GE(tr.C_all[k], tr.C_all[k - 1] - 1e-14);
  EXPECT_NEAR(tr.C_all.back(), 0.5, 1e-2);

  SimConfig fine = c;
  fine.steps = 4000;
  const Trajectory ref = solve(fine, FieldPath{});
  for (std::size_t k = 0; k < tr.C_all.size(); k += 40) EXPECT_NEAR(tr.C_all[k], ref.C_all[10 * k], 1e-4);
}

TEST(Solver, OddPerturbationDecays) {
  SimConfig c = base(0.5, 8.0, 256);
  c.eps = 0.0;
  c.initial_perturbation.resize(c.grid.n);
  for (std::size_t j = 0; j < c.grid.n; ++j) {
    const double x = c.grid.x(j);
    c.initial_perturbation[j] = 0.05 * x * std::exp(-0.25 * x * x);
  }
  const Trajectory tr = solve(c, FieldPath{});
  const WaveProfile p = nagumo_front(0.5, 1.0, c.grid);
  const double kappa = spectral_gap(p, OperatorSpec::laplacian(1.0)).kappa_star;
  const double ratio = tr.rows.back().norm_U / tr.rows.front().norm_U;
  EXPECT_LT(ratio, std::exp(-0.5 * kappa * c.T));
  EXPECT_LT(std::abs(tr.C_all.back()), 1e-8);
}

TEST(Solver, IdentityAndOrbitBound) {
  SimConfig c = base(0.5, 1.0, 512);
  c.eps = 0.05;
  const FieldPath N = noise(c, 512, 11);
  const Trajectory tr = solve(c, N);
  EXPECT_LT(tr.identity_defect, 1e-12);
  for (const auto& r : tr.rows) EXPECT_LE(r.d, r.norm_U + 1e-12);
  const RunSummary s = diagnostics(tr, N, c.eta);
  EXPECT_GT(s.sup_U, 0.0);
  EXPECT_GT(s.noise_holder, 0.0);
  EXPECT_GE(s.max_phase_gap, 0.0);
}

TEST(Solver, ZDoesNotDependOnLambda) {
  SimConfig c = base(0.5, 1.0, 1024);
  c.eps = 1e-2;
  const FieldPath N = noise(c, 1024, 5);
  c.lambda = 0.5;
  const Trajectory t1 = solve(c, N);
  c.lambda = 2.0;
  const Trajectory t2 = solve(c, N);
  EXPECT_LT(rel_l2(t1.Z_final, t2.Z_final), 1e-2);
}

TEST(Solver, DecomposeMatchesStreamedZ) {
  SimConfig c = base(0.5, 1.0, 256);
  c.eps = 1e-2;
  c.snapshot_stride = 1;
  const FieldPath N = noise(c, 256, 8);
  const Trajectory tr = solve(c, N);
  const DecompositionResult d = decompose(tr, N, c);
  ASSERT_EQ(d.Z.frames, c.steps + 1);
  EXPECT_LT(rel_l2(tr.Z_final, d.Z.frame(c.steps)), 5e-2);
  EXPECT_LT(rel_l2(tr.y_final, d.y.frame(c.steps)), 2e-1);

  SimConfig no_snap = c;
  no_snap.snapshot_stride = 0;
  EXPECT_THROW(decompose(solve(no_snap, N), N, no_snap), ParameterError);
}

TEST(Solver, TimeStepRefinement) {
  SimConfig c = base(0.5, 1.0, 2048);
  c.eps = 1e-2;
  const FieldPath fine = noise(c, 2048, 21);
  const double sup_fine = diagnostics(solve(c, fine), fine, c.eta).sup_U;
  c.steps = 1024;
  const FieldPath coarse = fine.coarsen(2);
  const double sup_coarse = diagnostics(solve(c, coarse), coarse, c.eta).sup_U;
  EXPECT_LT(std::abs(sup_fine - sup_coarse) / sup_fine, 0.05);
}

TEST(Solver, FrontEscapeIsReported) {
  SimConfig c = base(0.1, 40.0, 400);
  c.eps = 0.0;
  c.m = 0.0;
  EXPECT_THROW(solve(c, FieldPath{}), FrontEscapedError);
}

TEST(Solver, RejectsInvalidConfigurations) {
  SimConfig c = base(0.5, 1.0, 64);
  EXPECT_NO_THROW(c.validate());
  SimConfig bad = c;
  bad.gamma = 0.2;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = c;
  bad.steps = 1;
  bad.T = 10.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = c;
  bad.eta = 1.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = c;
  bad.initial_perturbation.assign(3, 0.0);
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = c;
  bad.a = 1.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  const FieldPath N = noise(c, 32, 1);
  EXPECT_THROW(solve(c, N), ParameterError);
}

TEST(Solver, DefaultLambdaRule) {
  SimConfig c;
  c.eta = 0.6;
  EXPECT_NEAR(c.resolved_lambda(), 1.5, 1e-15);
  c.lambda = 0.25;
  EXPECT_EQ(c.resolved_lambda(), 0.25);
}
