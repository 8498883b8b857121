// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number, e.g. `acceptance 1 10`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wfl/config.hpp"
#include "wfl/harness.hpp"
#include "wfl/holder.hpp"
#include "wfl/noise.hpp"
#include "wfl/solver.hpp"
#include "wfl/wave.hpp"
#include "wfl/youngconv.hpp"

using namespace wfl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FieldPath fbm_field(double H, std::size_t steps, double T, std::uint64_t seed, std::size_t M = 16) {
  FieldNoiseSpec s;
  s.driver = NoiseDriver::fbm;
  s.H = H;
  s.M = M;
  return sample_field_noise(s, steps, T, seed, Grid(40.0, 1024));
}

// max over time and modes of |a - b|, relative to max |b|.
double max_rel(const FieldPath& a, const FieldPath& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    num = std::max(num, std::abs(a.coeffs[i] - b.coeffs[i]));
    den = std::max(den, std::abs(b.coeffs[i]));
  }
  return num / den;
}

Outcome deterministic_wave() {
  SimConfig c;
  c.grid = Grid(40.0, 1024);
  c.a = 0.25;
  c.eps = 0.0;
  c.T = 10.0;
  c.steps = 10000;
  c.decompose = false;
  c.diag_stride = 1;
  c.orbit_window = 1.0;
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory tr = solve(c, FieldPath{});
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& r : tr.rows) worst = std::max(worst, r.d);
  return {worst < 1e-5 && secs < 10.0,
          "max_t d = " + num(worst) + " (< 1e-5), runtime " + num(secs) + " s (< 10 s), rows " +
              std::to_string(tr.rows.size())};
}

Outcome ibp_identity() {
  const FieldPath fine = fbm_field(0.7, 1u << 14, 1.0, 2024);
  const auto op = OperatorSpec::laplacian(1.0);
  std::vector<double> err;
  for (std::size_t f : {4u, 2u, 1u}) {
    const FieldPath N = fine.coarsen(f);
    err.push_back(max_rel(convolve_riemann(N, op, 0.0).path, convolve_ibp(N, op, 0.0).path));
  }
  const bool pass = err[0] < 1e-2 && err[1] < err[0] && err[2] < err[1];
  return {pass, "relative error at n_t = 2^12, 2^13, 2^14: " + num(err[0]) + ", " + num(err[1]) + ", " + num(err[2])};
}

Outcome duhamel_identity() {
  const FieldPath N = fbm_field(0.7, 1u << 12, 1.0, 77);
  const auto op = OperatorSpec::laplacian(1.0);
  const double r0 = duhamel_residual(N, op, 0.0);
  const double r05 = duhamel_residual(N, op, 0.5);
  const double r2 = duhamel_residual(N, op, 2.0);
  return {r0 <= 1e-12 && r05 < 1e-3 && r2 < 1e-3,
          "residual at lambda = 0, 0.5, 2: " + num(r0) + ", " + num(r05) + ", " + num(r2)};
}

Outcome conv_bound() {
  const auto op = OperatorSpec::laplacian(1.0);
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t p = 0; p < 100; ++p) {
    const FieldPath N = fbm_field(0.75, 1024, 1.0, 5000 + p);
    const BoundCheck b = maximal_bound_check(N, op, 0.6, 0.0, 1.0, {0.25, 0.5, 1.0});
    worst = std::max(worst, b.max_ratio_damped);
    if (b.max_ratio_damped <= 1.0) ++ok;
  }
  return {ok == 100, std::to_string(ok) + "/100 paths with damped ratio <= 1, worst ratio " + num(worst) +
                         ", K(0.6) = " + num(conv_bound_constant(0.6))};
}

Outcome scaling_identity() {
  const double H = 0.75, eta = 0.6;
  const ScalarSampler sampler = [H](double T, std::uint64_t seed) { return sample_fbm(H, 1024, T, seed); };
  const ScalingReport r = verify_scaling(sampler, H, eta, {2.0, 4.0}, 1000, 31337);
  std::string d;
  for (const auto& c : r.cells) d += "T = " + num(c.T) + ": KS p = " + num(c.p_value) + "; ";
  return {r.pass, d + "threshold p > 0.01"};
}

StudyConfig base_study() {
  StudyConfig c = default_config();
  c.threads = resolve_threads(0);
  return c;
}

Outcome residual_scaling() {
  const StudyConfig c = base_study();
  const auto t0 = std::chrono::steady_clock::now();
  const EpsSweepResult r = run_eps_sweep(c);
  const double secs = seconds_since(t0);
  const bool pass = r.median_slope >= c.bounds.sweep_lo && r.median_slope <= c.bounds.sweep_hi && secs < 600.0;
  return {pass, "median slope " + num(r.median_slope) + " +- " + num(r.median_slope_se) + " over " +
                    std::to_string(r.slopes.size() - r.excluded) + " paths (window [" + num(c.bounds.sweep_lo) + ", " +
                    num(c.bounds.sweep_hi) + "]), slope of medians " + num(r.slope_of_medians) + ", runtime " +
                    num(secs) + " s on " + std::to_string(c.threads) + " thread(s)"};
}

Outcome short_time_exponent() {
  bool pass = true;
  std::string d;
  for (double H : {0.5, 0.75}) {
    StudyConfig c = base_study();
    c.sim.noise.H = H;
    c.sim.eta = H - 0.15;
    c.trials = 100;
    c.short_time.points = 8;
    const StudyReport r = run_short_time_study(c);
    const Verdict& v = r.verdicts.at(0);
    pass = pass && v.pass;
    d += "H = " + num(H) + ": slope " + num(v.value) + " (" + (v.pass ? "ok" : "off") + "); ";
  }
  return {pass, d + "tolerance +- 0.1"};
}

Outcome long_time_bounded() {
  StudyConfig c = base_study();
  c.sim.a = 0.5;
  c.sim.noise.H = 0.75;
  c.sim.eta = 0.5;
  c.eta_from_rule = false;
  c.trials = 100;
  c.long_time.delta_sweep = false;
  const StudyReport r = run_long_time_study(c);
  const auto& first = r.cells.front().aggregates;
  const auto& last = r.cells.back().aggregates;
  const double ratio = last["quantile_sup_d"].get<double>() / first["quantile_sup_d"].get<double>();
  const Verdict& v = r.verdicts.at(0);
  return {ratio <= c.long_time.growth_tol,
          "q90 sup d at T = " + num(r.cells.back().params["T"].get<double>()) + " over T = 1: " + num(ratio) +
              " (<= 1.1); largest ratio over the whole T grid " + num(v.value)};
}

Outcome tail_exponent() {
  StudyConfig c = base_study();
  c.sim.noise.driver = NoiseDriver::lfsm;
  c.sim.noise.H = 0.8;
  c.sim.noise.stable.alpha = 1.5;
  c.sim.noise.M = 8;
  c.sim.eta = 0.25;
  c.eta_from_rule = false;
  c.tails.paths = 10000;
  const StudyReport r = run_tails_study(c);
  const Verdict& v = r.verdicts.at(0);
  return {v.pass && v.name == "tail_exponent_heavy",
          "alpha_hat = " + num(v.value) + " (target 1.5 +- 0.3), CI [" +
              num(r.fits["tail_exponent"]["ci_lo"].get<double>()) + ", " +
              num(r.fits["tail_exponent"]["ci_hi"].get<double>()) + "]"};
}

Outcome spectral() {
  const WaveProfile p = nagumo_front(0.5, 1.0, Grid(40.0, 1024));
  const SpectralGapReport r = spectral_gap(p, OperatorSpec::laplacian(1.0));
  double top = -INFINITY;
  for (double e : r.projected_eigenvalues) top = std::max(top, e);
  const bool pass = r.kernel_defect < 1e-6 && r.eigenvalues.at(1) < -0.05 && r.kappa_star > 0.0 &&
                    top <= -r.kappa_star + 1e-12 && std::abs(r.m - 2.0 * r.C_star) < 1e-12;
  return {pass, "kernel defect " + num(r.kernel_defect) + ", second eigenvalue " + num(r.eigenvalues.at(1)) +
                    ", kappa* = " + num(r.kappa_star) + " at m = " + num(r.m) + " = 2 C*"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  StudyConfig c = base_study();
  c.trials = 100;
  c.short_time.points = 3;
  c.short_time.steps = 256;
  c.sim.grid = Grid(40.0, 256);
  const fs::path root = fs::temp_directory_path() / "wfl_acceptance_determinism";
  fs::remove_all(root);
  c.threads = 1;
  run_short_time_study(c).write(root / "a");
  c.threads = resolve_threads(0) > 1 ? resolve_threads(0) : 2;
  run_short_time_study(c).write(root / "b");
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    if (fs::exists(other) && slurp(e.path()) == slurp(other)) ++same;
  }
  fs::remove_all(root);
  return {files > 0 && same == files, std::to_string(same) + "/" + std::to_string(files) + " CSV files byte-identical"};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"deterministic wave", deterministic_wave}, {"integration by parts", ibp_identity},
      {"damped Duhamel identity", duhamel_identity}, {"convolution bound", conv_bound},
      {"scaling identity", scaling_identity},       {"residual scaling", residual_scaling},
      {"short-time exponent", short_time_exponent}, {"long-time boundedness", long_time_bounded},
      {"tail exponent", tail_exponent},             {"spectral gap", spectral},
      {"determinism", determinism}};
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << " [" << num(seconds_since(t0)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
