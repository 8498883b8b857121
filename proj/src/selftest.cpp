#include "wfl/selftest.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>

#include "wfl/config.hpp"
#include "wfl/errors.hpp"
#include "wfl/holder.hpp"
#include "wfl/path_io.hpp"
#include "wfl/rng.hpp"
#include "wfl/solver.hpp"
#include "wfl/wave.hpp"
#include "wfl/youngconv.hpp"

namespace wfl {

namespace {

SimConfig small_sim() {
  SimConfig c;
  c.grid = Grid(40.0, 256);
  c.T = 0.5;
  c.steps = 500;
  c.diag_stride = 50;
  c.orbit_window = 1.0;
  return c;
}

FieldPath small_noise(const SimConfig& c, std::uint64_t seed) {
  FieldNoiseSpec ns;
  ns.M = 8;
  return sample_field_noise(ns, 512, c.T, seed, c.grid);
}

std::string num(double v) { return io::fmt(v); }

} // namespace

std::vector<SelfTestResult> run_selftest() {
  std::vector<SelfTestResult> out;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      out.push_back({name, ok, detail});
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };

  check("philox_known_answer", [] {
    const auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    const bool ok = r[0] == 0x6627e8d5u && r[1] == 0xe169c58du && r[2] == 0xbc57ac4cu && r[3] == 0x9b00dbd8u;
    return std::pair{ok, std::string("ctr = 0, key = 0")};
  });

  check("holder_of_identity_path", [] {
    std::vector<double> x(65);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 64.0;
    const double s = holder_seminorm(x, 1.0 / 64.0, 0.5).value;
    return std::pair{std::abs(s - 1.0) < 1e-12, "seminorm " + num(s)};
  });

  check("conv_bound_constant_at_one", [] {
    const double k = conv_bound_constant(1.0);
    return std::pair{std::abs(k - 3.0) < 1e-12, "K(1) = " + num(k)};
  });

  check("duhamel_exact_at_lambda_zero", [] {
    const SimConfig c = small_sim();
    const FieldPath N = small_noise(c, 3);
    const double r = duhamel_residual(N, OperatorSpec::laplacian(1.0), 0.0);
    return std::pair{r <= 1e-12, "residual " + num(r)};
  });

  check("semigroup_at_zero_time", [] {
    const Grid g(40.0, 64);
    std::vector<double> v(g.n);
    for (std::size_t j = 0; j < g.n; ++j) v[j] = std::sin(3.0 * std::numbers::pi * g.x(j) / g.L);
    const Field f(g, v);
    const Field s = semigroup_apply(f, 0.0, 0.0, OperatorSpec::laplacian(1.0));
    double e = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) e = std::max(e, std::abs(s[j] - v[j]));
    return std::pair{e < 1e-13, "max deviation " + num(e)};
  });

  check("front_ode_residual", [] {
    const WaveProfile p = nagumo_front(0.25, 1.0, Grid(40.0, 512));
    const double r = p.ode_residual();
    return std::pair{r < 1e-8, "residual " + num(r)};
  });

  check("orbit_distance_of_front", [] {
    const WaveProfile p = nagumo_front(0.5, 1.0, Grid(40.0, 256));
    const OrbitDistance d = distance_to_orbit(p.v, p);
    return std::pair{d.d < 1e-8 && std::abs(d.phi) < 1e-6, "d = " + num(d.d)};
  });

  check("deterministic_wave_is_exact", [] {
    SimConfig c = small_sim();
    c.a = 0.25;
    c.eps = 0.0;
    const Trajectory tr = solve(c, FieldPath{});
    double md = 0.0, dc = 0.0;
    for (const auto& r : tr.rows) {
      md = std::max(md, r.d);
      dc = std::max(dc, std::abs(r.C - tr.c * r.t));
    }
    return std::pair{md < 1e-6 && dc < 1e-6, "max d " + num(md) + ", max |C - ct| " + num(dc)};
  });

  check("zero_gain_phase_is_ct", [] {
    SimConfig c = small_sim();
    c.a = 0.3;
    c.m = 0.0;
    const FieldPath N = small_noise(c, 5);
    c.steps = N.steps;
    const Trajectory tr = solve(c, N);
    double e = 0.0;
    for (std::size_t k = 0; k < tr.C_all.size(); ++k)
      e = std::max(e, std::abs(tr.C_all[k] - tr.c * static_cast<double>(k) * c.dt()));
    return std::pair{e < 1e-12, "max |C - ct| " + num(e)};
  });

  check("zero_noise_matches_zero_eps", [] {
    SimConfig c = small_sim();
    c.m = 1.0;
    c.initial_shift = 0.5;
    const FieldPath Z = FieldPath::zeros_like(small_noise(c, 1));
    c.steps = Z.steps;
    SimConfig c0 = c;
    c0.eps = 0.0;
    const Trajectory a = solve(c, Z), b = solve(c0, Z);
    double e = 0.0;
    for (std::size_t j = 0; j < a.V_final.size(); ++j) e = std::max(e, std::abs(a.V_final[j] - b.V_final[j]));
    double z = 0.0;
    for (const auto& r : a.rows) z = std::max(z, r.norm_Z);
    return std::pair{e == 0.0 && z == 0.0, "max |dV| " + num(e) + ", sup ||Z|| " + num(z)};
  });

  check("orbit_distance_below_residual", [] {
    SimConfig c = small_sim();
    c.m = 1.0;
    c.eps = 1e-2;
    const FieldPath N = small_noise(c, 9);
    c.steps = N.steps;
    const Trajectory tr = solve(c, N);
    bool ok = true;
    for (const auto& r : tr.rows) ok = ok && r.d <= r.norm_U * (1.0 + 1e-9) + 1e-14;
    return std::pair{ok && tr.identity_defect <= 1e-12, "identity defect " + num(tr.identity_defect)};
  });

  check("wfl1_round_trip", [] {
    const auto file = std::filesystem::temp_directory_path() / "wfl_selftest_roundtrip.wfl1";
    const io::Wfl1 a{2, 3, 1.5, {1, 2, 3, 4, 5, 6}};
    io::write_wfl1(file, a);
    const io::Wfl1 b = io::read_wfl1(file);
    std::filesystem::remove(file);
    const bool ok = b.rows == 2 && b.cols == 3 && b.extent == 1.5 && b.data == a.data;
    return std::pair{ok, std::string("2 x 3")};
  });

  check("config_rejects_unknown_key", [] {
    try {
      parse_config(nlohmann::json::parse(R"({"grid": {"L": 40, "nn": 3}})"));
    } catch (const ParameterError& e) {
      const std::string msg = e.what();
      return std::pair{msg.find("grid.nn") != std::string::npos, msg};
    }
    return std::pair{false, std::string("accepted")};
  });

  return out;
}

} // namespace wfl
