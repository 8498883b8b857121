#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfl/holder.hpp"
#include "wfl/solver.hpp"

namespace wfl {

struct ShortTimeConfig {
  double T_min = 0.05;
  double T_max = 1.0;
  std::size_t points = 8;
  std::size_t steps = 1024;
  double slope_tol = 0.1;
};

struct LongTimeConfig {
  double T_min = 1.0;
  double T_max = 64.0;
  std::size_t points = 4;
  std::size_t steps = 1024;
  double eps0 = 1e-3;      // eps(T) = eps0 T^{-(H - eta)}
  double quantile = 0.9;
  double growth_tol = 1.1; // quantile(T) <= growth_tol * quantile(T_min)
  bool delta_sweep = true; // second sweep with eps(T) multiplied by delta = T^{-delta_exponent}
  double delta_exponent = -1.0; // < 0: half of eta_X - eta - margin
  double margin = 0.05;
};

struct TailsConfig {
  std::size_t paths = 1000;
  std::size_t steps = 256;
  std::size_t grid_n = 64;
  FieldNorm norm = FieldNorm::u;
  double hill_fraction = 0.02;
  std::size_t bootstrap = 200;
  double heavy_tol = 0.2;  // |alpha_hat - alpha| <= heavy_tol * alpha
  double light_lo = 1.6;
  double light_hi = 2.4;
};

struct BoundsConfig {
  std::size_t calibration = 50;
  std::size_t validation = 50;
  double T = 1.0;
  std::size_t steps = 1024;
  double inflation = 1.5;
  double z_star = 0.05; // regime gate on eps sup ||Z||
  std::vector<double> eps_sweep{1e-3, 2e-3, 4e-3, 8e-3};
  std::size_t sweep_paths = 20;
  std::size_t sweep_steps = 1024;
  double sweep_lo = 1.35;
  double sweep_hi = 1.65;
};

/// Everything a study or a single simulation reads. `sim` carries the grid, the wave,
/// the noise and the solver settings; its T and steps are used by `simulate`.
struct StudyConfig {
  SimConfig sim;
  bool eta_from_rule = true; // eta picked by the default rule for the configured driver
  std::size_t trials = 100;
  unsigned threads = 0;
  ShortTimeConfig short_time;
  LongTimeConfig long_time;
  TailsConfig tails;
  BoundsConfig bounds;

  /// Holder ceiling of the configured driver: H for fBm, H - 1/alpha for LFSM.
  double eta_ceiling() const;
  nlohmann::json to_json() const;
  /// FNV-1a of the resolved configuration, as 16 hex digits.
  std::string hash() const;
};

/// Defaults with eta from the driver rule (H - 0.15 for fBm, H - 1/alpha - 0.1 for LFSM).
StudyConfig default_config();

/// Unknown keys and ill-typed values raise ParameterError naming the field.
StudyConfig parse_config(const nlohmann::json& j);
StudyConfig load_config(const std::filesystem::path& file);

const char* code_version();

} // namespace wfl
