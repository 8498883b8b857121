#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wfl/config.hpp"
#include "wfl/path_io.hpp"

namespace wfl {

/// One pass/fail decision. `tolerance_key` names the config entry the threshold came from.
struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string target; // human-readable acceptance region
  std::string tolerance_key;
  double tolerance = 0.0;
  std::string detail;
};

struct StudyCell {
  std::string name; // directory below out-dir/{study}/
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json aggregates = nlohmann::json::object();
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct StudyReport {
  std::string kind; // short_time | long_time | tails | bounds | simulate
  nlohmann::json grid = nlohmann::json::object();
  std::vector<StudyCell> cells;
  nlohmann::json fits = nlohmann::json::object();
  nlohmann::json prefactors = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  nlohmann::json exclusions = nlohmann::json::object(); // reason -> count
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp; // the only field that varies between identical runs
  std::vector<std::pair<std::string, io::Wfl1>> blobs; // relative path -> binary payload

  bool passed() const;
  nlohmann::json to_json() const;
  /// out_dir/{kind}/report.json, out_dir/{kind}/summary.csv (per-cell aggregates) and
  /// out_dir/{kind}/{cell}/summary.csv + report.json for every cell.
  void write(const std::filesystem::path& out_dir) const;
};

/// requested > 0 wins, then WFL_THREADS, then the hardware count.
unsigned resolve_threads(unsigned requested);

/// Runs task(i) for i in [0, count) on up to `threads` workers pulling from a shared
/// atomic index. The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

/// Seed of trial `trial` in cell `cell` of a study; distinct studies use distinct salts.
std::uint64_t trial_seed(std::uint64_t master, const std::string& study, std::size_t cell, std::size_t trial);

/// Log-spaced grid of `points` values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);

StudyReport run_short_time_study(const StudyConfig& cfg);
StudyReport run_long_time_study(const StudyConfig& cfg);
StudyReport run_tails_study(const StudyConfig& cfg);
StudyReport run_bounds_study(const StudyConfig& cfg);
/// A single trajectory with its summary CSV; field snapshots every `snapshot_stride`
/// steps when nonzero.
StudyReport run_simulation(const StudyConfig& cfg, std::size_t snapshot_stride = 0);

struct EpsSweepResult {
  std::vector<double> eps;
  std::vector<std::vector<double>> sup_y; // [path][eps]
  std::vector<std::vector<double>> sup_Z; // [path][eps]
  std::vector<double> slopes;             // per-path regression slope of log sup||y|| on log eps
  double median_slope = 0.0;
  double median_slope_se = 0.0;
  double slope_of_medians = 0.0;
  double slope_of_medians_se = 0.0;
  double C_y_hat = 0.0; // median of sup||y||^2 kappa* / (2 sum_{k=3}^{4} eps^k sup||Z||^k)
  double kappa_star = 0.0;
  std::size_t excluded = 0;
};

/// Residual scaling of the decomposition over the bounds.eps_sweep values, each noise
/// path reused across all eps.
EpsSweepResult run_eps_sweep(const StudyConfig& cfg);

} // namespace wfl
