#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wfl/noise.hpp"
#include "wfl/operator.hpp"
#include "wfl/wave.hpp"
#include "wfl/youngconv.hpp"

namespace wfl {

enum class TimeScheme { etd1, etd2 };

struct SimConfig {
  Grid grid{40.0, 1024};
  double a = 0.5;
  double nu = 1.0;
  FieldNoiseSpec noise;
  double gamma = 0.0;
  double eta = 0.6;       // Holder exponent for diagnostics and the default lambda
  double eps = 1e-3;
  double T = 1.0;
  std::size_t steps = 1024;
  double lambda = -1.0;   // < 0 selects (eta - gamma) / (1 - (eta - gamma))
  double m = -1.0;        // < 0 selects 2 C* from the spectral gap of the front
  TimeScheme scheme = TimeScheme::etd2;
  bool decompose = true;
  std::size_t diag_stride = 1;     // diagnostics every diag_stride steps
  std::size_t snapshot_stride = 0; // 0: no field snapshots
  double orbit_window = 4.0;       // half-width of the phase scan around C(t)
  double initial_shift = 0.0;      // V(0) = v(. - initial_shift) + initial_perturbation
  std::vector<double> initial_perturbation;
  std::uint64_t seed = 1;

  double dt() const { return T / static_cast<double>(steps); }
  double resolved_lambda() const;
  void validate() const;
};

/// Phase-adaptation right-hand side c + m <V - v(. - C), tau_C> with
/// tau_C = d/dC v(. - C) = -v'(. - C), so that C descends ||V - v(. - C)||^2.
class PhaseTracker {
public:
  PhaseTracker(const WaveProfile& profile, double m);
  double rhs(std::span<const double> V, double C) const;
  /// Heun step from (V_n, C) to V_{n+1} over h.
  double step(std::span<const double> V0, std::span<const double> V1, double C, double h) const;

private:
  const WaveProfile& p_;
  double m_;
};

struct DiagRow {
  double t = 0.0;
  double C = 0.0;
  double d = 0.0;        // d(V(t), Gamma)
  double phi_star = 0.0; // minimizing translate
  double norm_U = 0.0;   // ||U~||_{L2}
  double norm_Z = 0.0;   // max(||Z||_{L2}, ||Z||_{L4})
  double norm_Z_l2 = 0.0;
  double norm_y = 0.0;   // ||y||_{L2}
  double norm_NAl = 0.0; // max(||N_{A-lambda}||_{L2}, ||N_{A-lambda}||_{L4})
  double norm_w = 0.0;
};

struct Trajectory {
  std::vector<DiagRow> rows;
  std::vector<double> C_all;   // phase at every step
  std::vector<double> snapshots; // V frames, row-major, at snapshot_stride
  std::size_t snapshot_count = 0;
  std::vector<double> V_final, U_final, Z_final, y_final;
  double identity_defect = 0.0; // max |U~ - eps Z - y|
  double lambda = 0.0;
  double m = 0.0;
  double c = 0.0;
  bool boundary_flag = false;   // front tail reached 1e-8 at the domain edge
  std::size_t steps = 0;
};

Trajectory solve(const SimConfig& cfg, const FieldPath& N);

/// Projection gain 2 C* for a front, cached per (a, nu, L, n).
double default_projection_gain(double a, double nu, const Grid& g);

struct DecompositionResult {
  FieldSeries Z;
  FieldSeries y;
};

/// Recomputes Z and y from a stored trajectory (needs snapshots at every step).
DecompositionResult decompose(const Trajectory& traj, const FieldPath& N, const SimConfig& cfg);

struct RunSummary {
  double sup_d = 0.0;
  double sup_U = 0.0;
  double sup_Z = 0.0;
  double sup_y = 0.0;
  double sup_NAl = 0.0;
  double noise_holder = 0.0;
  double max_phase_gap = 0.0; // max (||U~|| - d) / ||U~|| over rows with ||U~|| > 0
};

RunSummary diagnostics(const Trajectory& traj, const FieldPath& N, double eta);

} // namespace wfl
