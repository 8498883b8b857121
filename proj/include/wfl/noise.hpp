#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wfl/operator.hpp"

namespace wfl {

struct PathMeta {
  std::string generator;
  std::uint64_t seed = 0;
};

/// Real-valued path on the uniform grid t_k = k T / n, k = 0..n.
struct ScalarPath {
  double T = 1.0;
  std::vector<double> values;
  double hurst = 0.5;
  PathMeta meta;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double dt() const { return T / static_cast<double>(steps()); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt(); }
  std::vector<double> times() const;
};

/// Symmetric alpha-stable law, characteristic function exp(-|scale t|^alpha).
struct StableSpec {
  double alpha = 2.0;
  bool symmetric = true;
  double scale = 1.0;

  void validate() const;
};

/// Spatial basis function e_i = cos(omega_k x)/sqrt(L) or sin(omega_k x)/sqrt(L).
struct Mode {
  std::size_t k = 1;
  bool sine = false;
};

/// Lowest M nonconstant modes: cos k=1, sin k=1, cos k=2, ...
std::vector<Mode> default_mode_map(std::size_t M);

double basis_value(const Mode& mode, double x, double L);

/// Field-valued path sum_i coeff_i(t) e_i. coeffs is row-major (steps+1) x M and
/// already carries the weights: coeff_i(t) = lambda_i X_i(t).
struct FieldPath {
  double T = 1.0;
  double L = 1.0; // half-length of the spatial domain the basis lives on
  std::size_t steps = 0;
  std::size_t M = 0;
  std::vector<double> coeffs;
  std::vector<double> lambdas;
  std::vector<Mode> mode_map;
  double hurst = 0.5;
  PathMeta meta;

  double dt() const { return T / static_cast<double>(steps); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt(); }
  double coeff(std::size_t step, std::size_t i) const { return coeffs[step * M + i]; }
  std::span<const double> row(std::size_t step) const { return {coeffs.data() + step * M, M}; }
  /// Coefficient path of mode i (length steps+1).
  std::vector<double> mode_path(std::size_t i) const;
  /// L2 norm of the field at a time step (the basis is orthonormal).
  double l2_norm(std::size_t step) const;
  /// Physical values on a grid.
  std::vector<double> evaluate(std::size_t step, const Grid& g) const;
  /// Path restricted to the first `steps` steps.
  FieldPath prefix(std::size_t steps) const;
  /// Every `factor`-th time point.
  FieldPath coarsen(std::size_t factor) const;
  /// Largest wavenumber used.
  std::size_t kmax() const;

  static FieldPath zeros_like(const FieldPath& other);
};

/// Precomputed basis table (M rows of n grid values) for repeated evaluation.
class BasisTable {
public:
  BasisTable(const std::vector<Mode>& modes, const Grid& g);
  void evaluate(std::span<const double> coeffs, std::span<double> out) const;
  std::size_t modes() const { return M_; }

private:
  std::size_t M_ = 0;
  std::size_t n_ = 0;
  std::vector<double> table_;
};

/// Exact fBm on n+1 grid points via Davies-Harte circulant embedding.
ScalarPath sample_fbm(double H, std::size_t n, double T, std::uint64_t seed);

/// n iid symmetric alpha-stable variates (Chambers-Mallows-Stuck).
std::vector<double> sample_stable_increments(const StableSpec& spec, std::size_t n, std::uint64_t seed);

/// Linear fractional stable motion by a Riemann sum of the moving-average kernel
/// (t-s)_+^d - (-s)_+^d, d = H - 1/alpha, over [-burn dt, T]. burn = 0 selects 4n.
ScalarPath sample_lfsm(double H, const StableSpec& spec, std::size_t n, double T, std::size_t burn,
                       std::uint64_t seed);

enum class NoiseDriver { fbm, lfsm };

struct FieldNoiseSpec {
  NoiseDriver driver = NoiseDriver::fbm;
  double H = 0.75;
  StableSpec stable;
  std::size_t M = 16;
  double decay_exponent = 2.0; // lambda_i = (1 + i)^{-decay_exponent}
  std::size_t burn = 0;        // LFSM history length, 0 selects 4n
  std::vector<double> weights; // explicit lambda_i; overrides the decay rule when nonempty

  std::vector<double> lambdas() const;
};

FieldPath sample_field_noise(const FieldNoiseSpec& spec, std::size_t n, double T, std::uint64_t seed,
                             const Grid& grid);

/// Independent scalar path for mode i of a field (same rule sample_field_noise uses).
ScalarPath sample_scalar(const FieldNoiseSpec& spec, std::size_t n, double T, std::uint64_t seed);

} // namespace wfl
