#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace wfl {

/// Periodic grid on [-L, L) with n points, x_j = -L + j dx.
struct Grid {
  double L = 40.0;
  std::size_t n = 1024;

  Grid() = default;
  Grid(double half_length, std::size_t points);

  double dx() const { return 2.0 * L / static_cast<double>(n); }
  double x(std::size_t j) const { return -L + static_cast<double>(j) * dx(); }
  std::vector<double> points() const;
  /// Angular wavenumber of Fourier index k: pi k / L.
  double omega(std::size_t k) const;
};

enum class OperatorKind { laplacian, fractional, zero };

/// Spectral description of A on the periodic grid: multiplier mu_k per |k|.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::laplacian;
  double nu = 1.0;
  double s = 1.0; // fractional order, used only by OperatorKind::fractional

  static OperatorSpec laplacian(double nu = 1.0);
  static OperatorSpec fractional(double s, double nu = 1.0);
  static OperatorSpec zero();

  double multiplier(double omega) const;
  double multiplier(std::size_t k, const Grid& g) const { return multiplier(g.omega(k)); }
  /// mu for each half-complex slot, length n.
  std::vector<double> hc_multipliers(const Grid& g) const;
};

/// Real grid function with lazily cached half-complex spectrum.
class Field {
public:
  Field() = default;
  Field(Grid g, std::vector<double> values);
  static Field zeros(const Grid& g);
  static Field from_spectral(const Grid& g, std::vector<double> hc);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  /// Mutable access drops the cached spectrum.
  std::vector<double>& mutable_values();
  const std::vector<double>& spectral() const;

  double operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }

private:
  Grid grid_;
  std::vector<double> values_;
  mutable std::optional<std::vector<double>> hc_;
};

Field apply_A(const Field& f, const OperatorSpec& op);

/// e^{(A - lambda) t} f.
Field semigroup_apply(const Field& f, double t, double lambda, const OperatorSpec& op);

/// (-A)^gamma f. Constant mode passes for gamma >= 0; must vanish for gamma < 0.
Field frac_power(const Field& f, double gamma, const OperatorSpec& op);

/// f(x - phi) via spectral phase shift. Only meaningful for periodic data.
Field spectral_shift(const Field& f, double phi);

/// Spectral derivative d/dx.
Field spectral_derivative(const Field& f);

double inner(const Field& f, const Field& g);
double inner(std::span<const double> f, std::span<const double> g, double dx);
double lp_norm(std::span<const double> f, double p, double dx);
double l2_norm(const Field& f);

struct Norms {
  double l2 = 0.0;
  std::map<int, double> lp; // p = 3 .. r+1
  double b_half = 0.0;      // sqrt(||f||^2 + ||(-A)^{1/2} f_0||^2), f_0 mean-zero part
};

Norms norms(const Field& f, const OperatorSpec& op, int r = 3);

} // namespace wfl
