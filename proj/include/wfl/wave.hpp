#pragma once

#include <span>
#include <string>
#include <vector>

#include "wfl/operator.hpp"

namespace wfl {

// Bistable reaction f(u) = u (1 - u)(u - a) = -u^3 + (1 + a) u^2 - a u.
double nagumo_f(double u, double a);
double nagumo_df(double u, double a);
double nagumo_d2f(double u, double a);
/// sup_u f'(u) = (1 - a + a^2) / 3, the one-sided Lipschitz constant of f.
double nagumo_lipschitz(double a);

/// Closed-form front v(x) = 1 / (1 + exp(-x / sqrt(2 nu))) with speed
/// c = sqrt(2 nu)(a - 1/2); the moving front is v(x - c t).
struct WaveProfile {
  double a = 0.5;
  double nu = 1.0;
  double c = 0.0;
  Grid grid;
  std::vector<double> v;  // v(x_j)
  std::vector<double> dv; // v'(x_j)
  // Cubic coefficients of f = f0 + f1 with f0 = -u^3 + (1+a) u^2 - a u and f1 = 0.
  double f0_cubic = -1.0, f0_quadratic = 0.0, f0_linear = 0.0;

  double width() const; // sqrt(2 nu)
  double value(double x) const;
  double deriv(double x) const;
  double second(double x) const;
  /// ||nu v'' + f(v) + c v'||_{L2}, with v'' from spectral differentiation of v'.
  double ode_residual() const;
  std::string to_csv_header() const { return "x,v,dv"; }
};

WaveProfile nagumo_front(double a, double nu, const Grid& grid);

struct SpectralGapReport {
  double kappa_star = 0.0;         // -(top eigenvalue of the projected operator at m)
  double kappa_complement = 0.0;   // gap of L_TW on the complement of its kernel direction
  double C_star = 0.0;             // smallest m with projected top <= -kappa_complement / 2
  double m = 0.0;
  double kernel_defect = 0.0;      // ||L_TW v'|| / ||v'||
  double dv_norm_sq = 0.0;         // ||v'||^2
  std::vector<double> eigenvalues;           // top 10 of L_TW, descending
  std::vector<double> projected_eigenvalues; // top 10 of L_TW - m <., v'> v', descending
  double L = 0.0;
  std::size_t n = 0;

  std::string to_json() const;
};

/// Dense symmetric eigen-analysis of L_TW = A + f'(v) on the collocation grid.
/// m_trial < 0 selects m = 2 C*.
SpectralGapReport spectral_gap(const WaveProfile& profile, const OperatorSpec& op, double m_trial = -1.0);

/// Top eigenvalue of L_TW - m <., v'> v' for several m, from one eigendecomposition.
std::vector<double> projected_top_eigenvalues(const WaveProfile& profile, const OperatorSpec& op,
                                              const std::vector<double>& ms);

struct OrbitDistance {
  double d = 0.0;
  double phi = 0.0;
  bool escaped = false; // minimizer on the scan boundary or beyond L/2
};

struct OrbitSearch {
  bool windowed = false;
  double center = 0.0;
  double half_width = 0.0;
};

/// inf_phi ||V - v(. - phi)||_{L2}: scan with step dx, golden section, then Newton
/// on the stationarity condition. Translates are evaluated from the closed form.
OrbitDistance distance_to_orbit(std::span<const double> V, const WaveProfile& profile, const OrbitSearch& search = {});

/// F_X(u) = f(u + X + v) - f(v) pointwise, with v the front values supplied.
void nagumo_forcing(std::span<const double> u, std::span<const double> X, std::span<const double> v, double a,
                    std::span<double> out);

} // namespace wfl
