#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wfl/noise.hpp"
#include "wfl/operator.hpp"

namespace wfl {

// The noise basis functions are eigenfunctions of A, so every convolution of a
// FieldPath against e^{(A - lambda) t} decouples into scalar recursions, one
// per mode, with multiplier mu_k - lambda.

enum class ConvScheme {
  riemann, // left-point Riemann-Stieltjes sum on the path's own grid
  interp,  // exact convolution of the piecewise-linear interpolant, O(n) recursion
  ibp      // integration-by-parts identity, integrated exactly per cell, O(n^2)
};

std::string to_string(ConvScheme s);

struct ConvolutionResult {
  FieldPath path;
  ConvScheme scheme = ConvScheme::riemann;
  double mesh = 0.0;
  double lambda = 0.0;
};

/// Scalar kernels: convolution of `x` (x[0] arbitrary, increments used) against
/// e^{mu (t - s)} on a grid of step h.
std::vector<double> convolve_scalar(std::span<const double> x, double mu, double h, ConvScheme scheme);

ConvolutionResult convolve(const FieldPath& N, const OperatorSpec& op, double lambda, ConvScheme scheme);
ConvolutionResult convolve_riemann(const FieldPath& N, const OperatorSpec& op, double lambda);
ConvolutionResult convolve_ibp(const FieldPath& N, const OperatorSpec& op, double lambda);

/// max_t || N_{A-lambda}(t) - N_A(t) + lambda int_0^t S(t-s) N_{A-lambda}(s) ds ||_{L2},
/// inner integral by the trapezoid rule.
double duhamel_residual(const FieldPath& N, const OperatorSpec& op, double lambda,
                        ConvScheme scheme = ConvScheme::interp);

/// K(x) = Gamma(x) + Gamma(1 + x) + x^{-x}.
double conv_bound_constant(double x);

struct BoundRow {
  double T = 0.0;
  double ratio_undamped = 0.0;
  double ratio_damped = 0.0;
  double K_value = 0.0;
  double holder_norm = 0.0;
};

struct BoundCheck {
  double eta = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double undamped_cap = 2.0;
  std::vector<BoundRow> rows;
  double max_ratio_undamped = 0.0;
  double max_ratio_damped = 0.0;
  bool pass = false;

  std::vector<std::vector<double>> csv_rows() const; // T, ratio_undamped, ratio_damped, K_value
};

/// Ratios of the convolution maxima to their Holder-norm bounds on [0, T] for each T in
/// T_list (prefixes of N). Norms are taken in B_{-gamma}: mode k scaled by |mu_k|^{-gamma}.
BoundCheck maximal_bound_check(const FieldPath& N, const OperatorSpec& op, double eta, double gamma, double lambda,
                               const std::vector<double>& T_list, double undamped_cap = 2.0);

/// Frames of a field-valued time series on a spatial grid.
struct FieldSeries {
  Grid grid;
  double dt = 0.0;         // spacing between stored frames
  std::vector<double> data; // row-major frames x n
  std::size_t frames = 0;

  std::span<const double> frame(std::size_t k) const { return {data.data() + k * grid.n, grid.n}; }
  double l2(std::size_t k) const;
};

/// ETD2RK (Cox-Matthews) stepper for u' = A u + G(t, u), A diagonal in Fourier space.
/// The caller supplies G in physical space.
class EtdStepper {
public:
  EtdStepper(const Grid& g, const OperatorSpec& op, double h, bool second_order = true);

  using Rhs = std::function<void(double t, std::span<const double> u, std::span<double> out)>;
  /// Advances u (physical values) from t to t + h.
  void step(std::vector<double>& u, double t, const Rhs& G);

  double h() const { return h_; }

private:
  Grid grid_;
  double h_;
  bool second_order_;
  std::vector<double> E_, P1_, P2_; // e^{mu h}, h phi1(mu h), h phi2(mu h) per half-complex slot
  std::vector<double> uhat_, G0_, G0hat_, a_, Ga_, Gahat_;
};

double phi1(double z);
double phi2(double z);

/// Time-dependent coefficients for the nonautonomous equation: b(t, x) multiplies,
/// q(t, x) spans the rank-one projector u -> m <u, q> q.
using CoefficientFn = std::function<void(double t, std::span<double> b, std::span<double> q)>;

/// Solves z' = A z + (b - P) z + (b - P + lambda) N_{A-lambda}, z(0) = 0, and returns
/// z + N_{A-lambda} at every `stride`-th step.
FieldSeries convolve_evolution(const FieldPath& N, const Grid& g, const OperatorSpec& op, const CoefficientFn& coeff,
                               double m, double lambda, std::size_t stride = 1);

} // namespace wfl
