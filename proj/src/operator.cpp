#include "wfl/operator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wfl/errors.hpp"
#include "wfl/fft.hpp"

namespace wfl {

Grid::Grid(double half_length, std::size_t points) : L(half_length), n(points) {
  if (!(L > 0.0)) throw ParameterError("grid.L must be positive");
  if (!fft::is_power_of_two(n) || n < 2)
    throw ParameterError("grid.n must be a power of two >= 2, got " + std::to_string(n));
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(n);
  for (std::size_t j = 0; j < n; ++j) xs[j] = x(j);
  return xs;
}

double Grid::omega(std::size_t k) const { return std::numbers::pi * static_cast<double>(k) / L; }

OperatorSpec OperatorSpec::laplacian(double nu) {
  if (!(nu > 0.0)) throw ParameterError("operator.nu must be positive");
  return {OperatorKind::laplacian, nu, 1.0};
}

OperatorSpec OperatorSpec::fractional(double s, double nu) {
  if (!(nu > 0.0)) throw ParameterError("operator.nu must be positive");
  if (!(s > 0.0 && s <= 1.0)) throw ParameterError("operator.s must lie in (0, 1]");
  return {OperatorKind::fractional, nu, s};
}

OperatorSpec OperatorSpec::zero() { return {OperatorKind::zero, 1.0, 1.0}; }

double OperatorSpec::multiplier(double omega) const {
  switch (kind) {
  case OperatorKind::laplacian: return -nu * omega * omega;
  case OperatorKind::fractional: return omega == 0.0 ? 0.0 : -nu * std::pow(std::abs(omega), 2.0 * s);
  case OperatorKind::zero: return 0.0;
  }
  return 0.0;
}

std::vector<double> OperatorSpec::hc_multipliers(const Grid& g) const {
  std::vector<double> mu(g.n);
  for (std::size_t i = 0; i < g.n; ++i) mu[i] = multiplier(fft::slot_wavenumber(i, g.n), g);
  return mu;
}

Field::Field(Grid g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != grid_.n) throw ParameterError("field length does not match grid");
}

Field Field::zeros(const Grid& g) { return Field(g, std::vector<double>(g.n, 0.0)); }

Field Field::from_spectral(const Grid& g, std::vector<double> hc) {
  Field f(g, fft::inverse(hc));
  f.hc_ = std::move(hc);
  return f;
}

std::vector<double>& Field::mutable_values() {
  hc_.reset();
  return values_;
}

const std::vector<double>& Field::spectral() const {
  if (!hc_) hc_ = fft::forward(values_);
  return *hc_;
}

namespace {

template <class Fn>
Field scale_modes(const Field& f, Fn&& factor) {
  std::vector<double> hc = f.spectral();
  const std::size_t n = hc.size();
  for (std::size_t i = 0; i < n; ++i) hc[i] *= factor(fft::slot_wavenumber(i, n));
  return Field::from_spectral(f.grid(), std::move(hc));
}

} // namespace

Field apply_A(const Field& f, const OperatorSpec& op) {
  const Grid& g = f.grid();
  return scale_modes(f, [&](std::size_t k) { return op.multiplier(k, g); });
}

Field semigroup_apply(const Field& f, double t, double lambda, const OperatorSpec& op) {
  if (t < 0.0) throw ParameterError("semigroup_apply: t must be >= 0");
  if (lambda < 0.0) throw ParameterError("semigroup_apply: lambda must be >= 0");
  const Grid& g = f.grid();
  return scale_modes(f, [&](std::size_t k) { return std::exp((op.multiplier(k, g) - lambda) * t); });
}

Field frac_power(const Field& f, double gamma, const OperatorSpec& op) {
  if (gamma == 0.0) return f;
  const Grid& g = f.grid();
  if (gamma < 0.0) {
    const double c0 = f.spectral()[0];
    double scale = 0.0;
    for (double v : f.values()) scale = std::max(scale, std::abs(v));
    if (std::abs(c0) > 1e-12 * std::max(1.0, scale * static_cast<double>(g.n)))
      throw InjectivityError("frac_power: negative power of a field with nonzero mean");
  }
  if (op.kind == OperatorKind::zero) throw InjectivityError("frac_power: A = 0 has no fractional powers");
  return scale_modes(f, [&](std::size_t k) {
    if (k == 0) return 1.0;
    return std::pow(-op.multiplier(k, g), gamma);
  });
}

Field spectral_shift(const Field& f, double phi) {
  const Grid& g = f.grid();
  std::vector<double> hc = f.spectral();
  const std::size_t n = g.n;
  for (std::size_t k = 1; k < n - k; ++k) {
    const double th = -g.omega(k) * phi;
    const double c = std::cos(th), s = std::sin(th);
    const double re = hc[k], im = hc[n - k];
    hc[k] = re * c - im * s;
    hc[n - k] = re * s + im * c;
  }
  if (n % 2 == 0) hc[n / 2] *= std::cos(g.omega(n / 2) * phi);
  return Field::from_spectral(g, std::move(hc));
}

Field spectral_derivative(const Field& f) {
  const Grid& g = f.grid();
  std::vector<double> hc = f.spectral();
  const std::size_t n = g.n;
  hc[0] = 0.0;
  for (std::size_t k = 1; k < n - k; ++k) {
    const double w = g.omega(k);
    const double re = hc[k], im = hc[n - k];
    hc[k] = -w * im;
    hc[n - k] = w * re;
  }
  if (n % 2 == 0) hc[n / 2] = 0.0;
  return Field::from_spectral(g, std::move(hc));
}

double inner(std::span<const double> f, std::span<const double> g, double dx) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
  return s * dx;
}

double inner(const Field& f, const Field& g) { return inner(f.values(), g.values(), f.grid().dx()); }

double lp_norm(std::span<const double> f, double p, double dx) {
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f) s += v * v;
    return std::sqrt(s * dx);
  }
  for (double v : f) s += std::pow(std::abs(v), p);
  return std::pow(s * dx, 1.0 / p);
}

double l2_norm(const Field& f) { return lp_norm(f.values(), 2.0, f.grid().dx()); }

Norms norms(const Field& f, const OperatorSpec& op, int r) {
  Norms out;
  const double dx = f.grid().dx();
  out.l2 = lp_norm(f.values(), 2.0, dx);
  for (int p = 3; p <= r + 1; ++p) out.lp[p] = lp_norm(f.values(), p, dx);
  double b2 = out.l2 * out.l2;
  if (op.kind != OperatorKind::zero) {
    // Parseval on the half-complex spectrum: ||g||^2 = dx/n * sum_k |G_k|^2,
    // each half-complex slot other than 0 and n/2 standing for two of the G_k.
    const auto& hc = f.spectral();
    const std::size_t n = hc.size();
    const Grid& g = f.grid();
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double w = (i == n / 2) ? 1.0 : 2.0;
      acc += -w * op.multiplier(fft::slot_wavenumber(i, n), g) * hc[i] * hc[i];
    }
    b2 += acc * dx / static_cast<double>(n);
  }
  out.b_half = std::sqrt(b2);
  return out;
}

} // namespace wfl
