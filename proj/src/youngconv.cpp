#include "wfl/youngconv.hpp"

#include <cmath>
#include <numbers>

#include "wfl/errors.hpp"
#include "wfl/fft.hpp"
#include "wfl/holder.hpp"

namespace wfl {

std::string to_string(ConvScheme s) {
  switch (s) {
  case ConvScheme::riemann: return "riemann";
  case ConvScheme::interp: return "interp";
  case ConvScheme::ibp: return "ibp";
  }
  return "?";
}

double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 0.1) {
    // sum_{m >= 2} z^{m-2} / m!
    double term = 0.5, s = 0.5;
    for (int m = 3; m <= 14; ++m) {
      term *= z / m;
      s += term;
    }
    return s;
  }
  return (std::expm1(z) - z) / (z * z);
}

namespace {

// (1 - e^{-z}(1 + z)) / z, the weight of the linear part of a cell.
double w1(double z) {
  if (std::abs(z) < 0.1) {
    // sum_{m >= 2} (-1)^m (m - 1) z^{m-1} / m!
    double s = 0.0, fact = 1.0, zp = 1.0;
    for (int m = 2; m <= 12; ++m) {
      fact *= m;
      zp *= z;
      s += ((m % 2) ? -1.0 : 1.0) * (m - 1) * zp / fact;
    }
    return s;
  }
  return (1.0 - std::exp(-z) * (1.0 + z)) / z;
}

std::vector<double> ibp_scalar(std::span<const double> y, double z) {
  const std::size_t n = y.size() - 1;
  std::vector<double> E(n + 1);
  for (std::size_t l = 0; l <= n; ++l) E[l] = std::exp(z * static_cast<double>(l));
  const double w0 = -std::expm1(-z);
  const double wl = w1(z);
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    double a = 0.0, b = 0.0;
    const double yj = y[j];
    for (std::size_t k = 0; k < j; ++k) {
      const double e = E[j - k];
      a += e * (y[k] - yj);
      b += e * (y[k + 1] - y[k]);
    }
    out[j] = E[j] * yj + w0 * a + wl * b;
  }
  return out;
}

double mode_multiplier(const OperatorSpec& op, const Mode& m, double L) {
  return op.multiplier(std::numbers::pi * static_cast<double>(m.k) / L);
}

} // namespace

std::vector<double> convolve_scalar(std::span<const double> x, double mu, double h, ConvScheme scheme) {
  if (x.empty()) return {};
  const std::size_t n = x.size() - 1;
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v -= x[0];
  const double z = mu * h;
  if (scheme == ConvScheme::ibp) return ibp_scalar(y, z);
  std::vector<double> out(n + 1, 0.0);
  const double e = std::exp(z);
  const double p = scheme == ConvScheme::interp ? phi1(z) : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = y[j + 1] - y[j];
    out[j + 1] = scheme == ConvScheme::interp ? e * out[j] + p * d : e * (out[j] + d);
  }
  return out;
}

ConvolutionResult convolve(const FieldPath& N, const OperatorSpec& op, double lambda, ConvScheme scheme) {
  if (lambda < 0.0) throw ParameterError("convolution: lambda must be >= 0");
  ConvolutionResult r;
  r.scheme = scheme;
  r.mesh = N.dt();
  r.lambda = lambda;
  r.path = N;
  r.path.meta.generator = N.meta.generator + "/conv-" + to_string(scheme);
  for (std::size_t i = 0; i < N.M; ++i) {
    const double mu = mode_multiplier(op, N.mode_map[i], N.L) - lambda;
    const auto c = convolve_scalar(N.mode_path(i), mu, N.dt(), scheme);
    for (std::size_t k = 0; k <= N.steps; ++k) r.path.coeffs[k * N.M + i] = c[k];
  }
  return r;
}

ConvolutionResult convolve_riemann(const FieldPath& N, const OperatorSpec& op, double lambda) {
  return convolve(N, op, lambda, ConvScheme::riemann);
}

ConvolutionResult convolve_ibp(const FieldPath& N, const OperatorSpec& op, double lambda) {
  return convolve(N, op, lambda, ConvScheme::ibp);
}

double duhamel_residual(const FieldPath& N, const OperatorSpec& op, double lambda, ConvScheme scheme) {
  if (lambda < 0.0) throw ParameterError("duhamel_residual: lambda must be >= 0");
  const double h = N.dt();
  std::vector<double> sq(N.steps + 1, 0.0);
  for (std::size_t i = 0; i < N.M; ++i) {
    const double mu = mode_multiplier(op, N.mode_map[i], N.L);
    const auto x = N.mode_path(i);
    const auto g = convolve_scalar(x, mu - lambda, h, scheme);
    const auto na = convolve_scalar(x, mu, h, scheme);
    const double e = std::exp(mu * h);
    double J = 0.0;
    for (std::size_t j = 0; j <= N.steps; ++j) {
      if (j > 0) J = e * J + 0.5 * h * (e * g[j - 1] + g[j]);
      const double r = g[j] - na[j] + lambda * J;
      sq[j] += r * r;
    }
  }
  double mx = 0.0;
  for (double s : sq) mx = std::max(mx, std::sqrt(s));
  return mx;
}

double conv_bound_constant(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw ParameterError("K: argument eta - gamma must lie in (0, 1]");
  return std::tgamma(x) + std::tgamma(1.0 + x) + std::pow(x, -x);
}

std::vector<std::vector<double>> BoundCheck::csv_rows() const {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) out.push_back({r.T, r.ratio_undamped, r.ratio_damped, r.K_value});
  return out;
}

BoundCheck maximal_bound_check(const FieldPath& N, const OperatorSpec& op, double eta, double gamma, double lambda,
                               const std::vector<double>& T_list, double undamped_cap) {
  if (!(gamma < eta)) throw ParameterError("maximal_bound_check: gamma must be below eta");
  if (gamma < 0.0) throw ParameterError("maximal_bound_check: gamma must be >= 0");
  if (lambda < 0.0) throw ParameterError("maximal_bound_check: lambda must be >= 0");
  if (gamma > 0.0 && op.kind == OperatorKind::zero)
    throw InjectivityError("maximal_bound_check: gamma > 0 needs an injective operator");
  BoundCheck bc;
  bc.eta = eta;
  bc.gamma = gamma;
  bc.lambda = lambda;
  bc.undamped_cap = undamped_cap;
  const double x = eta - gamma;
  const double K = conv_bound_constant(x);

  FieldPath scaled = N;
  for (std::size_t i = 0; i < N.M; ++i) {
    const double s = gamma > 0.0 ? std::pow(-mode_multiplier(op, N.mode_map[i], N.L), -gamma) : 1.0;
    for (std::size_t k = 0; k <= N.steps; ++k) scaled.coeffs[k * N.M + i] *= s;
  }
  const FieldPath na = convolve(N, op, 0.0, ConvScheme::interp).path;
  const FieldPath nl = lambda > 0.0 ? convolve(N, op, lambda, ConvScheme::interp).path : na;

  for (double T : T_list) {
    const double kf = T / N.dt();
    const auto k = static_cast<std::size_t>(std::llround(kf));
    if (k < 1 || k > N.steps || std::abs(kf - static_cast<double>(k)) > 1e-9 * kf)
      throw ParameterError("maximal_bound_check: T = " + std::to_string(T) + " is not a grid time of the path");
    BoundRow row;
    row.T = T;
    row.K_value = K;
    row.holder_norm = holder_seminorm(scaled.prefix(k), eta);
    double sup_a = 0.0, sup_l = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      sup_a = std::max(sup_a, na.l2_norm(j));
      sup_l = std::max(sup_l, nl.l2_norm(j));
    }
    if (row.holder_norm > 0.0) {
      row.ratio_undamped = sup_a / (std::pow(T, x) * row.holder_norm);
      if (lambda > 0.0) row.ratio_damped = sup_l / (std::pow(lambda, -x) * K * row.holder_norm);
    }
    bc.max_ratio_undamped = std::max(bc.max_ratio_undamped, row.ratio_undamped);
    bc.max_ratio_damped = std::max(bc.max_ratio_damped, row.ratio_damped);
    bc.rows.push_back(row);
  }
  bc.pass = bc.max_ratio_damped <= 1.0 && bc.max_ratio_undamped <= undamped_cap;
  return bc;
}

double FieldSeries::l2(std::size_t k) const { return lp_norm(frame(k), 2.0, grid.dx()); }

EtdStepper::EtdStepper(const Grid& g, const OperatorSpec& op, double h, bool second_order)
    : grid_(g), h_(h), second_order_(second_order) {
  if (!(h > 0.0)) throw ParameterError("time step must be positive");
  const auto mu = op.hc_multipliers(g);
  E_.resize(g.n);
  P1_.resize(g.n);
  P2_.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double z = mu[i] * h;
    E_[i] = std::exp(z);
    P1_[i] = h * phi1(z);
    P2_[i] = h * phi2(z);
  }
  uhat_.resize(g.n);
  G0_.resize(g.n);
  G0hat_.resize(g.n);
  a_.resize(g.n);
  Ga_.resize(g.n);
  Gahat_.resize(g.n);
}

void EtdStepper::step(std::vector<double>& u, double t, const Rhs& G) {
  const std::size_t n = grid_.n;
  const double inv = 1.0 / static_cast<double>(n);
  fft::r2hc(u, uhat_);
  G(t, u, G0_);
  fft::r2hc(G0_, G0hat_);
  for (std::size_t i = 0; i < n; ++i) uhat_[i] = E_[i] * uhat_[i] + P1_[i] * G0hat_[i];
  if (second_order_) {
    fft::hc2r(uhat_, a_);
    for (double& v : a_) v *= inv;
    G(t + h_, a_, Ga_);
    fft::r2hc(Ga_, Gahat_);
    for (std::size_t i = 0; i < n; ++i) uhat_[i] += P2_[i] * (Gahat_[i] - G0hat_[i]);
  }
  fft::hc2r(uhat_, u);
  for (double& v : u) v *= inv;
}

FieldSeries convolve_evolution(const FieldPath& N, const Grid& g, const OperatorSpec& op, const CoefficientFn& coeff,
                               double m, double lambda, std::size_t stride) {
  if (lambda < 0.0) throw ParameterError("convolve_evolution: lambda must be >= 0");
  if (stride < 1) throw ParameterError("convolve_evolution: stride must be >= 1");
  const FieldPath gl = convolve(N, op, lambda, ConvScheme::interp).path;
  const BasisTable basis(gl.mode_map, g);
  const double h = N.dt();
  const double dx = g.dx();
  EtdStepper stepper(g, op, h);

  FieldSeries out;
  out.grid = g;
  out.dt = h * static_cast<double>(stride);
  out.frames = N.steps / stride + 1;
  out.data.assign(out.frames * g.n, 0.0);

  std::vector<double> z(g.n, 0.0);
  std::vector<double> g0(g.n), g1(g.n), b0(g.n), q0(g.n), b1(g.n), q1(g.n);
  basis.evaluate(gl.row(0), g0);
  coeff(0.0, b0, q0);

  auto rhs_at = [&](const std::vector<double>& gv, const std::vector<double>& bv, const std::vector<double>& qv) {
    return [&, lambda, m, dx](double, std::span<const double> u, std::span<double> o) {
      double proj = 0.0;
      if (m != 0.0)
        for (std::size_t j = 0; j < u.size(); ++j) proj += (u[j] + gv[j]) * qv[j];
      proj *= m * dx;
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double s = u[j] + gv[j];
        o[j] = bv[j] * s - proj * qv[j] + lambda * gv[j];
      }
    };
  };

  for (std::size_t j = 0; j < N.steps; ++j) {
    const double t = N.time(j);
    basis.evaluate(gl.row(j + 1), g1);
    coeff(N.time(j + 1), b1, q1);
    auto r0 = rhs_at(g0, b0, q0);
    auto r1 = rhs_at(g1, b1, q1);
    stepper.step(z, t, [&](double tt, std::span<const double> u, std::span<double> o) {
      if (tt == t) r0(tt, u, o);
      else r1(tt, u, o);
    });
    double nrm = 0.0;
    for (double v : z) nrm += v * v;
    nrm = std::sqrt(nrm * dx);
    if (!std::isfinite(nrm) || nrm > 1e6)
      throw StabilityError("convolve_evolution: norm blew up at t = " + std::to_string(t + h) +
                           "; reduce the time step");
    std::swap(g0, g1);
    std::swap(b0, b1);
    std::swap(q0, q1);
    if ((j + 1) % stride == 0) {
      double* f = out.data.data() + ((j + 1) / stride) * g.n;
      for (std::size_t i = 0; i < g.n; ++i) f[i] = z[i] + g0[i];
    }
  }
  return out;
}

} // namespace wfl
