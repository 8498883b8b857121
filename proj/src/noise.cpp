#include "wfl/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wfl/errors.hpp"
#include "wfl/fft.hpp"
#include "wfl/rng.hpp"

namespace wfl {

std::vector<double> ScalarPath::times() const {
  std::vector<double> t(values.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
  return t;
}

void StableSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("stable.alpha must lie in (0, 2]");
  if (!symmetric) throw ParameterError("stable.symmetric: only symmetric laws are supported");
  if (!(scale > 0.0)) throw ParameterError("stable.scale must be positive");
}

std::vector<Mode> default_mode_map(std::size_t M) {
  std::vector<Mode> modes(M);
  for (std::size_t i = 0; i < M; ++i) modes[i] = {i / 2 + 1, i % 2 == 1};
  return modes;
}

double basis_value(const Mode& mode, double x, double L) {
  const double arg = std::numbers::pi * static_cast<double>(mode.k) * x / L;
  return (mode.sine ? std::sin(arg) : std::cos(arg)) / std::sqrt(L);
}

std::vector<double> FieldPath::mode_path(std::size_t i) const {
  std::vector<double> p(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) p[k] = coeff(k, i);
  return p;
}

double FieldPath::l2_norm(std::size_t step) const {
  double s = 0.0;
  for (double c : row(step)) s += c * c;
  return std::sqrt(s);
}

std::vector<double> FieldPath::evaluate(std::size_t step, const Grid& g) const {
  std::vector<double> out(g.n, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    const double c = coeff(step, i);
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < g.n; ++j) out[j] += c * basis_value(mode_map[i], g.x(j), g.L);
  }
  return out;
}

FieldPath FieldPath::prefix(std::size_t k) const {
  if (k < 1 || k > steps) throw ParameterError("FieldPath::prefix: step count out of range");
  FieldPath p = *this;
  p.steps = k;
  p.T = time(k);
  p.coeffs.assign(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>((k + 1) * M));
  return p;
}

FieldPath FieldPath::coarsen(std::size_t factor) const {
  if (factor < 1 || steps % factor != 0) throw ParameterError("FieldPath::coarsen: factor must divide the step count");
  FieldPath p = *this;
  p.steps = steps / factor;
  p.coeffs.resize((p.steps + 1) * M);
  for (std::size_t k = 0; k <= p.steps; ++k)
    for (std::size_t i = 0; i < M; ++i) p.coeffs[k * M + i] = coeff(k * factor, i);
  return p;
}

std::size_t FieldPath::kmax() const {
  std::size_t k = 0;
  for (const auto& m : mode_map) k = std::max(k, m.k);
  return k;
}

FieldPath FieldPath::zeros_like(const FieldPath& other) {
  FieldPath p = other;
  std::fill(p.coeffs.begin(), p.coeffs.end(), 0.0);
  return p;
}

BasisTable::BasisTable(const std::vector<Mode>& modes, const Grid& g)
    : M_(modes.size()), n_(g.n), table_(modes.size() * g.n) {
  for (std::size_t i = 0; i < M_; ++i)
    for (std::size_t j = 0; j < n_; ++j) table_[i * n_ + j] = basis_value(modes[i], g.x(j), g.L);
}

void BasisTable::evaluate(std::span<const double> coeffs, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < M_; ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;
    const double* e = table_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) out[j] += c * e[j];
  }
}

namespace {

double fgn_autocov(std::size_t k, double H) {
  const double kk = static_cast<double>(k);
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(std::abs(kk - 1.0), h2));
}

double cms_symmetric(double alpha, RandomStream& rs) {
  const double theta = std::numbers::pi * (rs.uniform() - 0.5);
  const double W = rs.exponential();
  if (alpha == 1.0) return std::tan(theta);
  const double a = std::sin(alpha * theta) / std::pow(std::cos(theta), 1.0 / alpha);
  const double b = std::pow(std::cos((1.0 - alpha) * theta) / W, (1.0 - alpha) / alpha);
  return a * b;
}

} // namespace

ScalarPath sample_fbm(double H, std::size_t n, double T, std::uint64_t seed) {
  if (!(H > 0.0 && H < 1.0)) throw ParameterError("fbm.H must lie in (0, 1)");
  if (n < 2 || !fft::is_power_of_two(n)) throw ParameterError("fbm.n must be a power of two >= 2");
  if (!(T > 0.0)) throw ParameterError("fbm.T must be positive");

  const std::size_t m = 2 * n;
  std::vector<double> c(m);
  for (std::size_t j = 0; j <= n; ++j) c[j] = fgn_autocov(j, H);
  for (std::size_t j = n + 1; j < m; ++j) c[j] = c[m - j];
  const std::vector<double> spec = fft::forward(c);

  // Eigenvalues of the symmetric circulant are the real half-complex parts.
  std::vector<double> lam(m / 2 + 1);
  double lam_max = 0.0;
  for (std::size_t k = 0; k <= m / 2; ++k) {
    lam[k] = spec[k];
    lam_max = std::max(lam_max, std::abs(lam[k]));
  }
  for (double& l : lam) {
    if (l < 0.0) {
      if (l < -1e-10 * lam_max) throw InternalError("fbm: circulant embedding is not positive definite");
      l = 0.0;
    }
  }

  RandomStream rs(seed);
  std::vector<double> hc(m, 0.0);
  hc[0] = std::sqrt(lam[0]) * rs.normal();
  hc[m / 2] = std::sqrt(lam[m / 2]) * rs.normal();
  for (std::size_t k = 1; k < m / 2; ++k) {
    const double s = std::sqrt(0.5 * lam[k]);
    hc[k] = s * rs.normal();
    hc[m - k] = s * rs.normal();
  }
  std::vector<double> x(m);
  fft::hc2r(hc, x);

  ScalarPath p;
  p.T = T;
  p.hurst = H;
  p.meta = {"fbm", seed};
  p.values.assign(n + 1, 0.0);
  const double scale = std::pow(T / static_cast<double>(n), H) / std::sqrt(static_cast<double>(m));
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += scale * x[j];
    p.values[j + 1] = acc;
  }
  return p;
}

std::vector<double> sample_stable_increments(const StableSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  RandomStream rs(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = spec.scale * cms_symmetric(spec.alpha, rs);
  return out;
}

ScalarPath sample_lfsm(double H, const StableSpec& spec, std::size_t n, double T, std::size_t burn,
                       std::uint64_t seed) {
  spec.validate();
  if (!(H < 1.0)) throw ParameterError("lfsm.H must be < 1");
  if (!(H > 1.0 / spec.alpha))
    throw ParameterError("lfsm.H must exceed 1/alpha for the moving-average kernel to be integrable");
  if (n < 1) throw ParameterError("lfsm.n must be >= 1");
  if (!(T > 0.0)) throw ParameterError("lfsm.T must be positive");
  if (burn == 0) burn = 4 * n;
  if (burn < n) throw ParameterError("lfsm.burn must be >= n");

  const double h = T / static_cast<double>(n);
  const double d = H - 1.0 / spec.alpha;
  const std::size_t len = burn + n; // increments xi_k, k = -burn .. n-1
  std::vector<double> xi = sample_stable_increments(spec, len, seed);
  const double xi_scale = std::pow(h, 1.0 / spec.alpha);
  for (double& v : xi) v *= xi_scale;

  // X_j = sum_k [g(j-k) - g(-k)] xi_k with g(m) = (m h)^d for m >= 1, else 0.
  // As a linear convolution in the shifted index i = k + burn this is
  // conv[j + burn] - conv[burn].
  std::size_t fft_n = 1;
  while (fft_n < 2 * len + 1) fft_n <<= 1;
  std::vector<double> g(fft_n, 0.0), a(fft_n, 0.0);
  for (std::size_t m = 1; m <= len; ++m) g[m] = std::pow(static_cast<double>(m) * h, d);
  std::copy(xi.begin(), xi.end(), a.begin());
  const std::vector<double> G = fft::forward(g);
  const std::vector<double> A = fft::forward(a);
  std::vector<double> P(fft_n);
  P[0] = G[0] * A[0];
  P[fft_n / 2] = G[fft_n / 2] * A[fft_n / 2];
  for (std::size_t k = 1; k < fft_n / 2; ++k) {
    const double gr = G[k], gi = G[fft_n - k], ar = A[k], ai = A[fft_n - k];
    P[k] = gr * ar - gi * ai;
    P[fft_n - k] = gr * ai + gi * ar;
  }
  const std::vector<double> conv = fft::inverse(P);

  ScalarPath p;
  p.T = T;
  p.hurst = H;
  p.meta = {"lfsm", seed};
  p.values.assign(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) p.values[j] = conv[j + burn] - conv[burn];
  return p;
}

std::vector<double> FieldNoiseSpec::lambdas() const {
  if (!weights.empty()) {
    if (weights.size() != M) throw ParameterError("noise.weights must have M entries");
    for (double w : weights)
      if (!(w > 0.0)) throw ParameterError("noise.weights must be positive");
    return weights;
  }
  std::vector<double> l(M);
  for (std::size_t i = 0; i < M; ++i) l[i] = std::pow(static_cast<double>(i + 2), -decay_exponent);
  return l;
}

ScalarPath sample_scalar(const FieldNoiseSpec& spec, std::size_t n, double T, std::uint64_t seed) {
  if (spec.driver == NoiseDriver::fbm) return sample_fbm(spec.H, n, T, seed);
  return sample_lfsm(spec.H, spec.stable, n, T, spec.burn, seed);
}

FieldPath sample_field_noise(const FieldNoiseSpec& spec, std::size_t n, double T, std::uint64_t seed,
                             const Grid& grid) {
  if (spec.M < 1) throw ParameterError("noise.M must be >= 1");
  if (spec.weights.empty() && !(spec.decay_exponent > 1.0)) throw ParameterError("noise.decay_exponent must exceed 1");
  FieldPath fp;
  fp.T = T;
  fp.L = grid.L;
  fp.steps = n;
  fp.M = spec.M;
  fp.lambdas = spec.lambdas();
  fp.mode_map = default_mode_map(spec.M);
  fp.hurst = spec.H;
  fp.meta = {spec.driver == NoiseDriver::fbm ? "field-fbm" : "field-lfsm", seed};
  if (2 * fp.kmax() >= grid.n)
    throw ParameterError("noise.M: " + std::to_string(spec.M) + " modes exceed the grid Nyquist capacity");
  fp.coeffs.assign((n + 1) * spec.M, 0.0);
  for (std::size_t i = 0; i < spec.M; ++i) {
    const ScalarPath p = sample_scalar(spec, n, T, derive_seed(seed, i));
    for (std::size_t k = 0; k <= n; ++k) fp.coeffs[k * spec.M + i] = fp.lambdas[i] * p.values[k];
  }
  return fp;
}

} // namespace wfl
