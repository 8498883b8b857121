#include "wfl/wave.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

double nagumo_f(double u, double a) { return u * (1.0 - u) * (u - a); }
double nagumo_df(double u, double a) { return -3.0 * u * u + 2.0 * (1.0 + a) * u - a; }
double nagumo_d2f(double u, double a) { return -6.0 * u + 2.0 * (1.0 + a); }
double nagumo_lipschitz(double a) { return (1.0 - a + a * a) / 3.0; }

double WaveProfile::width() const { return std::sqrt(2.0 * nu); }

double WaveProfile::value(double x) const {
  const double z = x / width();
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double WaveProfile::deriv(double x) const {
  const double e = std::exp(-std::abs(x) / width());
  return e / ((1.0 + e) * (1.0 + e) * width());
}

double WaveProfile::second(double x) const {
  const double s = width();
  const double u = value(x);
  return deriv(x) * (1.0 - 2.0 * u) / s;
}

double WaveProfile::ode_residual() const {
  const Field d2 = spectral_derivative(Field(grid, dv));
  std::vector<double> r(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) r[j] = nu * d2[j] + nagumo_f(v[j], a) + c * dv[j];
  return lp_norm(r, 2.0, grid.dx());
}

WaveProfile nagumo_front(double a, double nu, const Grid& grid) {
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("wave.a must lie in (0, 1)");
  if (!(nu > 0.0)) throw ParameterError("wave.nu must be positive");
  WaveProfile p;
  p.a = a;
  p.nu = nu;
  p.grid = grid;
  p.c = p.width() * (a - 0.5);
  p.f0_cubic = -1.0;
  p.f0_quadratic = 1.0 + a;
  p.f0_linear = -a;
  if (p.value(-grid.L) >= 1e-8 || 1.0 - p.value(grid.L) >= 1e-8)
    throw DomainTooSmallError("wave: front tails exceed 1e-8 at x = +-L; enlarge grid.L");
  p.v.resize(grid.n);
  p.dv.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    p.v[j] = p.value(grid.x(j));
    p.dv[j] = p.deriv(grid.x(j));
  }
  return p;
}

namespace {

struct Eig {
  Eigen::VectorXd values; // ascending
  Eigen::VectorXd qcoords; // eigenvector coordinates of v', scaled by sqrt(dx)
  double dx = 0.0;
};

Eigen::MatrixXd assemble(const WaveProfile& p, const OperatorSpec& op) {
  const Grid& g = p.grid;
  const std::size_t n = g.n;
  Eigen::MatrixXd M(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Field col = apply_A(Field(g, e), op);
    for (std::size_t i = 0; i < n; ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    e[j] = 0.0;
  }
  M = 0.5 * (M + M.transpose()).eval();
  for (std::size_t j = 0; j < n; ++j)
    M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += nagumo_df(p.v[j], p.a);
  return M;
}

Eig decompose(const Eigen::MatrixXd& M, const WaveProfile& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw InternalError("spectral_gap: eigensolver failed");
  Eig out;
  out.values = es.eigenvalues();
  out.dx = p.grid.dx();
  const Eigen::Map<const Eigen::VectorXd> q(p.dv.data(), static_cast<Eigen::Index>(p.dv.size()));
  out.qcoords = es.eigenvectors().transpose() * q * std::sqrt(out.dx);
  return out;
}

// Largest root of 1 = rho sum_i v_i^2 / (lambda_i - mu) (rank-one downdate), or of
// sum_i v_i^2 / (lambda_i - mu) = 0 when rho is infinite.
double secular_top(const Eig& e, double m, bool infinite) {
  const Eigen::Index n = e.values.size();
  const double l1 = e.values(n - 1), l2 = e.values(n - 2);
  const double v1 = e.qcoords(n - 1) * e.qcoords(n - 1);
  if (!infinite && m == 0.0) return l1;
  if (v1 < 1e-300 || l1 == l2) return l1;
  auto h = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += e.qcoords(i) * e.qcoords(i) / (e.values(i) - mu);
    return infinite ? s : m * s - 1.0;
  };
  double lo = l2, hi = l1; // h increases from -inf to +inf on (l2, l1)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> top_k_desc(const Eigen::VectorXd& asc, std::size_t k) {
  std::vector<double> out;
  for (Eigen::Index i = asc.size() - 1; i >= 0 && out.size() < k; --i) out.push_back(asc(i));
  return out;
}

} // namespace

std::string SpectralGapReport::to_json() const {
  nlohmann::json j{{"kappa_star", kappa_star},
                   {"kappa_complement", kappa_complement},
                   {"C_star", C_star},
                   {"m", m},
                   {"kernel_defect", kernel_defect},
                   {"dv_norm_sq", dv_norm_sq},
                   {"eigenvalues", eigenvalues},
                   {"projected_eigenvalues", projected_eigenvalues},
                   {"grid", {{"L", L}, {"n", n}}}};
  return j.dump();
}

std::vector<double> projected_top_eigenvalues(const WaveProfile& profile, const OperatorSpec& op,
                                              const std::vector<double>& ms) {
  const Eig e = decompose(assemble(profile, op), profile);
  std::vector<double> out;
  for (double m : ms) out.push_back(secular_top(e, m, false));
  return out;
}

SpectralGapReport spectral_gap(const WaveProfile& profile, const OperatorSpec& op, double m_trial) {
  const Grid& g = profile.grid;
  SpectralGapReport r;
  r.L = g.L;
  r.n = g.n;
  const Eigen::MatrixXd M = assemble(profile, op);
  const Eig e = decompose(M, profile);
  r.eigenvalues = top_k_desc(e.values, 10);

  const Field q(g, profile.dv);
  Field Lq = apply_A(q, op);
  auto& lv = Lq.mutable_values();
  for (std::size_t j = 0; j < g.n; ++j) lv[j] += nagumo_df(profile.v[j], profile.a) * profile.dv[j];
  r.dv_norm_sq = inner(q, q);
  r.kernel_defect = l2_norm(Lq) / std::sqrt(r.dv_norm_sq);

  const double top_inf = secular_top(e, 0.0, true);
  if (!(top_inf < 0.0))
    throw SpectralGapNotFoundError("spectral_gap: the operator has no negative spectral bound off the front direction");
  r.kappa_complement = -top_inf;

  // Smallest m with projected top <= -kappa_complement / 2; the top decreases in m.
  const double target = -0.5 * r.kappa_complement;
  double lo = 0.0, hi = 1.0;
  while (secular_top(e, hi, false) > target) {
    hi *= 2.0;
    if (hi > 1e12) throw SpectralGapNotFoundError("spectral_gap: no projection gain reaches the target gap");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (secular_top(e, mid, false) > target) lo = mid;
    else hi = mid;
  }
  r.C_star = hi;
  r.m = m_trial >= 0.0 ? m_trial : 2.0 * r.C_star;

  // Dense check of the projected operator at the chosen gain.
  const Eigen::Map<const Eigen::VectorXd> qv(profile.dv.data(), static_cast<Eigen::Index>(g.n));
  const Eigen::MatrixXd P = M - (r.m * e.dx) * qv * qv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(P, Eigen::EigenvaluesOnly);
  if (ps.info() != Eigen::Success) throw InternalError("spectral_gap: eigensolver failed");
  r.projected_eigenvalues = top_k_desc(ps.eigenvalues(), 10);
  r.kappa_star = -r.projected_eigenvalues.front();
  return r;
}

OrbitDistance distance_to_orbit(std::span<const double> V, const WaveProfile& p, const OrbitSearch& search) {
  const Grid& g = p.grid;
  if (V.size() != g.n) throw ParameterError("distance_to_orbit: field does not match the profile grid");
  const double dx = g.dx();
  auto J = [&](double phi) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double r = V[j] - p.value(g.x(j) - phi);
      s += r * r;
    }
    return s * dx;
  };
  double lo = -0.5 * g.L, hi = 0.5 * g.L;
  if (search.windowed) {
    lo = std::max(lo, search.center - search.half_width);
    hi = std::min(hi, search.center + search.half_width);
    if (!(hi > lo)) {
      lo = search.center - dx;
      hi = search.center + dx;
    }
  }
  // A windowed search starts next to a known minimizer, where a coarser scan suffices.
  const double step = search.windowed ? std::max(dx, 0.125 * p.width()) : dx;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::size_t best_k = 0;
  double best = INFINITY;
  for (std::size_t k = 0; k <= count; ++k) {
    const double val = J(lo + static_cast<double>(k) * step);
    if (val < best) {
      best = val;
      best_k = k;
    }
  }
  if (search.windowed && (best_k == 0 || best_k == count)) return distance_to_orbit(V, p, OrbitSearch{});
  OrbitDistance out;
  const double centre = lo + static_cast<double>(best_k) * step;
  out.escaped = best_k == 0 || best_k == count;

  // Newton on g(phi) = <V - v(. - phi), v'(. - phi)>, kept inside the bracketing cells
  // and accepted only while J decreases.
  auto newton = [&](double& phi, double& Jphi) {
    const double w = p.width();
    for (int it = 0; it < 12; ++it) {
      double gs = 0.0, gp = 0.0;
      for (std::size_t j = 0; j < g.n; ++j) {
        const double v = p.value(g.x(j) - phi);
        const double d1 = v * (1.0 - v) / w;
        const double d2 = d1 * (1.0 - 2.0 * v) / w;
        const double r = V[j] - v;
        gs += r * d1;
        gp += d1 * d1 - r * d2;
      }
      if (!(gp > 0.0)) return false;
      const double next = phi - gs / gp;
      if (next < centre - step || next > centre + step) return false;
      if (std::abs(next - phi) < 1e-13 * dx) return true;
      const double Jn = J(next);
      if (!(Jn <= Jphi)) return std::abs(next - phi) < 1e-8 * dx;
      phi = next;
      Jphi = Jn;
    }
    return true;
  };

  double phi = centre;
  double Jphi = best;
  if (!newton(phi, Jphi)) {
    // Golden section on the bracketing cells, then Newton again.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = centre - step, b = centre + step;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = J(c1), f2 = J(c2);
    while (b - a > 0.05 * dx) {
      if (f1 < f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = J(c1);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = J(c2);
      }
    }
    double g_phi = 0.5 * (a + b);
    double g_J = J(g_phi);
    if (g_J < Jphi) {
      phi = g_phi;
      Jphi = g_J;
    }
    newton(phi, Jphi);
  }
  out.phi = phi;
  out.d = std::sqrt(std::max(Jphi, 0.0));
  if (std::abs(phi) > 0.5 * g.L) out.escaped = true;
  return out;
}

void nagumo_forcing(std::span<const double> u, std::span<const double> X, std::span<const double> v, double a,
                    std::span<double> out) {
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = nagumo_f(u[j] + X[j] + v[j], a) - nagumo_f(v[j], a);
}

} // namespace wfl
