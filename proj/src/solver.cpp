#include "wfl/solver.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "wfl/errors.hpp"
#include "wfl/holder.hpp"
#include "wfl/youngconv.hpp"

namespace wfl {

double SimConfig::resolved_lambda() const {
  if (lambda >= 0.0) return lambda;
  const double x = eta - gamma;
  return x / (1.0 - x);
}

void SimConfig::validate() const {
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("a must lie in (0, 1)");
  if (!(nu > 0.0)) throw ParameterError("nu must be positive");
  if (!(eps >= 0.0)) throw ParameterError("eps must be >= 0");
  if (!(T > 0.0)) throw ParameterError("T must be positive");
  if (steps < 1) throw ParameterError("steps must be >= 1");
  if (!(eta > gamma && eta < 1.0)) throw ParameterError("eta must lie in (gamma, 1)");
  if (gamma != 0.0) throw ParameterError("gamma: only gamma = 0 is supported by the solver");
  const double fmax = std::max({a, 1.0 - a, nagumo_lipschitz(a)});
  if (!(dt() * fmax < 0.5)) throw ParameterError("steps: dt * max|f'| must stay below 0.5");
  if (diag_stride < 1) throw ParameterError("diag_stride must be >= 1");
  if (!initial_perturbation.empty() && initial_perturbation.size() != grid.n)
    throw ParameterError("initial_perturbation must have grid.n entries");
}

PhaseTracker::PhaseTracker(const WaveProfile& profile, double m) : p_(profile), m_(m) {}

double PhaseTracker::rhs(std::span<const double> V, double C) const {
  if (m_ == 0.0) return p_.c;
  const Grid& g = p_.grid;
  double s = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double x = g.x(j) - C;
    s -= (V[j] - p_.value(x)) * p_.deriv(x);
  }
  return p_.c + m_ * s * g.dx();
}

double PhaseTracker::step(std::span<const double> V0, std::span<const double> V1, double C, double h) const {
  const double k1 = rhs(V0, C);
  const double k2 = rhs(V1, C + h * k1);
  return C + 0.5 * h * (k1 + k2);
}

double default_projection_gain(double a, double nu, const Grid& g) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double, std::size_t>, double> cache;
  const auto key = std::make_tuple(a, nu, g.L, g.n);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const WaveProfile p = nagumo_front(a, nu, g);
  const double m = spectral_gap(p, OperatorSpec::laplacian(nu)).m;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, m);
  return m;
}

namespace {

void front_values(const WaveProfile& p, double shift, std::vector<double>& v, std::vector<double>* dv = nullptr) {
  const Grid& g = p.grid;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double x = g.x(j) - shift;
    v[j] = p.value(x);
    if (dv) (*dv)[j] = p.deriv(x);
  }
}

double unorm(std::span<const double> f, double dx) {
  return std::max(lp_norm(f, 2.0, dx), lp_norm(f, 4.0, dx));
}

} // namespace

Trajectory solve(const SimConfig& cfg, const FieldPath& N) {
  cfg.validate();
  const bool noisy = N.M > 0;
  if (noisy) {
    if (N.steps != cfg.steps) throw ParameterError("solve: noise path has a different number of steps");
    if (std::abs(N.T - cfg.T) > 1e-12 * cfg.T) throw ParameterError("solve: noise path horizon differs from T");
    if (N.L != cfg.grid.L) throw ParameterError("solve: noise basis lives on a different domain");
  }

  const Grid& g = cfg.grid;
  const std::size_t n = g.n;
  const double dx = g.dx();
  const double h = cfg.dt();
  const double eps = cfg.eps;
  const WaveProfile profile = nagumo_front(cfg.a, cfg.nu, g);
  const OperatorSpec op = OperatorSpec::laplacian(cfg.nu);

  Trajectory tr;
  tr.lambda = cfg.resolved_lambda();
  tr.m = cfg.m >= 0.0 ? cfg.m : default_projection_gain(cfg.a, cfg.nu, g);
  tr.c = profile.c;
  tr.steps = cfg.steps;
  const double lambda = tr.lambda, m = tr.m, c = profile.c, a = cfg.a;

  const FieldPath NA = noisy ? convolve(N, op, 0.0, ConvScheme::interp).path : FieldPath{};
  const FieldPath NAl = noisy && cfg.decompose ? convolve(N, op, lambda, ConvScheme::interp).path : FieldPath{};
  const BasisTable basis(N.mode_map, g);
  const bool second = cfg.scheme == TimeScheme::etd2;
  EtdStepper sw(g, op, h, second), sz(g, op, h, second);
  const PhaseTracker tracker(profile, m);

  std::vector<double> vtw0(n), vtw1(n), na0(n, 0.0), na1(n, 0.0), w(n), V0(n), V1(n);
  std::vector<double> vt0(n), vt1(n), q0(n), q1(n), g0(n, 0.0), g1(n, 0.0), z(n, 0.0);
  std::vector<double> U(n), Z(n), y(n);

  front_values(profile, 0.0, vtw0);
  front_values(profile, cfg.initial_shift, V0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!cfg.initial_perturbation.empty()) V0[j] += cfg.initial_perturbation[j];
    w[j] = V0[j] - vtw0[j];
  }
  double C = 0.0;
  front_values(profile, C, vt0, &q0);
  tr.C_all.reserve(cfg.steps + 1);
  tr.C_all.push_back(C);

  auto record = [&](std::size_t step, const std::vector<double>& V, const std::vector<double>& vt,
                    const std::vector<double>& gcur) {
    DiagRow r;
    r.t = static_cast<double>(step) * h;
    r.C = C;
    double defect = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      U[j] = V[j] - vt[j];
      Z[j] = z[j] + gcur[j];
      y[j] = U[j] - eps * Z[j];
      defect = std::max(defect, std::abs(U[j] - eps * Z[j] - y[j]));
    }
    tr.identity_defect = std::max(tr.identity_defect, defect);
    const OrbitDistance od = distance_to_orbit(V, profile, OrbitSearch{true, C, cfg.orbit_window});
    r.d = od.d;
    r.phi_star = od.phi;
    r.norm_U = lp_norm(U, 2.0, dx);
    r.norm_w = lp_norm(w, 2.0, dx);
    if (cfg.decompose) {
      r.norm_Z_l2 = lp_norm(Z, 2.0, dx);
      r.norm_Z = std::max(r.norm_Z_l2, lp_norm(Z, 4.0, dx));
      r.norm_y = lp_norm(y, 2.0, dx);
      r.norm_NAl = unorm(gcur, dx);
    } else {
      r.norm_y = r.norm_U;
    }
    tr.rows.push_back(r);
  };
  auto snapshot = [&](std::size_t step, const std::vector<double>& V) {
    if (cfg.snapshot_stride == 0 || step % cfg.snapshot_stride != 0) return;
    tr.snapshots.insert(tr.snapshots.end(), V.begin(), V.end());
    ++tr.snapshot_count;
  };

  record(0, V0, vt0, g0);
  snapshot(0, V0);

  std::vector<double> tmp(n);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const double t0 = static_cast<double>(step) * h;
    const double t1 = static_cast<double>(step + 1) * h;
    front_values(profile, c * t1, vtw1);
    if (eps != 0.0 && noisy) {
      basis.evaluate(NA.row(step + 1), na1);
      for (double& v : na1) v *= eps;
    }

    sw.step(w, t0, [&](double tt, std::span<const double> u, std::span<double> out) {
      const auto& vt = tt == t0 ? vtw0 : vtw1;
      const auto& na = tt == t0 ? na0 : na1;
      for (std::size_t j = 0; j < n; ++j) out[j] = nagumo_f(u[j] + na[j] + vt[j], a) - nagumo_f(vt[j], a);
    });
    double wn = lp_norm(w, 2.0, dx);
    if (!std::isfinite(wn) || wn > 1e6)
      throw StabilityError("solve: ||w|| blew up at t = " + std::to_string(t1) + "; reduce the time step");
    for (std::size_t j = 0; j < n; ++j) V1[j] = w[j] + vtw1[j] + na1[j];

    const double C1 = tracker.step(V0, V1, C, h);
    if (!(std::abs(C1) <= 0.5 * g.L))
      throw FrontEscapedError("solve: phase C(t) = " + std::to_string(C1) + " left [-L/2, L/2] at t = " +
                              std::to_string(t1));
    front_values(profile, C1, vt1, &q1);
    if (vt1.front() >= 1e-8 || 1.0 - vt1.back() >= 1e-8) tr.boundary_flag = true;

    if (cfg.decompose) {
      if (noisy) basis.evaluate(NAl.row(step + 1), g1);
      // z' = A z + (b - P)(z + g) + lambda g with b = f'(v~), P u = m <u, q> q.
      sz.step(z, t0, [&](double tt, std::span<const double> u, std::span<double> out) {
        const bool first = tt == t0;
        const auto& vt = first ? vt0 : vt1;
        const auto& q = first ? q0 : q1;
        const auto& gv = first ? g0 : g1;
        double proj = 0.0;
        for (std::size_t j = 0; j < n; ++j) proj += (u[j] + gv[j]) * q[j];
        proj *= m * dx;
        for (std::size_t j = 0; j < n; ++j)
          out[j] = nagumo_df(vt[j], a) * (u[j] + gv[j]) - proj * q[j] + lambda * gv[j];
      });
      double zn = lp_norm(z, 2.0, dx);
      if (!std::isfinite(zn) || zn > 1e6)
        throw StabilityError("solve: first-order part blew up at t = " + std::to_string(t1) +
                             "; reduce the time step");
    }

    C = C1;
    tr.C_all.push_back(C);
    std::swap(vtw0, vtw1);
    std::swap(na0, na1);
    std::swap(V0, V1);
    std::swap(vt0, vt1);
    std::swap(q0, q1);
    std::swap(g0, g1);
    if ((step + 1) % cfg.diag_stride == 0 || step + 1 == cfg.steps) record(step + 1, V0, vt0, g0);
    snapshot(step + 1, V0);
  }
  tr.V_final = V0;
  tr.U_final = U;
  tr.Z_final = Z;
  tr.y_final = y;
  return tr;
}

DecompositionResult decompose(const Trajectory& traj, const FieldPath& N, const SimConfig& cfg) {
  if (cfg.snapshot_stride != 1 || traj.snapshot_count != cfg.steps + 1)
    throw ParameterError("decompose: trajectory must store a snapshot at every step");
  const Grid& g = cfg.grid;
  const WaveProfile profile = nagumo_front(cfg.a, cfg.nu, g);
  const OperatorSpec op = OperatorSpec::laplacian(cfg.nu);
  const double h = cfg.dt();
  auto coeff = [&](double t, std::span<double> b, std::span<double> q) {
    const auto k = static_cast<std::size_t>(std::llround(t / h));
    const double C = traj.C_all.at(k);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double x = g.x(j) - C;
      b[j] = nagumo_df(profile.value(x), cfg.a);
      q[j] = profile.deriv(x);
    }
  };
  DecompositionResult out;
  out.Z = convolve_evolution(N, g, op, coeff, traj.m, traj.lambda, 1);
  out.y = out.Z;
  for (std::size_t k = 0; k <= cfg.steps; ++k) {
    const double C = traj.C_all[k];
    const double* V = traj.snapshots.data() + k * g.n;
    const double* Zk = out.Z.data.data() + k * g.n;
    double* yk = out.y.data.data() + k * g.n;
    for (std::size_t j = 0; j < g.n; ++j) yk[j] = V[j] - profile.value(g.x(j) - C) - cfg.eps * Zk[j];
  }
  return out;
}

RunSummary diagnostics(const Trajectory& traj, const FieldPath& N, double eta) {
  RunSummary s;
  for (const auto& r : traj.rows) {
    s.sup_d = std::max(s.sup_d, r.d);
    s.sup_U = std::max(s.sup_U, r.norm_U);
    s.sup_Z = std::max(s.sup_Z, r.norm_Z);
    s.sup_y = std::max(s.sup_y, r.norm_y);
    s.sup_NAl = std::max(s.sup_NAl, r.norm_NAl);
    if (r.norm_U > 1e-12) s.max_phase_gap = std::max(s.max_phase_gap, (r.norm_U - r.d) / r.norm_U);
  }
  if (N.M > 0 && N.steps > 0) s.noise_holder = holder_seminorm(N, eta, FieldNorm::u);
  return s;
}

} // namespace wfl
