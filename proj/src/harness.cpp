#include "wfl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "wfl/errors.hpp"
#include "wfl/holder.hpp"
#include "wfl/rng.hpp"
#include "wfl/stats.hpp"

namespace wfl {

using nlohmann::json;

bool StudyReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json StudyReport::to_json() const {
  json j;
  j["kind"] = kind;
  j["provenance"] = {{"config_hash", config_hash}, {"master_seed", seed}, {"version", version}};
  j["timestamp"] = timestamp;
  j["config"] = config;
  j["grid"] = grid;
  json cs = json::array();
  for (const auto& c : cells) cs.push_back({{"name", c.name}, {"params", c.params}, {"aggregates", c.aggregates}});
  j["cells"] = cs;
  j["fits"] = fits;
  j["prefactors"] = prefactors;
  j["extra"] = extra;
  j["exclusions"] = exclusions;
  json vs = json::array();
  for (const auto& v : verdicts)
    vs.push_back({{"name", v.name},
                  {"pass", v.pass},
                  {"value", v.value},
                  {"target", v.target},
                  {"tolerance", {{"key", v.tolerance_key}, {"value", v.tolerance}}},
                  {"detail", v.detail}});
  j["verdicts"] = vs;
  j["passed"] = passed();
  return j;
}

namespace {

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ParameterError("out-dir: cannot write '" + file.string() + "'");
  out << text << '\n';
}

// Flattens numeric cell aggregates into a table row; nested values are skipped.
std::vector<std::string> aggregate_columns(const std::vector<StudyCell>& cells) {
  std::vector<std::string> cols;
  for (const auto& c : cells)
    for (auto it = c.params.begin(); it != c.params.end(); ++it)
      if (it->is_number() && std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
  for (const auto& c : cells)
    for (auto it = c.aggregates.begin(); it != c.aggregates.end(); ++it)
      if (it->is_number() && std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
  return cols;
}

} // namespace

void StudyReport::write(const std::filesystem::path& out_dir) const {
  const std::filesystem::path base = out_dir / kind;
  std::filesystem::create_directories(base);
  write_text(base / "report.json", to_json().dump(2));
  const auto cols = aggregate_columns(cells);
  if (!cols.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& c : cells) {
      std::vector<double> r;
      for (const auto& k : cols) {
        const json* v = c.params.contains(k) ? &c.params[k] : (c.aggregates.contains(k) ? &c.aggregates[k] : nullptr);
        r.push_back(v && v->is_number() ? v->get<double>() : std::nan(""));
      }
      rows.push_back(std::move(r));
    }
    io::write_table(base / "summary.csv", cols, rows);
  }
  for (const auto& c : cells) {
    const auto dir = base / c.name;
    std::filesystem::create_directories(dir);
    io::write_table(dir / "summary.csv", c.header, c.rows);
    json cj{{"name", c.name}, {"params", c.params}, {"aggregates", c.aggregates}};
    write_text(dir / "report.json", cj.dump(2));
  }
  for (const auto& [rel, blob] : blobs) io::write_wfl1(base / rel, blob);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WFL_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& study, std::size_t cell, std::size_t trial) {
  std::uint64_t salt = 1469598103934665603ULL;
  for (unsigned char ch : study) {
    salt ^= ch;
    salt *= 1099511628211ULL;
  }
  return derive_seed(derive_seed(derive_seed(master, salt), cell), trial);
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi >= lo) || points == 0) throw ParameterError("log_grid: need 0 < lo <= hi and points >= 1");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

StudyReport base_report(const StudyConfig& cfg, const std::string& kind) {
  StudyReport r;
  r.kind = kind;
  r.config = cfg.to_json();
  r.config_hash = cfg.hash();
  r.seed = cfg.sim.seed;
  r.version = code_version();
  r.timestamp = timestamp_now();
  return r;
}

std::string cell_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, i);
  return buf;
}

struct GainInfo {
  double m = 0.0;
  double kappa_star = 0.0;
};

GainInfo resolve_gain(const SimConfig& sim) {
  const WaveProfile p = nagumo_front(sim.a, sim.nu, sim.grid);
  const SpectralGapReport g = spectral_gap(p, OperatorSpec::laplacian(sim.nu), sim.m);
  return {g.m, g.kappa_star};
}

struct RunOutcome {
  bool ok = false;
  std::string reason;
  RunSummary s;
};

RunOutcome run_one(const SimConfig& sc, const FieldPath& N) {
  RunOutcome o;
  try {
    const Trajectory tr = solve(sc, N);
    o.s = diagnostics(tr, N, sc.eta);
    o.ok = true;
  } catch (const FrontEscapedError&) {
    o.reason = "front_escaped";
  } catch (const StabilityError&) {
    o.reason = "unstable";
  }
  return o;
}

void count_exclusion(json& ex, const std::string& reason) {
  ex[reason] = ex.contains(reason) ? ex[reason].get<std::size_t>() + 1 : std::size_t{1};
}

double nan() { return std::nan(""); }

json fit_json(const stats::LinearFit& f) {
  return {{"slope", f.slope}, {"slope_se", f.slope_se}, {"intercept", f.intercept},
          {"intercept_se", f.intercept_se}, {"n", f.n}};
}

// Bootstrap standard error of the sample maximum.
double max_se(const std::vector<double>& v, std::uint64_t seed, std::size_t resamples = 200) {
  if (v.size() < 2) return 0.0;
  RandomStream rs(seed, 0);
  std::vector<double> maxima;
  for (std::size_t b = 0; b < resamples; ++b) {
    double m = -INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, v[rs.next_u64() % v.size()]);
    maxima.push_back(m);
  }
  return stats::stddev(maxima);
}

} // namespace

StudyReport run_short_time_study(const StudyConfig& cfg) {
  const ShortTimeConfig& st = cfg.short_time;
  if (cfg.trials < 100) throw ParameterError("trials: the short-time study needs at least 100 trials per T");
  StudyReport rep = base_report(cfg, "short_time");
  const auto Ts = log_grid(st.T_min, st.T_max, st.points);
  const double H = cfg.sim.noise.H, eta = cfg.sim.eta, eps = cfg.sim.eps;
  SimConfig proto = cfg.sim;
  proto.steps = st.steps;
  proto.decompose = false;
  proto.snapshot_stride = 0;
  for (double T : Ts) {
    proto.T = T;
    proto.validate();
  }
  proto.m = resolve_gain(proto).m;
  rep.grid = {{"T", Ts}, {"eps", eps}, {"H", H}, {"eta", eta}, {"trials", cfg.trials}, {"steps", st.steps}};

  const std::size_t trials = cfg.trials;
  std::vector<RunOutcome> out(Ts.size() * trials);
  parallel_for(out.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const std::size_t c = i / trials, k = i % trials;
    SimConfig sc = proto;
    sc.T = Ts[c];
    const FieldPath N = sample_field_noise(sc.noise, sc.steps, sc.T, trial_seed(sc.seed, "short_time", c, k), sc.grid);
    out[i] = run_one(sc, N);
  });

  std::vector<double> logT, logMed, medians;
  std::vector<std::vector<double>> per_cell(Ts.size());
  for (std::size_t c = 0; c < Ts.size(); ++c) {
    StudyCell cell;
    cell.name = cell_name("T", c);
    cell.params = {{"T", Ts[c]}};
    cell.header = {"trial", "included", "sup_d", "sup_U", "noise_holder", "noise_holder_unit"};
    std::size_t excluded = 0;
    for (std::size_t k = 0; k < trials; ++k) {
      const RunOutcome& o = out[c * trials + k];
      const double unit = o.s.noise_holder * std::pow(Ts[c], -(H - eta));
      cell.rows.push_back({static_cast<double>(k), o.ok ? 1.0 : 0.0, o.ok ? o.s.sup_d : nan(), o.ok ? o.s.sup_U : nan(),
                           o.ok ? o.s.noise_holder : nan(), o.ok ? unit : nan()});
      if (o.ok) per_cell[c].push_back(o.s.sup_d);
      else {
        ++excluded;
        count_exclusion(rep.exclusions, o.reason);
      }
    }
    const auto& v = per_cell[c];
    const double med = v.empty() ? nan() : stats::median(v);
    cell.aggregates = {{"included", v.size()}, {"excluded", excluded}, {"median_sup_d", med},
                       {"q10_sup_d", v.empty() ? nan() : stats::quantile(v, 0.1)},
                       {"q90_sup_d", v.empty() ? nan() : stats::quantile(v, 0.9)}};
    medians.push_back(med);
    if (std::isfinite(med) && med > 0.0) {
      logT.push_back(std::log(Ts[c]));
      logMed.push_back(std::log(med));
    }
    rep.cells.push_back(std::move(cell));
  }

  const double max_med = *std::max_element(medians.begin(), medians.end(), [](double a, double b) {
    return std::isnan(a) || (!std::isnan(b) && a < b);
  });
  Verdict v{"short_time_slope", false, nan(), "|slope - H| <= tol", "short_time.slope_tol", st.slope_tol, ""};
  if (!(max_med > 1e-10) || logT.size() < 2) {
    rep.fits["median_sup_d_vs_T"] = nullptr;
    v.detail = "degenerate: medians vanish, slope fit refused";
  } else {
    const auto fit = stats::ols(logT, logMed);
    rep.fits["median_sup_d_vs_T"] = fit_json(fit);
    v.value = fit.slope;
    v.pass = std::abs(fit.slope - H) <= st.slope_tol;
    v.detail = "fitted slope " + io::fmt(fit.slope) + " +- " + io::fmt(fit.slope_se) + " against H = " + io::fmt(H);
    if (eps > 0.0) {
      const double Cs = std::exp(fit.intercept) / eps;
      rep.prefactors["C_S_hat"] = {{"value", Cs}, {"se", Cs * fit.intercept_se}, {"ensemble", logT.size() * trials},
                                   {"definition", "median sup d ~ C_S eps T^H"}};
      // Fraction of runs inside the fitted bound next to P(||X||_{C^eta[0,1]} <= 1/eps).
      json curves = json::array();
      for (std::size_t c = 0; c < Ts.size(); ++c) {
        std::size_t in_bound = 0, small_noise = 0, n = 0;
        for (std::size_t k = 0; k < trials; ++k) {
          const RunOutcome& o = out[c * trials + k];
          if (!o.ok) continue;
          ++n;
          if (o.s.sup_d <= Cs * eps * std::pow(Ts[c], H)) ++in_bound;
          if (o.s.noise_holder * std::pow(Ts[c], -(H - eta)) <= 1.0 / eps) ++small_noise;
        }
        const double dn = std::max<double>(1.0, static_cast<double>(n));
        curves.push_back({{"T", Ts[c]}, {"bound_fraction", in_bound / dn}, {"noise_norm_probability", small_noise / dn}});
      }
      rep.extra["bound_vs_noise_tail"] = curves;
    }
  }
  rep.verdicts.push_back(v);
  return rep;
}

StudyReport run_long_time_study(const StudyConfig& cfg) {
  const LongTimeConfig& lt = cfg.long_time;
  if (std::abs(cfg.sim.a - 0.5) > 1e-12)
    throw ParameterError("wave.a: the long-time study needs the standing wave a = 0.5");
  const double ceiling = cfg.eta_ceiling();
  const double H = cfg.sim.noise.H, eta = cfg.sim.eta;
  if (!(eta < ceiling))
    throw ParameterError("solver.eta: eta = " + io::fmt(eta) + " must stay below the Holder-exponent ceiling eta_X = " +
                         io::fmt(ceiling));
  if (lt.points < 2 || !(lt.T_max > lt.T_min))
    throw ParameterError("long_time.points: the T grid needs at least two distinct points");
  if (cfg.trials < 1) throw ParameterError("trials: must be >= 1");
  StudyReport rep = base_report(cfg, "long_time");
  const auto Ts = log_grid(lt.T_min, lt.T_max, lt.points);

  const double beta = ceiling - eta - lt.margin;
  double gamma_delta = 0.0;
  if (lt.delta_sweep) {
    if (!(beta > 0.0))
      throw ParameterError("long_time.margin: eta_X - eta - margin must be positive for the delta sweep");
    gamma_delta = lt.delta_exponent >= 0.0 ? lt.delta_exponent : 0.5 * beta;
    if (!(gamma_delta < beta))
      throw ParameterError("long_time.delta_exponent: must stay below eta_X - eta - margin = " + io::fmt(beta));
  }

  SimConfig proto = cfg.sim;
  proto.steps = lt.steps;
  proto.decompose = false;
  proto.snapshot_stride = 0;
  for (double T : Ts) {
    proto.T = T;
    proto.validate();
  }
  proto.m = resolve_gain(proto).m;
  auto eps_of = [&](double T, bool delta) {
    double e = lt.eps0 * std::pow(T, -(H - eta));
    if (delta) e *= std::pow(T, -gamma_delta);
    return e;
  };
  rep.grid = {{"T", Ts}, {"eps0", lt.eps0}, {"H", H}, {"eta", eta}, {"eta_X", ceiling},
              {"trials", cfg.trials}, {"steps", lt.steps}};
  if (lt.delta_sweep) rep.grid["delta_exponent"] = gamma_delta;

  const std::size_t trials = cfg.trials;
  const std::size_t sweeps = lt.delta_sweep ? 2 : 1;
  std::vector<RunOutcome> out(sweeps * Ts.size() * trials);
  parallel_for(out.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const std::size_t s = i / (Ts.size() * trials);
    const std::size_t c = (i / trials) % Ts.size(), k = i % trials;
    SimConfig sc = proto;
    sc.T = Ts[c];
    sc.eps = eps_of(Ts[c], s == 1);
    // Both sweeps share the noise paths; only the amplitude differs.
    const FieldPath N = sample_field_noise(sc.noise, sc.steps, sc.T, trial_seed(sc.seed, "long_time", c, k), sc.grid);
    out[i] = run_one(sc, N);
  });

  for (std::size_t s = 0; s < sweeps; ++s) {
    std::vector<double> q, logT, logQ;
    for (std::size_t c = 0; c < Ts.size(); ++c) {
      StudyCell cell;
      cell.name = cell_name(s == 0 ? "T" : "delta_T", c);
      cell.params = {{"T", Ts[c]}, {"eps", eps_of(Ts[c], s == 1)}};
      cell.header = {"trial", "included", "sup_d", "sup_U", "noise_holder"};
      std::vector<double> v;
      std::size_t excluded = 0;
      for (std::size_t k = 0; k < trials; ++k) {
        const RunOutcome& o = out[(s * Ts.size() + c) * trials + k];
        cell.rows.push_back({static_cast<double>(k), o.ok ? 1.0 : 0.0, o.ok ? o.s.sup_d : nan(),
                             o.ok ? o.s.sup_U : nan(), o.ok ? o.s.noise_holder : nan()});
        if (o.ok) v.push_back(o.s.sup_d);
        else {
          ++excluded;
          count_exclusion(rep.exclusions, o.reason);
        }
      }
      const double qq = v.empty() ? nan() : stats::quantile(v, lt.quantile);
      cell.aggregates = {{"included", v.size()}, {"excluded", excluded}, {"quantile_sup_d", qq},
                         {"median_sup_d", v.empty() ? nan() : stats::median(v)}};
      q.push_back(qq);
      if (std::isfinite(qq) && qq > 0.0) {
        logT.push_back(std::log(Ts[c]));
        logQ.push_back(std::log(qq));
      }
      rep.cells.push_back(std::move(cell));
    }
    if (s == 0) {
      double worst = 0.0;
      for (std::size_t c = 1; c < q.size(); ++c) worst = std::max(worst, q[c] / q[0]);
      Verdict v{"long_time_bounded", std::isfinite(worst) && worst <= lt.growth_tol, worst,
                "max_T quantile(T) / quantile(T_min) <= growth_tol", "long_time.growth_tol", lt.growth_tol, ""};
      v.detail = "quantile ratio at T_max: " + io::fmt(q.back() / q.front());
      rep.fits["quantile_ratio_last"] = q.back() / q.front();
      if (logT.size() >= 2) rep.fits["quantile_vs_T"] = fit_json(stats::ols(logT, logQ));
      rep.verdicts.push_back(v);
    } else {
      Verdict v{"long_time_delta_decay", false, nan(), "slope of log quantile vs log T < 0", "long_time.delta_exponent",
                gamma_delta, ""};
      if (logT.size() >= 2) {
        const auto fit = stats::ols(logT, logQ);
        rep.fits["delta_quantile_vs_T"] = fit_json(fit);
        v.value = fit.slope;
        v.pass = fit.slope < 0.0;
      } else {
        v.detail = "degenerate quantiles";
      }
      rep.verdicts.push_back(v);
    }
  }
  return rep;
}

StudyReport run_tails_study(const StudyConfig& cfg) {
  const TailsConfig& tc = cfg.tails;
  if (tc.paths < 1000) throw ParameterError("tails.paths: at least 1000 noise paths are needed");
  StudyReport rep = base_report(cfg, "tails");
  const FieldNoiseSpec& ns = cfg.sim.noise;
  const double eta = cfg.sim.eta;
  const Grid g(cfg.sim.grid.L, tc.grid_n);
  const bool heavy = ns.driver == NoiseDriver::lfsm && ns.stable.alpha < 2.0;
  const double alpha = heavy ? ns.stable.alpha : 2.0;
  rep.grid = {{"paths", tc.paths}, {"steps", tc.steps}, {"eta", eta}, {"M", ns.M}, {"regime", heavy ? "heavy" : "light"}};

  std::vector<double> norms(tc.paths);
  parallel_for(tc.paths, resolve_threads(cfg.threads), [&](std::size_t i) {
    const FieldPath N = sample_field_noise(ns, tc.steps, 1.0, trial_seed(cfg.sim.seed, "tails", 0, i), g);
    norms[i] = holder_seminorm(N, eta, tc.norm);
  });

  TailOptions opt;
  opt.hill_fraction = tc.hill_fraction;
  opt.bootstrap = tc.bootstrap;
  opt.seed = trial_seed(cfg.sim.seed, "tails", 1, 0);
  const TailReport tr = estimate_tail(norms, heavy ? TailRegime::heavy : TailRegime::light, opt);
  rep.extra["tail"] = json::parse(tr.to_json());
  rep.fits["tail_exponent"] = {{"estimate", tr.exponent_estimate}, {"ci_lo", tr.ci_lo}, {"ci_hi", tr.ci_hi},
                               {"n", tr.sample_count}};

  StudyCell cell;
  cell.name = "survival";
  cell.header = {"b", "empirical_survival", "fitted_survival"};
  cell.rows = survival_table(norms, tr);
  cell.aggregates = {{"median_norm", stats::median(norms)}, {"q99_norm", stats::quantile(norms, 0.99)},
                     {"exponent_estimate", tr.exponent_estimate}};
  rep.cells.push_back(std::move(cell));

  if (heavy) {
    const double err = std::abs(tr.exponent_estimate - alpha);
    rep.verdicts.push_back({"tail_exponent_heavy", err <= tc.heavy_tol * alpha, tr.exponent_estimate,
                            "|alpha_hat - alpha| <= heavy_tol * alpha", "tails.heavy_tol", tc.heavy_tol,
                            "alpha = " + io::fmt(alpha)});
  } else {
    const double a = tr.exponent_estimate;
    rep.verdicts.push_back({"tail_exponent_light", a >= tc.light_lo && a <= tc.light_hi, a,
                            "light_lo <= alpha_hat <= light_hi", "tails.light_lo", tc.light_lo,
                            "light_hi = " + io::fmt(tc.light_hi)});
  }
  return rep;
}

EpsSweepResult run_eps_sweep(const StudyConfig& cfg) {
  const BoundsConfig& bc = cfg.bounds;
  if (bc.eps_sweep.size() < 2) throw ParameterError("bounds.eps_sweep: needs at least two amplitudes");
  if (bc.sweep_paths < 1) throw ParameterError("bounds.sweep_paths: must be >= 1");
  EpsSweepResult r;
  r.eps = bc.eps_sweep;
  SimConfig proto = cfg.sim;
  proto.T = bc.T;
  proto.steps = bc.sweep_steps;
  proto.decompose = true;
  proto.snapshot_stride = 0;
  proto.validate();
  const GainInfo gi = resolve_gain(proto);
  proto.m = gi.m;
  r.kappa_star = gi.kappa_star;

  const std::size_t ne = r.eps.size(), np = bc.sweep_paths;
  std::vector<RunOutcome> out(np * ne);
  parallel_for(out.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const std::size_t p = i / ne, e = i % ne;
    SimConfig sc = proto;
    sc.eps = r.eps[e];
    const FieldPath N = sample_field_noise(sc.noise, sc.steps, sc.T, trial_seed(sc.seed, "eps_sweep", 0, p), sc.grid);
    out[i] = run_one(sc, N);
  });

  std::vector<double> logE;
  for (double e : r.eps) logE.push_back(std::log(e));
  std::vector<double> cy;
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> ys, zs;
    bool ok = true;
    for (std::size_t e = 0; e < ne; ++e) {
      const RunOutcome& o = out[p * ne + e];
      ok = ok && o.ok && o.s.sup_y > 0.0;
      ys.push_back(o.ok ? o.s.sup_y : nan());
      zs.push_back(o.ok ? o.s.sup_Z : nan());
    }
    r.sup_y.push_back(ys);
    r.sup_Z.push_back(zs);
    if (!ok) {
      ++r.excluded;
      r.slopes.push_back(nan());
      continue;
    }
    std::vector<double> ly;
    for (double y : ys) ly.push_back(std::log(y));
    r.slopes.push_back(stats::ols(logE, ly).slope);
    for (std::size_t e = 0; e < ne; ++e) {
      double s = 0.0;
      for (int k = 3; k <= 4; ++k) s += std::pow(r.eps[e] * zs[e], k);
      cy.push_back(ys[e] * ys[e] * r.kappa_star / (2.0 * s));
    }
  }
  std::vector<double> good;
  for (double s : r.slopes)
    if (std::isfinite(s)) good.push_back(s);
  if (good.empty()) throw DegenerateInputError("eps sweep: every path was excluded");
  r.median_slope = stats::median(good);
  r.median_slope_se = good.size() > 1 ? 1.2533 * stats::stddev(good) / std::sqrt(static_cast<double>(good.size())) : 0.0;
  std::vector<double> lmed;
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<double> col;
    for (std::size_t p = 0; p < np; ++p)
      if (std::isfinite(r.slopes[p])) col.push_back(r.sup_y[p][e]);
    lmed.push_back(std::log(stats::median(col)));
  }
  const auto fm = stats::ols(logE, lmed);
  r.slope_of_medians = fm.slope;
  r.slope_of_medians_se = fm.slope_se;
  r.C_y_hat = cy.empty() ? nan() : stats::median(cy);
  return r;
}

StudyReport run_bounds_study(const StudyConfig& cfg) {
  const BoundsConfig& bc = cfg.bounds;
  if (bc.calibration < 50) throw ParameterError("bounds.calibration: at least 50 calibration paths are needed");
  if (bc.validation < 1) throw ParameterError("bounds.validation: must be >= 1");
  StudyReport rep = base_report(cfg, "bounds");
  SimConfig proto = cfg.sim;
  proto.T = bc.T;
  proto.steps = bc.steps;
  proto.decompose = true;
  proto.snapshot_stride = 0;
  proto.validate();
  const GainInfo gi = resolve_gain(proto);
  proto.m = gi.m;
  const double eps = proto.eps, eta = proto.eta, T = proto.T, lambda = proto.resolved_lambda();
  rep.grid = {{"T", T}, {"eps", eps}, {"eta", eta}, {"lambda", lambda}, {"m", gi.m},
              {"calibration", bc.calibration}, {"validation", bc.validation}, {"z_star", bc.z_star}};

  const std::size_t total = bc.calibration + bc.validation;
  std::vector<RunOutcome> out(total);
  parallel_for(total, resolve_threads(cfg.threads), [&](std::size_t i) {
    const std::size_t cell = i < bc.calibration ? 0 : 1;
    const std::size_t k = cell == 0 ? i : i - bc.calibration;
    const FieldPath N = sample_field_noise(proto.noise, proto.steps, T, trial_seed(proto.seed, "bounds", cell, k),
                                           proto.grid);
    out[i] = run_one(proto, N);
  });

  auto in_regime = [&](const RunOutcome& o) { return o.ok && eps * o.s.sup_Z <= bc.z_star; };
  std::vector<double> rs, rl, rrho, rz;
  const double Teta = std::pow(T, eta);
  for (std::size_t i = 0; i < bc.calibration; ++i) {
    const RunOutcome& o = out[i];
    if (!in_regime(o) || !(o.s.noise_holder > 0.0)) continue;
    rs.push_back(o.s.sup_Z / (Teta * o.s.noise_holder));
    rl.push_back(o.s.sup_Z / o.s.noise_holder);
    double s = 0.0;
    for (int k = 3; k <= 4; ++k) s += std::pow(eps * o.s.sup_Z, k);
    if (s > 0.0) rrho.push_back(o.s.sup_y / std::sqrt(s));
    if (o.s.sup_NAl > 0.0) rz.push_back(std::max(0.0, (o.s.sup_Z / o.s.sup_NAl - 1.0) / (1.0 + lambda)));
  }
  auto maxof = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  const double Cs = maxof(rs), Cl = maxof(rl), rho = maxof(rrho), Cz = maxof(rz);
  const std::uint64_t bs = trial_seed(proto.seed, "bounds", 2, 0);
  rep.prefactors["C_S_hat"] = {{"value", Cs}, {"se", max_se(rs, bs)}, {"ensemble", rs.size()}};
  rep.prefactors["C_L_hat"] = {{"value", Cl}, {"se", max_se(rl, bs + 1)}, {"ensemble", rl.size()}};
  rep.prefactors["rho_hat"] = {{"value", rho}, {"se", max_se(rrho, bs + 2)}, {"ensemble", rrho.size()}};
  rep.prefactors["C_Z_hat"] = {{"value", Cz}, {"se", max_se(rz, bs + 3)}, {"ensemble", rz.size()}};
  rep.prefactors["C_y_hat"] = {{"value", 0.5 * rho * rho * gi.kappa_star}, {"ensemble", rrho.size()}};
  rep.prefactors["z_star_hat"] = {{"value", bc.z_star}, {"source", "bounds.z_star"}};
  rep.prefactors["kappa_star"] = gi.kappa_star;

  const double f = bc.inflation;
  auto rhs = [&](double C, double norm) {
    const double base = f * C * eps * norm;
    double s = base;
    for (int k = 3; k <= 4; ++k) s += f * rho * std::pow(base, 0.5 * k);
    return s + 1e-12;
  };
  std::size_t used = 0, short_v = 0, long_v = 0, z_v = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    StudyCell cell;
    cell.name = c == 0 ? "calibration" : "validation";
    cell.header = {"trial", "included", "noise_holder", "sup_d", "sup_U", "sup_Z", "sup_y", "sup_NAl"};
    const std::size_t lo = c == 0 ? 0 : bc.calibration, hi = c == 0 ? bc.calibration : total;
    std::size_t inc = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const RunOutcome& o = out[i];
      const bool ok = in_regime(o);
      cell.rows.push_back({static_cast<double>(i - lo), ok ? 1.0 : 0.0, o.ok ? o.s.noise_holder : nan(),
                           o.ok ? o.s.sup_d : nan(), o.ok ? o.s.sup_U : nan(), o.ok ? o.s.sup_Z : nan(),
                           o.ok ? o.s.sup_y : nan(), o.ok ? o.s.sup_NAl : nan()});
      if (!ok) {
        count_exclusion(rep.exclusions, o.ok ? "out_of_regime" : o.reason);
        continue;
      }
      ++inc;
      if (c == 0) continue;
      ++used;
      if (o.s.sup_d > rhs(Cs * Teta, o.s.noise_holder)) ++short_v;
      if (o.s.sup_d > rhs(Cl, o.s.noise_holder)) ++long_v;
      if (o.s.sup_Z > (1.0 + f * Cz * (1.0 + lambda)) * o.s.sup_NAl + 1e-12) ++z_v;
    }
    cell.aggregates = {{"included", inc}, {"excluded", (hi - lo) - inc}};
    rep.cells.push_back(std::move(cell));
  }
  const double du = std::max<double>(1.0, static_cast<double>(used));
  auto rate_verdict = [&](const char* name, std::size_t v) {
    Verdict vd{name, used > 0 && v == 0, static_cast<double>(v) / du, "held-out violation rate = 0 at inflated prefactors",
               "bounds.inflation", f, std::to_string(v) + " of " + std::to_string(used) + " held-out runs"};
    rep.verdicts.push_back(vd);
  };
  rate_verdict("short_bound_violation_rate", short_v);
  rate_verdict("long_bound_violation_rate", long_v);
  rate_verdict("z_bound_violation_rate", z_v);

  const EpsSweepResult sw = run_eps_sweep(cfg);
  rep.fits["eps_sweep"] = {{"eps", sw.eps},
                           {"median_slope", sw.median_slope},
                           {"median_slope_se", sw.median_slope_se},
                           {"slope_of_medians", sw.slope_of_medians},
                           {"slope_of_medians_se", sw.slope_of_medians_se},
                           {"paths", sw.slopes.size()},
                           {"excluded", sw.excluded},
                           {"C_y_hat", sw.C_y_hat}};
  StudyCell sc;
  sc.name = "eps_sweep";
  sc.header = {"path", "slope"};
  for (double e : sw.eps) sc.header.push_back("sup_y_eps_" + io::fmt(e));
  for (std::size_t p = 0; p < sw.slopes.size(); ++p) {
    std::vector<double> row{static_cast<double>(p), sw.slopes[p]};
    row.insert(row.end(), sw.sup_y[p].begin(), sw.sup_y[p].end());
    sc.rows.push_back(std::move(row));
  }
  sc.aggregates = {{"median_slope", sw.median_slope}, {"excluded", sw.excluded}};
  rep.cells.push_back(std::move(sc));
  rep.verdicts.push_back({"eps_sweep_slope", sw.median_slope >= bc.sweep_lo && sw.median_slope <= bc.sweep_hi,
                          sw.median_slope, "sweep_lo <= median slope <= sweep_hi", "bounds.sweep_lo", bc.sweep_lo,
                          "sweep_hi = " + io::fmt(bc.sweep_hi)});
  return rep;
}

StudyReport run_simulation(const StudyConfig& cfg, std::size_t snapshot_stride) {
  StudyReport rep = base_report(cfg, "simulate");
  SimConfig sc = cfg.sim;
  sc.snapshot_stride = snapshot_stride;
  sc.validate();
  const FieldPath N = sample_field_noise(sc.noise, sc.steps, sc.T, trial_seed(sc.seed, "simulate", 0, 0), sc.grid);
  const Trajectory tr = solve(sc, N);
  const RunSummary s = diagnostics(tr, N, sc.eta);
  rep.grid = {{"T", sc.T}, {"steps", sc.steps}, {"eps", sc.eps}, {"L", sc.grid.L}, {"n", sc.grid.n}};
  StudyCell cell;
  cell.name = "run";
  cell.header = {"t", "d", "norm_U", "norm_Z", "norm_y", "C"};
  for (const auto& r : tr.rows) cell.rows.push_back({r.t, r.d, r.norm_U, r.norm_Z, r.norm_y, r.C});
  cell.aggregates = {{"sup_d", s.sup_d},     {"sup_U", s.sup_U},     {"sup_Z", s.sup_Z},
                     {"sup_y", s.sup_y},     {"sup_NAl", s.sup_NAl}, {"noise_holder", s.noise_holder},
                     {"max_phase_gap", s.max_phase_gap}};
  rep.extra = {{"c", tr.c}, {"m", tr.m}, {"lambda", tr.lambda}, {"boundary_flag", tr.boundary_flag},
               {"identity_defect", tr.identity_defect}, {"C_final", tr.C_all.back()}};
  rep.cells.push_back(std::move(cell));
  if (snapshot_stride > 0) {
    rep.blobs.push_back({"run/snapshots.wfl1", io::Wfl1{static_cast<std::uint32_t>(tr.snapshot_count),
                                                        static_cast<std::uint32_t>(sc.grid.n), sc.T, tr.snapshots}});
    rep.blobs.push_back({"run/noise.wfl1", io::Wfl1{static_cast<std::uint32_t>(N.steps + 1),
                                                    static_cast<std::uint32_t>(N.M), N.T, N.coeffs}});
  }
  return rep;
}

} // namespace wfl
