#include "wfl/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;

const char* code_version() { return "0.1.0"; }

namespace {

double default_eta(const FieldNoiseSpec& n) {
  if (n.driver == NoiseDriver::fbm) return n.H - 0.15;
  return n.H - 1.0 / n.stable.alpha - 0.1;
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

class Section {
public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ParameterError("config: '" + (prefix_.empty() ? "<root>" : prefix_) + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ParameterError("config: unknown key '" + join(prefix_, it.key()) + "'");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string name(const char* key) const { return join(prefix_, key); }

  Section sub(const char* key) const {
    static const json empty = json::object();
    return has(key) ? Section(j_.at(key), name(key)) : Section(empty, name(key));
  }

  double num(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ParameterError("config: '" + name(key) + "' must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ParameterError("config: '" + name(key) + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ParameterError("config: '" + name(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string str(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ParameterError("config: '" + name(key) + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> nums(const char* key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ParameterError("config: '" + name(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ParameterError("config: '" + name(key) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

private:
  const json& j_;
  std::string prefix_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ParameterError("config: '" + field + "' " + what);
}

FieldNorm parse_norm(const std::string& s, const std::string& field) {
  if (s == "l2") return FieldNorm::l2;
  if (s == "l4") return FieldNorm::l4;
  if (s == "u") return FieldNorm::u;
  throw ParameterError("config: '" + field + "' must be one of l2, l4, u");
}

const char* norm_name(FieldNorm n) {
  switch (n) {
  case FieldNorm::l2: return "l2";
  case FieldNorm::l4: return "l4";
  default: return "u";
  }
}

} // namespace

double StudyConfig::eta_ceiling() const {
  const FieldNoiseSpec& n = sim.noise;
  return n.driver == NoiseDriver::fbm ? n.H : n.H - 1.0 / n.stable.alpha;
}

StudyConfig default_config() {
  StudyConfig c;
  c.sim.steps = 4096;
  c.sim.diag_stride = 8;
  c.sim.orbit_window = 1.0;
  c.sim.eta = default_eta(c.sim.noise);
  return c;
}

StudyConfig parse_config(const json& j) {
  StudyConfig c = default_config();
  const Section root(j, "");
  root.allow({"seed", "trials", "threads", "grid", "wave", "noise", "solver", "short_time", "long_time", "tails",
              "bounds"});
  c.sim.seed = root.count("seed", c.sim.seed);
  c.trials = root.count("trials", c.trials);
  c.threads = static_cast<unsigned>(root.count("threads", c.threads));

  const Section g = root.sub("grid");
  g.allow({"L", "n"});
  const double L = g.num("L", c.sim.grid.L);
  const std::size_t n = g.count("n", c.sim.grid.n);
  require(L > 0.0, g.name("L"), "must be positive");
  require(n >= 8 && (n & (n - 1)) == 0, g.name("n"), "must be a power of two >= 8");
  c.sim.grid = Grid(L, n);

  const Section w = root.sub("wave");
  w.allow({"a", "nu"});
  c.sim.a = w.num("a", c.sim.a);
  c.sim.nu = w.num("nu", c.sim.nu);
  require(c.sim.a > 0.0 && c.sim.a < 1.0, w.name("a"), "must lie in (0, 1)");
  require(c.sim.nu > 0.0, w.name("nu"), "must be positive");

  const Section ns = root.sub("noise");
  ns.allow({"driver", "H", "alpha", "symmetric", "scale", "M", "decay_exponent", "burn", "weights"});
  FieldNoiseSpec& nz = c.sim.noise;
  const std::string driver = ns.str("driver", "fbm");
  if (driver == "fbm") nz.driver = NoiseDriver::fbm;
  else if (driver == "lfsm") nz.driver = NoiseDriver::lfsm;
  else throw ParameterError("config: 'noise.driver' must be fbm or lfsm");
  nz.H = ns.num("H", nz.H);
  nz.stable.alpha = ns.num("alpha", 1.5);
  nz.stable.symmetric = ns.flag("symmetric", nz.stable.symmetric);
  nz.stable.scale = ns.num("scale", nz.stable.scale);
  nz.M = ns.count("M", nz.M);
  nz.decay_exponent = ns.num("decay_exponent", nz.decay_exponent);
  nz.burn = ns.count("burn", nz.burn);
  nz.weights = ns.nums("weights", nz.weights);
  require(nz.H > 0.0 && nz.H < 1.0, ns.name("H"), "must lie in (0, 1)");
  require(nz.stable.alpha > 0.0 && nz.stable.alpha <= 2.0, ns.name("alpha"), "must lie in (0, 2]");
  require(nz.stable.scale > 0.0, ns.name("scale"), "must be positive");
  require(nz.M >= 1, ns.name("M"), "must be >= 1");
  require(nz.weights.empty() || nz.weights.size() == nz.M, ns.name("weights"), "must have M entries");
  require(2 * (nz.M / 2 + 1) < n, ns.name("M"), "puts the highest mode above the grid Nyquist limit");

  const Section s = root.sub("solver");
  s.allow({"eps", "T", "steps", "eta", "gamma", "lambda", "m", "scheme", "diag_stride", "orbit_window",
           "initial_shift", "decompose"});
  c.sim.eps = s.num("eps", c.sim.eps);
  c.sim.T = s.num("T", c.sim.T);
  c.sim.steps = s.count("steps", c.sim.steps);
  c.eta_from_rule = !s.has("eta");
  c.sim.eta = c.eta_from_rule ? default_eta(nz) : s.num("eta", 0.0);
  c.sim.gamma = s.num("gamma", 0.0);
  c.sim.lambda = s.num("lambda", -1.0);
  c.sim.m = s.num("m", -1.0);
  const std::string scheme = s.str("scheme", "etd2");
  if (scheme == "etd2") c.sim.scheme = TimeScheme::etd2;
  else if (scheme == "etd1") c.sim.scheme = TimeScheme::etd1;
  else throw ParameterError("config: 'solver.scheme' must be etd1 or etd2");
  c.sim.diag_stride = s.count("diag_stride", c.sim.diag_stride);
  c.sim.orbit_window = s.num("orbit_window", c.sim.orbit_window);
  c.sim.initial_shift = s.num("initial_shift", 0.0);
  c.sim.decompose = s.flag("decompose", c.sim.decompose);
  require(c.sim.eps >= 0.0, s.name("eps"), "must be >= 0");
  require(c.sim.T > 0.0, s.name("T"), "must be positive");
  require(c.sim.steps >= 1, s.name("steps"), "must be >= 1");
  require(c.sim.eta > 0.0 && c.sim.eta < 1.0, s.name("eta"), "must lie in (0, 1)");
  require(c.sim.gamma == 0.0, s.name("gamma"), "must be 0");
  require(c.sim.diag_stride >= 1, s.name("diag_stride"), "must be >= 1");
  require(c.sim.orbit_window > 0.0, s.name("orbit_window"), "must be positive");

  const Section st = root.sub("short_time");
  st.allow({"T_min", "T_max", "points", "steps", "slope_tol"});
  ShortTimeConfig& sc = c.short_time;
  sc.T_min = st.num("T_min", sc.T_min);
  sc.T_max = st.num("T_max", sc.T_max);
  sc.points = st.count("points", sc.points);
  sc.steps = st.count("steps", sc.steps);
  sc.slope_tol = st.num("slope_tol", sc.slope_tol);
  require(sc.T_min > 0.0 && sc.T_max > sc.T_min, st.name("T_max"), "must exceed T_min > 0");
  require(sc.points >= 2, st.name("points"), "must be >= 2");
  require(sc.steps >= 1, st.name("steps"), "must be >= 1");

  const Section lt = root.sub("long_time");
  lt.allow({"T_min", "T_max", "points", "steps", "eps0", "quantile", "growth_tol", "delta_sweep", "delta_exponent",
            "margin"});
  LongTimeConfig& lc = c.long_time;
  lc.T_min = lt.num("T_min", lc.T_min);
  lc.T_max = lt.num("T_max", lc.T_max);
  lc.points = lt.count("points", lc.points);
  lc.steps = lt.count("steps", lc.steps);
  lc.eps0 = lt.num("eps0", lc.eps0);
  lc.quantile = lt.num("quantile", lc.quantile);
  lc.growth_tol = lt.num("growth_tol", lc.growth_tol);
  lc.delta_sweep = lt.flag("delta_sweep", lc.delta_sweep);
  lc.delta_exponent = lt.num("delta_exponent", lc.delta_exponent);
  lc.margin = lt.num("margin", lc.margin);
  require(lc.T_min > 0.0 && lc.T_max >= lc.T_min, lt.name("T_max"), "must be >= T_min > 0");
  require(lc.steps >= 1, lt.name("steps"), "must be >= 1");
  require(lc.quantile > 0.0 && lc.quantile < 1.0, lt.name("quantile"), "must lie in (0, 1)");
  require(lc.eps0 >= 0.0, lt.name("eps0"), "must be >= 0");

  const Section tl = root.sub("tails");
  tl.allow({"paths", "steps", "grid_n", "norm", "hill_fraction", "bootstrap", "heavy_tol", "light_lo", "light_hi"});
  TailsConfig& tc = c.tails;
  tc.paths = tl.count("paths", tc.paths);
  tc.steps = tl.count("steps", tc.steps);
  tc.grid_n = tl.count("grid_n", tc.grid_n);
  tc.norm = parse_norm(tl.str("norm", norm_name(tc.norm)), tl.name("norm"));
  tc.hill_fraction = tl.num("hill_fraction", tc.hill_fraction);
  tc.bootstrap = tl.count("bootstrap", tc.bootstrap);
  tc.heavy_tol = tl.num("heavy_tol", tc.heavy_tol);
  tc.light_lo = tl.num("light_lo", tc.light_lo);
  tc.light_hi = tl.num("light_hi", tc.light_hi);
  require(tc.steps >= 2 && (tc.steps & (tc.steps - 1)) == 0, tl.name("steps"), "must be a power of two >= 2");
  require(tc.grid_n >= 8 && (tc.grid_n & (tc.grid_n - 1)) == 0, tl.name("grid_n"), "must be a power of two >= 8");
  require(tc.hill_fraction > 0.0 && tc.hill_fraction < 1.0, tl.name("hill_fraction"), "must lie in (0, 1)");

  const Section bd = root.sub("bounds");
  bd.allow({"calibration", "validation", "T", "steps", "inflation", "z_star", "eps_sweep", "sweep_paths",
            "sweep_steps", "sweep_lo", "sweep_hi"});
  BoundsConfig& bc = c.bounds;
  bc.calibration = bd.count("calibration", bc.calibration);
  bc.validation = bd.count("validation", bc.validation);
  bc.T = bd.num("T", bc.T);
  bc.steps = bd.count("steps", bc.steps);
  bc.inflation = bd.num("inflation", bc.inflation);
  bc.z_star = bd.num("z_star", bc.z_star);
  bc.eps_sweep = bd.nums("eps_sweep", bc.eps_sweep);
  bc.sweep_paths = bd.count("sweep_paths", bc.sweep_paths);
  bc.sweep_steps = bd.count("sweep_steps", bc.sweep_steps);
  bc.sweep_lo = bd.num("sweep_lo", bc.sweep_lo);
  bc.sweep_hi = bd.num("sweep_hi", bc.sweep_hi);
  require(bc.T > 0.0, bd.name("T"), "must be positive");
  require(bc.steps >= 1, bd.name("steps"), "must be >= 1");
  require(bc.inflation >= 1.0, bd.name("inflation"), "must be >= 1");
  for (double e : bc.eps_sweep) require(e > 0.0, bd.name("eps_sweep"), "entries must be positive");
  return c;
}

StudyConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParameterError("config: cannot open '" + file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("config: malformed JSON in '" + file.string() + "': " + e.what());
  }
  return parse_config(j);
}

json StudyConfig::to_json() const {
  const FieldNoiseSpec& nz = sim.noise;
  json j;
  j["seed"] = sim.seed;
  j["trials"] = trials;
  j["grid"] = {{"L", sim.grid.L}, {"n", sim.grid.n}};
  j["wave"] = {{"a", sim.a}, {"nu", sim.nu}};
  j["noise"] = {{"driver", nz.driver == NoiseDriver::fbm ? "fbm" : "lfsm"},
                {"H", nz.H},
                {"alpha", nz.stable.alpha},
                {"symmetric", nz.stable.symmetric},
                {"scale", nz.stable.scale},
                {"M", nz.M},
                {"decay_exponent", nz.decay_exponent},
                {"burn", nz.burn},
                {"weights", nz.weights}};
  j["solver"] = {{"eps", sim.eps},
                 {"T", sim.T},
                 {"steps", sim.steps},
                 {"eta", sim.eta},
                 {"gamma", sim.gamma},
                 {"lambda", sim.lambda},
                 {"m", sim.m},
                 {"scheme", sim.scheme == TimeScheme::etd2 ? "etd2" : "etd1"},
                 {"diag_stride", sim.diag_stride},
                 {"orbit_window", sim.orbit_window},
                 {"initial_shift", sim.initial_shift},
                 {"decompose", sim.decompose}};
  j["short_time"] = {{"T_min", short_time.T_min},
                     {"T_max", short_time.T_max},
                     {"points", short_time.points},
                     {"steps", short_time.steps},
                     {"slope_tol", short_time.slope_tol}};
  j["long_time"] = {{"T_min", long_time.T_min},
                    {"T_max", long_time.T_max},
                    {"points", long_time.points},
                    {"steps", long_time.steps},
                    {"eps0", long_time.eps0},
                    {"quantile", long_time.quantile},
                    {"growth_tol", long_time.growth_tol},
                    {"delta_sweep", long_time.delta_sweep},
                    {"delta_exponent", long_time.delta_exponent},
                    {"margin", long_time.margin}};
  j["tails"] = {{"paths", tails.paths},
                {"steps", tails.steps},
                {"grid_n", tails.grid_n},
                {"norm", norm_name(tails.norm)},
                {"hill_fraction", tails.hill_fraction},
                {"bootstrap", tails.bootstrap},
                {"heavy_tol", tails.heavy_tol},
                {"light_lo", tails.light_lo},
                {"light_hi", tails.light_hi}};
  j["bounds"] = {{"calibration", bounds.calibration},
                 {"validation", bounds.validation},
                 {"T", bounds.T},
                 {"steps", bounds.steps},
                 {"inflation", bounds.inflation},
                 {"z_star", bounds.z_star},
                 {"eps_sweep", bounds.eps_sweep},
                 {"sweep_paths", bounds.sweep_paths},
                 {"sweep_steps", bounds.sweep_steps},
                 {"sweep_lo", bounds.sweep_lo},
                 {"sweep_hi", bounds.sweep_hi}};
  return j;
}

std::string StudyConfig::hash() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace wfl
