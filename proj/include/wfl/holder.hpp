#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wfl/noise.hpp"

namespace wfl {

enum class FieldNorm { l2, l4, u }; // u = max(L2, L4)

/// K_eta = 4 / ((2^eta - 1)(2^{1-eta} - 1)).
double k_eta(double eta);

struct SeminormResult {
  double value = 0.0;
  bool approximate = false; // true when only short and dyadic lags were scanned
};

/// Paths above this size use the lag-restricted scan by default.
inline constexpr std::size_t kExactSeminormLimit = std::size_t{1} << 14;

struct SeminormOptions {
  bool force_exact = false;
  std::size_t window = 64; // every lag <= window is scanned in the restricted mode
};

/// sup over grid pairs of |x(t) - x(s)| / |t - s|^eta for values on t_k = k dt.
SeminormResult holder_seminorm(std::span<const double> values, double dt, double eta,
                               const SeminormOptions& opt = {});
double holder_seminorm(const ScalarPath& p, double eta);
/// Field version; increments measured in the chosen spatial norm on the field's domain.
double holder_seminorm(const FieldPath& p, double eta, FieldNorm norm = FieldNorm::l2);
SeminormResult holder_seminorm_field(const FieldPath& p, double eta, FieldNorm norm,
                                     const SeminormOptions& opt = {});

/// Dyadic second-difference norm on the unit-rescaled axis. Needs steps a power of two.
double ciesielski_norm(std::span<const double> values, double eta);
double ciesielski_norm(const ScalarPath& p, double eta);
double ciesielski_norm(const FieldPath& p, double eta, FieldNorm norm = FieldNorm::l2);

struct HolderReport {
  double eta = 0.0;
  double seminorm_direct = 0.0;
  double norm_ciesielski = 0.0;
  int levels_used = 0;
  bool approximate = false;

  std::string to_json() const;
};

HolderReport holder_report(const ScalarPath& p, double eta);

using ScalarSampler = std::function<ScalarPath(double T, std::uint64_t seed)>;

struct ScalingCell {
  double T = 1.0;
  double scale_factor = 1.0; // T^{H - eta}
  double ks_statistic = 0.0;
  double p_value = 1.0;
};

struct ScalingReport {
  double H = 0.0;
  double eta = 0.0;
  std::size_t trials = 0;
  std::vector<ScalingCell> cells;
  bool pass = false;
};

/// Per-trial seed rule: derive_seed(derive_seed(master, bits(T)), trial). T = 1 reuses
/// exactly the unit-interval ensemble.
std::uint64_t scaling_seed(std::uint64_t master, double T, std::size_t trial);

ScalingReport verify_scaling(const ScalarSampler& sampler, double H, double eta, const std::vector<double>& T_list,
                             std::size_t trials, std::uint64_t master_seed);

enum class TailRegime { heavy, light };

struct TailOptions {
  double hill_fraction = 0.02;
  std::vector<double> sweep = {0.01, 0.02, 0.05};
  std::size_t bootstrap = 200;
  double level = 0.95;
  std::uint64_t seed = 1;
};

struct TailReport {
  TailRegime regime = TailRegime::heavy;
  double exponent_estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t sample_count = 0;
  std::vector<std::pair<double, double>> sweep; // (fraction, estimate), heavy regime
  double threshold = 0.0;                       // heavy regime: Hill threshold u
  double tail_fraction = 0.0;                   // heavy regime: S(u)
  double scale_k = 0.0;                         // light regime: S(b) ~ exp(-(b - b0)^alpha / k)
  double location = 0.0;                        // light regime offset b0
  double naive_slope = 0.0;                     // light regime fit without offset

  double fitted_survival(double b) const;
  std::string to_json() const;
};

TailReport estimate_tail(std::span<const double> samples, TailRegime regime, const TailOptions& opt = {});

/// Rows (b, empirical survival, fitted survival) at the sample points of the upper tail.
std::vector<std::vector<double>> survival_table(std::span<const double> samples, const TailReport& rep,
                                                std::size_t max_rows = 200);

} // namespace wfl
