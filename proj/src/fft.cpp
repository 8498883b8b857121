#include "wfl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "wfl/errors.hpp"

namespace wfl::fft {

namespace {

// Planning is not thread-safe in FFTW, execution with the new-array
// interface is. Plans live for the whole process.
std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan get_plan(std::size_t n, fftw_r2r_kind kind) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, static_cast<int>(kind));
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<double> a(n), b(n);
  fftw_plan p = fftw_plan_r2r_1d(static_cast<int>(n), a.data(), b.data(), kind,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw InternalError("fftw: planning failed for n=" + std::to_string(n));
  plan_cache.emplace(key, p);
  return p;
}

void run(std::span<const double> in, std::span<double> out, fftw_r2r_kind kind) {
  const std::size_t n = in.size();
  if (out.size() != n) throw ParameterError("fft: output length mismatch");
  if (n == 0) return;
  // hc2r destroys its input, so always work on a copy.
  std::vector<double> tmp(in.begin(), in.end());
  fftw_execute_r2r(get_plan(n, kind), tmp.data(), out.data());
}

} // namespace

void r2hc(std::span<const double> in, std::span<double> out) { run(in, out, FFTW_R2HC); }

void hc2r(std::span<const double> in, std::span<double> out) { run(in, out, FFTW_HC2R); }

std::vector<double> forward(std::span<const double> x) {
  std::vector<double> out(x.size());
  r2hc(x, out);
  return out;
}

std::vector<double> inverse(std::span<const double> hc) {
  std::vector<double> out(hc.size());
  hc2r(hc, out);
  const double inv = 1.0 / static_cast<double>(hc.size());
  for (double& v : out) v *= inv;
  return out;
}

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

} // namespace wfl::fft
