#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wfl::fft {

// Half-complex layout (FFTW R2HC): out[0] = Re X_0, out[k] = Re X_k for
// 1 <= k <= n/2, out[n-k] = Im X_k for 1 <= k < n/2, where
// X_k = sum_j x_j exp(-2 pi i j k / n).

void r2hc(std::span<const double> in, std::span<double> out);

/// Unnormalized inverse: hc2r(r2hc(x)) = n * x.
void hc2r(std::span<const double> in, std::span<double> out);

std::vector<double> forward(std::span<const double> x);

/// Normalized inverse of forward().
std::vector<double> inverse(std::span<const double> hc);

/// |k| of half-complex slot `slot` for transform length n.
inline std::size_t slot_wavenumber(std::size_t slot, std::size_t n) {
  return slot <= n / 2 ? slot : n - slot;
}

bool is_power_of_two(std::size_t n);

} // namespace wfl::fft
