#pragma once

#include <array>
#include <cstdint>

namespace wfl {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// One call maps a 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the k-th independent worker: mix64(master ^ k).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

/// Sequential stream over Philox blocks. The seed is the key; the counter
/// runs (block index lo, block index hi, stream lo, stream hi).
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Exp(1).
  double exponential();

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

} // namespace wfl
