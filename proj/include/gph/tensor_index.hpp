#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "gph/lattice.hpp"

namespace gph {

/// Row-major key of a 2k-slot index tuple (xi_1..xi_k, xi'_1..xi'_k), base F.
using TensorKey = std::uint64_t;

/// Maximum number of slots of any supported tensor (order <= 16).
inline constexpr int kMaxSlots = 32;

/// F^(2k); throws when the count does not fit a 63-bit key.
inline std::uint64_t dense_size(LatticeIndex lattice_size, int order) {
  std::uint64_t n = 1;
  const auto f = static_cast<std::uint64_t>(lattice_size);
  for (int i = 0; i < 2 * order; ++i) {
    if (n > (std::numeric_limits<std::uint64_t>::max() >> 1) / f) {
      throw std::overflow_error("tensor key space exceeds 63 bits");
    }
    n *= f;
  }
  return n;
}

/// Splits a key into its 2k digits (slot 0 is the most significant).
inline void decode_key(TensorKey key, LatticeIndex lattice_size, int slots, std::span<LatticeIndex> digits) {
  const auto f = static_cast<TensorKey>(lattice_size);
  for (int s = slots - 1; s >= 0; --s) {
    digits[static_cast<std::size_t>(s)] = static_cast<LatticeIndex>(key % f);
    key /= f;
  }
}

inline TensorKey encode_key(std::span<const LatticeIndex> digits, LatticeIndex lattice_size) {
  TensorKey key = 0;
  const auto f = static_cast<TensorKey>(lattice_size);
  for (LatticeIndex d : digits) key = key * f + static_cast<TensorKey>(d);
  return key;
}

}  // namespace gph
