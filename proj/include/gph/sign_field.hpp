#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "gph/lattice.hpp"

namespace gph {

/// Stateless keyed generator: every draw is a pure function of (seed, stream, counter).
class CounterRng {
 public:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix(mix(mix(seed) ^ stream) ^ counter);
  }

  /// Uniform on [0, 1) with 53 random bits.
  static double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(bits(seed, stream, counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on counters 2c and 2c+1.
  static double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
};

/// Stream tags keep the different consumers of one seed apart.
namespace streams {
inline constexpr std::uint64_t field = 0x5f1e1d0000000000ULL;
inline constexpr std::uint64_t tensor = 0x7e450e0000000000ULL;
inline constexpr std::uint64_t nls = 0x4e15000000000000ULL;
inline constexpr std::uint64_t sampler = 0x5a3b1e0000000000ULL;
inline constexpr std::uint64_t mc = 0x3c3c000000000000ULL;
}  // namespace streams

/// Total map lattice point -> {+1, -1}; the finite stand-in for one omega.
class SignField {
 public:
  static SignField all_plus(const FrequencyLattice& lattice);
  /// Point i is -1 when bit i of `bits` is set. Requires F <= 64.
  static SignField from_bits(const FrequencyLattice& lattice, std::uint64_t bits);
  static SignField from_values(std::vector<std::int8_t> values);

  std::size_t size() const { return values_.size(); }
  int operator()(LatticeIndex i) const { return values_[static_cast<std::size_t>(i)]; }
  double h(LatticeIndex i) const { return values_[static_cast<std::size_t>(i)]; }
  std::span<const std::int8_t> values() const { return values_; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  bool seeded() const { return seeded_; }

  bool operator==(const SignField& other) const { return values_ == other.values_; }

 private:
  friend SignField sample_field(const FrequencyLattice&, std::uint64_t, std::uint64_t);
  std::vector<std::int8_t> values_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  bool seeded_ = false;
};

/// Independent fair signs per point from the counter generator keyed by (seed, stream, point).
SignField sample_field(const FrequencyLattice& lattice, std::uint64_t seed, std::uint64_t stream = 0);

/// f^omega: coefficient at zeta multiplied by h(zeta).
std::vector<std::complex<double>> randomize_function(std::span<const std::complex<double>> f, const SignField& field);

}  // namespace gph
