#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gph {

inline constexpr int kMaxDim = 3;

/// Integer frequency in lattice units. Coordinates past the lattice dimension stay zero.
using Frequency = std::array<int, kMaxDim>;

using LatticeIndex = std::int32_t;

class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Squared Euclidean modulus |z|^2.
constexpr int squared_modulus(const Frequency& z) {
  return z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
}

std::string to_string(const Frequency& z, int dim);

/**
 * Truncated frequency box Z^d \cap [-M, M]^d.
 *
 * Points are enumerated lexicographically on their coordinates, which makes
 * the index a mixed-radix number with digits (c_i + M). Immutable after
 * construction apart from lazily built lookup tables, which are guarded.
 */
class FrequencyLattice {
 public:
  FrequencyLattice(int dim, int cutoff);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  /// Number of lattice points F = (2M+1)^d.
  LatticeIndex size() const { return size_; }

  const Frequency& freq_of(LatticeIndex i) const { return coords_.at(static_cast<std::size_t>(i)); }
  /// Index of a member; throws for points outside the box.
  LatticeIndex index_of(const Frequency& z) const;
  std::optional<LatticeIndex> find(const Frequency& z) const;
  bool contains(const Frequency& z) const;

  /// a - b + c when it lies in the box, otherwise nullopt (Galerkin drop).
  std::optional<Frequency> combine(const Frequency& a, const Frequency& b, const Frequency& c) const;
  /// Index form of combine; returns -1 for a dropped combination.
  LatticeIndex combine_index(LatticeIndex a, LatticeIndex b, LatticeIndex c) const;

  /// |z|^2 per lattice point.
  int energy(LatticeIndex i) const { return energy_[static_cast<std::size_t>(i)]; }
  /// Japanese bracket <z> = sqrt(1 + |z|^2) per lattice point.
  double bracket(LatticeIndex i) const { return bracket_[static_cast<std::size_t>(i)]; }
  int max_energy() const { return max_energy_; }

  /// Signed dispersion energy sum_j |xi_j|^2 - sum_j |xi'_j|^2 of every row-major
  /// slot of a dense order-k tensor. Built once per order and cached.
  const std::vector<std::int32_t>& energy_table(int order) const;

  bool operator==(const FrequencyLattice& other) const {
    return dim_ == other.dim_ && cutoff_ == other.cutoff_;
  }

 private:
  int dim_;
  int cutoff_;
  int side_;
  LatticeIndex size_;
  int max_energy_ = 0;
  std::vector<Frequency> coords_;
  std::vector<int> energy_;
  std::vector<double> bracket_;
  std::vector<LatticeIndex> combine_table_;  // empty when F^3 is too large

  mutable std::mutex table_mutex_;
  mutable std::vector<std::shared_ptr<const std::vector<std::int32_t>>> energy_tables_;
};

using LatticePtr = std::shared_ptr<const FrequencyLattice>;

LatticePtr build_lattice(int dim, int cutoff);

}  // namespace gph
