#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gph/lattice.hpp"
#include "gph/tensor_index.hpp"

namespace gph {

using cplx = std::complex<double>;

class TensorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MemoryGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process-wide storage rules. Set once at startup; read everywhere.
struct StoragePolicy {
  /// Largest dense tensor (in entries) that may ever be allocated.
  std::uint64_t memory_guard = std::uint64_t{1} << 28;
  /// Orders whose dense size is at most this are stored densely by default.
  std::uint64_t dense_threshold = 4096;
};

StoragePolicy& storage_policy();

enum class Storage { dense, sparse };

struct SparseEntry {
  TensorKey key;
  cplx value;
  bool operator==(const SparseEntry&) const = default;
};

/**
 * Fourier coefficients of an order-k density matrix on a truncated lattice.
 *
 * Coefficients are addressed by the row-major key of (xi_1..xi_k; xi'_1..xi'_k).
 * Dense storage holds all F^(2k) slots; sparse storage holds a key-sorted COO
 * list without duplicates. Value semantics throughout.
 */
class DensityMatrix {
 public:
  DensityMatrix(LatticePtr lattice, int order, Storage storage);

  /// Zero tensor in the storage preferred for this order.
  static DensityMatrix zeros(LatticePtr lattice, int order);
  /// Builds a sparse tensor; duplicate keys are an error, exact zeros are dropped.
  static DensityMatrix from_entries(LatticePtr lattice, int order, std::vector<SparseEntry> entries);
  static Storage preferred_storage(const FrequencyLattice& lattice, int order);

  int order() const { return order_; }
  int slots() const { return 2 * order_; }
  const FrequencyLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  Storage storage() const { return storage_; }
  bool is_dense() const { return storage_ == Storage::dense; }
  std::uint64_t key_space() const { return key_space_; }
  /// Stored entries: all slots when dense, the COO length when sparse.
  std::size_t stored_size() const { return is_dense() ? dense_.size() : sparse_.size(); }

  std::span<const cplx> dense_data() const { return dense_; }
  std::span<cplx> dense_data() { return dense_; }
  std::span<const SparseEntry> sparse_entries() const { return sparse_; }

  cplx at(TensorKey key) const;
  cplx at(std::span<const LatticeIndex> unprimed, std::span<const LatticeIndex> primed) const;
  TensorKey key_of(std::span<const LatticeIndex> unprimed, std::span<const LatticeIndex> primed) const;
  void set(TensorKey key, cplx value);

  DensityMatrix to_dense() const;
  DensityMatrix to_sparse() const;
  DensityMatrix to_storage(Storage storage) const;

  /// Visits (key, value) of every nonzero coefficient in key order.
  template <class Fn>
  void for_each_nonzero(Fn&& fn) const {
    if (is_dense()) {
      for (std::size_t i = 0; i < dense_.size(); ++i)
        if (dense_[i] != cplx{}) fn(static_cast<TensorKey>(i), dense_[i]);
    } else {
      for (const auto& e : sparse_) fn(e.key, e.value);
    }
  }

  std::size_t count_nonzero() const;
  bool is_zero() const;

  /// this += a * x
  DensityMatrix& axpy(cplx a, const DensityMatrix& x);
  DensityMatrix& operator+=(const DensityMatrix& x) { return axpy(1.0, x); }
  DensityMatrix& operator-=(const DensityMatrix& x) { return axpy(-1.0, x); }
  DensityMatrix& operator*=(cplx a);

  /// Coefficient-wise equality, independent of storage.
  bool equals(const DensityMatrix& other) const;

 private:
  void require_compatible(const DensityMatrix& x) const;

  LatticePtr lattice_;
  int order_;
  Storage storage_;
  std::uint64_t key_space_;
  std::vector<cplx> dense_;
  std::vector<SparseEntry> sparse_;
};

DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b);
DensityMatrix operator-(DensityMatrix a, const DensityMatrix& b);
DensityMatrix operator*(cplx s, DensityMatrix a);

/// Gathers (key, value) contributions and merges equal keys in insertion order.
class SparseAccumulator {
 public:
  void reserve(std::size_t n) { items_.reserve(n); }
  void add(TensorKey key, cplx value) { items_.push_back({key, value}); }
  std::size_t size() const { return items_.size(); }
  /// Sorted, merged entries; exact zeros are kept out.
  std::vector<SparseEntry> finish();

 private:
  std::vector<SparseEntry> items_;
};

/// Largest coefficient-wise modulus of a - b.
double max_abs_diff(const DensityMatrix& a, const DensityMatrix& b);

/// Weights prod_j <xi_j>^alpha prod_j <xi'_j>^alpha for every slot of a dense order-k tensor.
std::vector<double> sobolev_weights(const FrequencyLattice& lattice, int order, double alpha);
/// Weight of a single key.
double sobolev_weight(const FrequencyLattice& lattice, int order, TensorKey key, double alpha);

DensityMatrix sobolev_apply(const DensityMatrix& gamma, double alpha);
double h_alpha_sqnorm(const DensityMatrix& gamma, double alpha);
double h_alpha_norm(const DensityMatrix& gamma, double alpha);

/// Coefficients prod_j phi(xi_j) * prod_j conj(phi(xi'_j)).
DensityMatrix factorized(LatticePtr lattice, std::span<const cplx> phi, int order);

/// Finite sequence (gamma^(1), ..., gamma^(K)) sharing one lattice; absent levels are zero.
class HierarchyState {
 public:
  HierarchyState(LatticePtr lattice, int k_max);

  int k_max() const { return static_cast<int>(levels_.size()); }
  const FrequencyLattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }

  /// nullptr for absent levels and for k outside 1..K_max.
  const DensityMatrix* level(int k) const;
  DensityMatrix* level(int k);
  DensityMatrix level_or_zero(int k) const;
  void set_level(int k, DensityMatrix gamma);
  void clear_level(int k);

  HierarchyState& axpy(cplx a, const HierarchyState& x);
  HierarchyState& operator*=(cplx a);
  bool equals(const HierarchyState& other) const;

 private:
  LatticePtr lattice_;
  std::vector<std::optional<DensityMatrix>> levels_;
};

/// sum_k xi^k ||gamma^(k)||_{H^alpha}
double hxi_norm(const HierarchyState& state, double alpha, double xi);

enum class ProjectionSide { leq, gt };
HierarchyState project(const HierarchyState& state, int level, ProjectionSide side);

/// Sample times 0 = t_0 <= ... <= t_n = T.
struct TimeGrid {
  double horizon = 0.0;
  std::vector<double> points;

  static TimeGrid uniform(double horizon, int count);
  void validate() const;
};

}  // namespace gph
