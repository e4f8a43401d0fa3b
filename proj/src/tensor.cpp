#include "gph/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gph/kernels.hpp"

namespace gph {

StoragePolicy& storage_policy() {
  static StoragePolicy policy;
  return policy;
}

namespace {

std::uint64_t guarded_dense_size(const FrequencyLattice& lattice, int order) {
  const std::uint64_t n = dense_size(lattice.size(), order);
  if (n > storage_policy().memory_guard) {
    throw MemoryGuardError("dense order-" + std::to_string(order) + " tensor needs " + std::to_string(n) +
                           " entries, above the memory guard of " +
                           std::to_string(storage_policy().memory_guard));
  }
  return n;
}

std::vector<SparseEntry> merge_sorted(const std::vector<SparseEntry>& y, cplx a, const std::vector<SparseEntry>& x) {
  std::vector<SparseEntry> out;
  out.reserve(y.size() + x.size());
  std::size_t i = 0, j = 0;
  while (i < y.size() || j < x.size()) {
    if (j == x.size() || (i < y.size() && y[i].key < x[j].key)) {
      out.push_back(y[i++]);
    } else if (i == y.size() || x[j].key < y[i].key) {
      const cplx v = a * x[j].value;
      if (v != cplx{}) out.push_back({x[j].key, v});
      ++j;
    } else {
      const cplx v = y[i].value + a * x[j].value;
      if (v != cplx{}) out.push_back({y[i].key, v});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

DensityMatrix::DensityMatrix(LatticePtr lattice, int order, Storage storage)
    : lattice_(std::move(lattice)), order_(order), storage_(storage) {
  if (!lattice_) throw TensorError("density matrix needs a lattice");
  if (order < 1 || 2 * order > kMaxSlots) throw TensorError("density matrix order out of range: " + std::to_string(order));
  key_space_ = dense_size(lattice_->size(), order);
  if (storage == Storage::dense) dense_.assign(guarded_dense_size(*lattice_, order), cplx{});
}

Storage DensityMatrix::preferred_storage(const FrequencyLattice& lattice, int order) {
  const auto f = static_cast<double>(lattice.size());
  const double n = std::pow(f, 2.0 * order);
  return n <= static_cast<double>(storage_policy().dense_threshold) ? Storage::dense : Storage::sparse;
}

DensityMatrix DensityMatrix::zeros(LatticePtr lattice, int order) {
  const Storage s = preferred_storage(*lattice, order);
  return DensityMatrix(std::move(lattice), order, s);
}

DensityMatrix DensityMatrix::from_entries(LatticePtr lattice, int order, std::vector<SparseEntry> entries) {
  DensityMatrix out(std::move(lattice), order, Storage::sparse);
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].key >= out.key_space_) throw TensorError("coefficient key outside the tensor key space");
    if (i > 0 && entries[i].key == entries[i - 1].key) {
      throw TensorError("duplicate index tuple at key " + std::to_string(entries[i].key));
    }
  }
  std::erase_if(entries, [](const SparseEntry& e) { return e.value == cplx{}; });
  out.sparse_ = std::move(entries);
  return out;
}

cplx DensityMatrix::at(TensorKey key) const {
  if (key >= key_space_) throw TensorError("coefficient key outside the tensor key space");
  if (is_dense()) return dense_[key];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), key,
                             [](const SparseEntry& e, TensorKey k) { return e.key < k; });
  return (it != sparse_.end() && it->key == key) ? it->value : cplx{};
}

TensorKey DensityMatrix::key_of(std::span<const LatticeIndex> unprimed, std::span<const LatticeIndex> primed) const {
  if (static_cast<int>(unprimed.size()) != order_ || static_cast<int>(primed.size()) != order_) {
    throw TensorError("index tuple arity does not match tensor order");
  }
  std::array<LatticeIndex, kMaxSlots> digits{};
  for (int j = 0; j < order_; ++j) {
    digits[j] = unprimed[j];
    digits[order_ + j] = primed[j];
  }
  for (int s = 0; s < 2 * order_; ++s) {
    if (digits[s] < 0 || digits[s] >= lattice_->size()) throw TensorError("lattice index out of range");
  }
  return encode_key(std::span<const LatticeIndex>(digits.data(), 2 * order_), lattice_->size());
}

cplx DensityMatrix::at(std::span<const LatticeIndex> unprimed, std::span<const LatticeIndex> primed) const {
  return at(key_of(unprimed, primed));
}

void DensityMatrix::set(TensorKey key, cplx value) {
  if (key >= key_space_) throw TensorError("coefficient key outside the tensor key space");
  if (is_dense()) {
    dense_[key] = value;
    return;
  }
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), key,
                             [](const SparseEntry& e, TensorKey k) { return e.key < k; });
  if (it != sparse_.end() && it->key == key) {
    if (value == cplx{}) sparse_.erase(it);
    else it->value = value;
  } else if (value != cplx{}) {
    sparse_.insert(it, SparseEntry{key, value});
  }
}

DensityMatrix DensityMatrix::to_dense() const {
  if (is_dense()) return *this;
  DensityMatrix out(lattice_, order_, Storage::dense);
  for (const auto& e : sparse_) out.dense_[e.key] = e.value;
  return out;
}

DensityMatrix DensityMatrix::to_sparse() const {
  if (!is_dense()) return *this;
  DensityMatrix out(lattice_, order_, Storage::sparse);
  for_each_nonzero([&](TensorKey k, cplx v) { out.sparse_.push_back({k, v}); });
  return out;
}

DensityMatrix DensityMatrix::to_storage(Storage storage) const {
  return storage == Storage::dense ? to_dense() : to_sparse();
}

std::size_t DensityMatrix::count_nonzero() const {
  std::size_t n = 0;
  for_each_nonzero([&](TensorKey, cplx) { ++n; });
  return n;
}

bool DensityMatrix::is_zero() const { return count_nonzero() == 0; }

void DensityMatrix::require_compatible(const DensityMatrix& x) const {
  if (x.order_ != order_) throw TensorError("order mismatch between density matrices");
  if (!(*x.lattice_ == *lattice_)) throw TensorError("lattice mismatch between density matrices");
}

DensityMatrix& DensityMatrix::axpy(cplx a, const DensityMatrix& x) {
  require_compatible(x);
  if (a == cplx{}) return *this;
  if (!is_dense() && (x.is_dense() || preferred_storage(*lattice_, order_) == Storage::dense)) {
    *this = to_dense();
  }
  if (is_dense()) {
    if (x.is_dense()) {
      kernels::caxpy(dense_, a, x.dense_);
    } else {
      for (const auto& e : x.sparse_) dense_[e.key] += a * e.value;
    }
  } else {
    sparse_ = merge_sorted(sparse_, a, x.sparse_);
  }
  return *this;
}

DensityMatrix& DensityMatrix::operator*=(cplx a) {
  if (is_dense()) {
    for (auto& v : dense_) v *= a;
  } else if (a == cplx{}) {
    sparse_.clear();
  } else {
    for (auto& e : sparse_) e.value *= a;
    std::erase_if(sparse_, [](const SparseEntry& e) { return e.value == cplx{}; });
  }
  return *this;
}

bool DensityMatrix::equals(const DensityMatrix& other) const {
  if (other.order_ != order_ || !(*other.lattice_ == *lattice_)) return false;
  if (is_dense() && other.is_dense()) return dense_ == other.dense_;
  return to_sparse().sparse_ == other.to_sparse().sparse_;
}

DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b) { return a += b; }
DensityMatrix operator-(DensityMatrix a, const DensityMatrix& b) { return a -= b; }
DensityMatrix operator*(cplx s, DensityMatrix a) { return a *= s; }

std::vector<SparseEntry> SparseAccumulator::finish() {
  std::stable_sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  std::vector<SparseEntry> out;
  for (const auto& e : items_) {
    if (!out.empty() && out.back().key == e.key) out.back().value += e.value;
    else out.push_back(e);
  }
  std::erase_if(out, [](const SparseEntry& e) { return e.value == cplx{}; });
  items_.clear();
  return out;
}

double max_abs_diff(const DensityMatrix& a, const DensityMatrix& b) {
  const DensityMatrix d = a - b;
  double m = 0.0;
  d.for_each_nonzero([&](TensorKey, cplx v) { m = std::max(m, std::abs(v)); });
  return m;
}

std::vector<double> sobolev_weights(const FrequencyLattice& lattice, int order, double alpha) {
  const auto f = static_cast<std::size_t>(lattice.size());
  std::vector<double> single(f);
  for (std::size_t i = 0; i < f; ++i) single[i] = std::pow(lattice.bracket(static_cast<LatticeIndex>(i)), alpha);
  const std::uint64_t n = guarded_dense_size(lattice, order);
  std::vector<double> w(n);
  w[0] = 1.0;
  std::size_t len = 1;
  // Extend the table one trailing slot at a time, from the back so prefixes are read before being overwritten.
  for (int s = 0; s < 2 * order; ++s) {
    for (std::size_t p = len; p-- > 0;) {
      const double base = w[p];
      for (std::size_t i = 0; i < f; ++i) w[p * f + i] = base * single[i];
    }
    len *= f;
  }
  return w;
}

double sobolev_weight(const FrequencyLattice& lattice, int order, TensorKey key, double alpha) {
  std::array<LatticeIndex, kMaxSlots> digits{};
  decode_key(key, lattice.size(), 2 * order, digits);
  double w = 1.0;
  for (int s = 0; s < 2 * order; ++s) w *= lattice.bracket(digits[s]);
  return std::pow(w, alpha);
}

DensityMatrix sobolev_apply(const DensityMatrix& gamma, double alpha) {
  DensityMatrix out = gamma;
  if (alpha == 0.0) return out;
  if (out.is_dense()) {
    const auto w = sobolev_weights(gamma.lattice(), gamma.order(), alpha);
    kernels::scale_real(out.dense_data(), w);
    return out;
  }
  std::vector<SparseEntry> entries;
  entries.reserve(gamma.sparse_entries().size());
  for (const auto& e : gamma.sparse_entries()) {
    entries.push_back({e.key, e.value * sobolev_weight(gamma.lattice(), gamma.order(), e.key, alpha)});
  }
  return DensityMatrix::from_entries(gamma.lattice_ptr(), gamma.order(), std::move(entries));
}

double h_alpha_sqnorm(const DensityMatrix& gamma, double alpha) {
  if (gamma.is_dense()) {
    if (alpha == 0.0) return kernels::sqnorm(gamma.dense_data());
    const auto w = sobolev_weights(gamma.lattice(), gamma.order(), 2.0 * alpha);
    return kernels::weighted_sqnorm(gamma.dense_data(), w);
  }
  double acc = 0.0;
  for (const auto& e : gamma.sparse_entries()) {
    const double w = alpha == 0.0 ? 1.0 : sobolev_weight(gamma.lattice(), gamma.order(), e.key, 2.0 * alpha);
    acc += w * std::norm(e.value);
  }
  return acc;
}

double h_alpha_norm(const DensityMatrix& gamma, double alpha) { return std::sqrt(h_alpha_sqnorm(gamma, alpha)); }

DensityMatrix factorized(LatticePtr lattice, std::span<const cplx> phi, int order) {
  if (static_cast<LatticeIndex>(phi.size()) != lattice->size()) {
    throw TensorError("coefficient vector length does not match the lattice");
  }
  const auto f = phi.size();
  std::vector<cplx> conj_phi(f);
  for (std::size_t i = 0; i < f; ++i) conj_phi[i] = std::conj(phi[i]);

  std::vector<LatticeIndex> support;
  for (std::size_t i = 0; i < f; ++i)
    if (phi[i] != cplx{}) support.push_back(static_cast<LatticeIndex>(i));

  const Storage pref = DensityMatrix::preferred_storage(*lattice, order);
  const double support_count = std::pow(static_cast<double>(support.size()), 2.0 * order);
  const bool dense = pref == Storage::dense ||
                     support_count > 0.25 * static_cast<double>(dense_size(lattice->size(), order));
  DensityMatrix out(lattice, order, dense ? Storage::dense : Storage::sparse);
  if (support.empty()) return out;

  const int slots = 2 * order;
  if (dense) {
    auto data = out.dense_data();
    data[0] = 1.0;
    std::size_t len = 1;
    for (int s = 0; s < slots; ++s) {
      const auto& factor = s < order ? std::span<const cplx>(phi) : std::span<const cplx>(conj_phi);
      for (std::size_t p = len; p-- > 0;) {
        const cplx base = data[p];
        for (std::size_t i = 0; i < f; ++i) data[p * f + i] = base * factor[i];
      }
      len *= f;
    }
    return out;
  }
  // Odometer over support^(2k); keys come out increasing because support is sorted.
  std::vector<SparseEntry> entries;
  std::array<std::size_t, kMaxSlots> pos{};
  std::array<LatticeIndex, kMaxSlots> digits{};
  while (true) {
    cplx v = 1.0;
    for (int s = 0; s < slots; ++s) {
      digits[s] = support[pos[s]];
      v *= s < order ? phi[digits[s]] : conj_phi[digits[s]];
    }
    entries.push_back({encode_key(std::span<const LatticeIndex>(digits.data(), slots), lattice->size()), v});
    int s = slots - 1;
    while (s >= 0 && ++pos[s] == support.size()) pos[s--] = 0;
    if (s < 0) break;
  }
  return DensityMatrix::from_entries(std::move(lattice), order, std::move(entries));
}

HierarchyState::HierarchyState(LatticePtr lattice, int k_max) : lattice_(std::move(lattice)) {
  if (!lattice_) throw TensorError("hierarchy needs a lattice");
  if (k_max < 1) throw TensorError("hierarchy needs K_max >= 1");
  levels_.resize(static_cast<std::size_t>(k_max));
}

const DensityMatrix* HierarchyState::level(int k) const {
  if (k < 1 || k > k_max()) return nullptr;
  const auto& slot = levels_[static_cast<std::size_t>(k - 1)];
  return slot ? &*slot : nullptr;
}

DensityMatrix* HierarchyState::level(int k) {
  if (k < 1 || k > k_max()) return nullptr;
  auto& slot = levels_[static_cast<std::size_t>(k - 1)];
  return slot ? &*slot : nullptr;
}

DensityMatrix HierarchyState::level_or_zero(int k) const {
  if (const auto* g = level(k)) return *g;
  return DensityMatrix::zeros(lattice_, k);
}

void HierarchyState::set_level(int k, DensityMatrix gamma) {
  if (k < 1 || k > k_max()) throw TensorError("level " + std::to_string(k) + " outside 1..K_max");
  if (gamma.order() != k) throw TensorError("level " + std::to_string(k) + " entry must have order " + std::to_string(k));
  if (!(gamma.lattice() == *lattice_)) throw TensorError("hierarchy levels must share one lattice");
  levels_[static_cast<std::size_t>(k - 1)] = std::move(gamma);
}

void HierarchyState::clear_level(int k) {
  if (k >= 1 && k <= k_max()) levels_[static_cast<std::size_t>(k - 1)].reset();
}

HierarchyState& HierarchyState::axpy(cplx a, const HierarchyState& x) {
  if (!(x.lattice() == *lattice_)) throw TensorError("hierarchy lattice mismatch");
  for (int k = 1; k <= x.k_max(); ++k) {
    const auto* xk = x.level(k);
    if (!xk) continue;
    if (k > k_max()) throw TensorError("hierarchy axpy operand has levels beyond K_max");
    auto& slot = levels_[static_cast<std::size_t>(k - 1)];
    if (!slot) slot = DensityMatrix::zeros(lattice_, k);
    slot->axpy(a, *xk);
  }
  return *this;
}

HierarchyState& HierarchyState::operator*=(cplx a) {
  for (auto& slot : levels_)
    if (slot) *slot *= a;
  return *this;
}

bool HierarchyState::equals(const HierarchyState& other) const {
  if (!(other.lattice() == *lattice_)) return false;
  const int top = std::max(k_max(), other.k_max());
  for (int k = 1; k <= top; ++k) {
    const auto* a = level(k);
    const auto* b = other.level(k);
    if (!a && !b) continue;
    if (!a || !b) {
      if (!(a ? a->is_zero() : b->is_zero())) return false;
      continue;
    }
    if (!a->equals(*b)) return false;
  }
  return true;
}

double hxi_norm(const HierarchyState& state, double alpha, double xi) {
  if (!(xi > 0.0)) throw TensorError("sequence weight xi must be positive");
  double acc = 0.0;
  for (int k = 1; k <= state.k_max(); ++k) {
    if (const auto* g = state.level(k)) acc += std::pow(xi, k) * h_alpha_norm(*g, alpha);
  }
  return acc;
}

HierarchyState project(const HierarchyState& state, int level, ProjectionSide side) {
  if (level < 0) throw TensorError("projection level must be >= 0");
  HierarchyState out(state.lattice_ptr(), state.k_max());
  for (int k = 1; k <= state.k_max(); ++k) {
    const bool keep = side == ProjectionSide::leq ? k <= level : k > level;
    if (const auto* g = state.level(k); g && keep) out.set_level(k, *g);
  }
  return out;
}

TimeGrid TimeGrid::uniform(double horizon, int count) {
  if (count < 2) throw TensorError("time grid needs at least two points");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw TensorError("time horizon must be finite and >= 0");
  TimeGrid g;
  g.horizon = horizon;
  g.points.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g.points[i] = horizon * i / (count - 1);
  g.points.back() = horizon;
  return g;
}

void TimeGrid::validate() const {
  if (points.empty() || points.front() != 0.0 || points.back() != horizon) {
    throw TensorError("time grid must start at 0 and end at T");
  }
  if (!std::is_sorted(points.begin(), points.end())) throw TensorError("time grid points must be sorted");
}

}  // namespace gph
