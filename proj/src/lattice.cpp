#include "gph/lattice.hpp"

#include <cmath>
#include <sstream>

#include "gph/tensor_index.hpp"

namespace gph {

namespace {
constexpr std::int64_t kCombineTableLimit = std::int64_t{1} << 22;
}

std::string to_string(const Frequency& z, int dim) {
  std::ostringstream out;
  if (dim == 1) {
    out << z[0];
    return out.str();
  }
  out << '(';
  for (int i = 0; i < dim; ++i) {
    if (i) out << ',';
    out << z[static_cast<std::size_t>(i)];
  }
  out << ')';
  return out.str();
}

FrequencyLattice::FrequencyLattice(int dim, int cutoff) : dim_(dim), cutoff_(cutoff), side_(2 * cutoff + 1) {
  if (dim < 1 || dim > kMaxDim) {
    throw LatticeError("lattice dimension must be in 1..3, got " + std::to_string(dim));
  }
  if (cutoff < 1) {
    throw LatticeError("lattice cutoff must be >= 1, got " + std::to_string(cutoff));
  }
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= side_;
  if (total > (std::int64_t{1} << 30)) throw LatticeError("lattice too large");
  size_ = static_cast<LatticeIndex>(total);

  coords_.resize(static_cast<std::size_t>(size_));
  energy_.resize(static_cast<std::size_t>(size_));
  bracket_.resize(static_cast<std::size_t>(size_));
  for (LatticeIndex i = 0; i < size_; ++i) {
    Frequency z{};
    LatticeIndex rest = i;
    for (int c = dim - 1; c >= 0; --c) {
      z[static_cast<std::size_t>(c)] = rest % side_ - cutoff;
      rest /= side_;
    }
    const auto u = static_cast<std::size_t>(i);
    coords_[u] = z;
    energy_[u] = squared_modulus(z);
    bracket_[u] = std::sqrt(1.0 + energy_[u]);
    max_energy_ = std::max(max_energy_, energy_[u]);
  }

  if (total * total * total <= kCombineTableLimit) {
    const auto f = static_cast<std::size_t>(size_);
    combine_table_.resize(f * f * f);
    for (LatticeIndex a = 0; a < size_; ++a)
      for (LatticeIndex b = 0; b < size_; ++b)
        for (LatticeIndex c = 0; c < size_; ++c) {
          const auto z = combine(freq_of(a), freq_of(b), freq_of(c));
          combine_table_[(static_cast<std::size_t>(a) * f + static_cast<std::size_t>(b)) * f +
                         static_cast<std::size_t>(c)] = z ? index_of(*z) : -1;
        }
  }
}

std::optional<LatticeIndex> FrequencyLattice::find(const Frequency& z) const {
  LatticeIndex idx = 0;
  for (int c = 0; c < kMaxDim; ++c) {
    const int v = z[static_cast<std::size_t>(c)];
    if (c >= dim_) {
      if (v != 0) return std::nullopt;
      continue;
    }
    if (v < -cutoff_ || v > cutoff_) return std::nullopt;
    idx = idx * side_ + (v + cutoff_);
  }
  return idx;
}

LatticeIndex FrequencyLattice::index_of(const Frequency& z) const {
  auto idx = find(z);
  if (!idx) throw LatticeError("frequency " + to_string(z, kMaxDim) + " is outside the lattice box");
  return *idx;
}

bool FrequencyLattice::contains(const Frequency& z) const { return find(z).has_value(); }

std::optional<Frequency> FrequencyLattice::combine(const Frequency& a, const Frequency& b,
                                                   const Frequency& c) const {
  Frequency out{};
  for (std::size_t i = 0; i < kMaxDim; ++i) out[i] = a[i] - b[i] + c[i];
  if (!contains(out)) return std::nullopt;
  return out;
}

LatticeIndex FrequencyLattice::combine_index(LatticeIndex a, LatticeIndex b, LatticeIndex c) const {
  if (!combine_table_.empty()) {
    const auto f = static_cast<std::size_t>(size_);
    return combine_table_[(static_cast<std::size_t>(a) * f + static_cast<std::size_t>(b)) * f +
                          static_cast<std::size_t>(c)];
  }
  const auto z = combine(freq_of(a), freq_of(b), freq_of(c));
  return z ? index_of(*z) : -1;
}

const std::vector<std::int32_t>& FrequencyLattice::energy_table(int order) const {
  std::lock_guard lock(table_mutex_);
  if (energy_tables_.size() <= static_cast<std::size_t>(order)) energy_tables_.resize(static_cast<std::size_t>(order) + 1);
  auto& slot = energy_tables_[static_cast<std::size_t>(order)];
  if (!slot) {
    const std::uint64_t n = dense_size(size_, order);
    auto table = std::make_shared<std::vector<std::int32_t>>(n);
    // Row-major build: the value of a prefix is extended by one trailing digit.
    std::vector<std::int32_t>& t = *table;
    t[0] = 0;
    std::uint64_t len = 1;
    for (int slot_no = 0; slot_no < 2 * order; ++slot_no) {
      const int sign = slot_no < order ? 1 : -1;
      for (std::uint64_t p = len; p-- > 0;) {
        const std::int32_t base = t[p];
        for (LatticeIndex z = 0; z < size_; ++z)
          t[p * static_cast<std::uint64_t>(size_) + static_cast<std::uint64_t>(z)] = base + sign * energy(z);
      }
      len *= static_cast<std::uint64_t>(size_);
    }
    slot = std::move(table);
  }
  return *slot;
}

LatticePtr build_lattice(int dim, int cutoff) { return std::make_shared<const FrequencyLattice>(dim, cutoff); }

}  // namespace gph
