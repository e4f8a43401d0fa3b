#include "gph/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "gph/kernels.hpp"

namespace gph {

namespace {

/// exp(-i t E) for E in [-offset, offset], indexed by E + offset.
std::vector<cplx> phase_table(const FrequencyLattice& lattice, int order, double t, std::int32_t& offset) {
  offset = order * lattice.max_energy();
  std::vector<cplx> phases(static_cast<std::size_t>(2 * offset + 1));
  for (std::int32_t e = -offset; e <= offset; ++e) phases[e + offset] = std::polar(1.0, -t * e);
  return phases;
}

std::int32_t slot_energy(const FrequencyLattice& lattice, int order, std::span<const LatticeIndex> digits) {
  std::int32_t e = 0;
  for (int s = 0; s < order; ++s) e += lattice.energy(digits[s]) - lattice.energy(digits[order + s]);
  return e;
}

struct CollisionTerm {
  int l;  // 0-based
  int n;  // 0-based
  CollisionSign sign;
  double coef;
};

DensityMatrix scatter_collision(const DensityMatrix& gamma, std::span<const CollisionTerm> terms,
                                const SignField* field) {
  const int m = gamma.order();
  if (m < 2) throw std::invalid_argument("collision needs an input of order >= 2");
  const auto& lat = gamma.lattice();
  if (field && field->size() != static_cast<std::size_t>(lat.size())) {
    throw std::invalid_argument("sign field does not cover the lattice");
  }
  const int out_order = m - 1;
  const Storage storage = gamma.is_dense() ? Storage::dense : DensityMatrix::preferred_storage(lat, out_order);
  DensityMatrix out(gamma.lattice_ptr(), out_order, storage);
  SparseAccumulator acc;
  if (storage == Storage::sparse) acc.reserve(gamma.stored_size() * terms.size());
  const auto base = static_cast<TensorKey>(lat.size());

  std::array<LatticeIndex, kMaxSlots> digits{};
  std::array<LatticeIndex, kMaxSlots> od{};
  gamma.for_each_nonzero([&](TensorKey key, cplx v) {
    decode_key(key, lat.size(), 2 * m, digits);
    const LatticeIndex* u = digits.data();
    const LatticeIndex* p = digits.data() + m;
    for (const auto& t : terms) {
      LatticeIndex combined;
      double w = t.coef;
      if (t.sign == CollisionSign::plus) {
        combined = lat.combine_index(u[t.l], p[t.n], u[t.n]);
        if (combined < 0) continue;
        if (field) w *= field->h(combined) * field->h(u[t.l]) * field->h(u[t.n]) * field->h(p[t.n]);
      } else {
        combined = lat.combine_index(p[t.l], u[t.n], p[t.n]);
        if (combined < 0) continue;
        if (field) w *= field->h(combined) * field->h(p[t.l]) * field->h(u[t.n]) * field->h(p[t.n]);
      }
      int o = 0;
      for (int s = 0; s < m; ++s)
        if (s != t.n) od[o++] = (t.sign == CollisionSign::plus && s == t.l) ? combined : u[s];
      for (int s = 0; s < m; ++s)
        if (s != t.n) od[o++] = (t.sign == CollisionSign::minus && s == t.l) ? combined : p[s];
      TensorKey okey = 0;
      for (int s = 0; s < 2 * out_order; ++s) okey = okey * base + static_cast<TensorKey>(od[s]);
      const cplx c = w * v;
      if (storage == Storage::dense) out.dense_data()[okey] += c;
      else acc.add(okey, c);
    }
  });
  if (storage == Storage::sparse) return DensityMatrix::from_entries(gamma.lattice_ptr(), out_order, acc.finish());
  return out;
}

void require_finite(const HierarchyState& state, double t) {
  for (int k = 1; k <= state.k_max(); ++k) {
    const auto* g = state.level(k);
    if (!g) continue;
    bool ok = true;
    g->for_each_nonzero([&](TensorKey, cplx v) { ok = ok && std::isfinite(v.real()) && std::isfinite(v.imag()); });
    if (!ok) {
      std::ostringstream msg;
      msg << "non-finite coefficient at level " << k << " near t=" << t << " (check the step size)";
      throw DynamicsError(msg.str());
    }
  }
}

HierarchyState combine(const HierarchyState& a, double h, const HierarchyState& b) {
  HierarchyState out = a;
  out.axpy(h, b);
  return out;
}

/// Collision part of the interaction-picture derivative at time tau.
HierarchyState interaction_rhs(const HierarchyState& v, int N, const HierarchyMode& mode, double tau) {
  HierarchyState out(v.lattice_ptr(), v.k_max());
  for (int k = 1; k < N && k < v.k_max(); ++k) {
    const auto* next = v.level(k + 1);
    if (!next) continue;
    DensityMatrix b = full_collision(free_evolve(*next, tau), mode.field_for(k + 1));
    b = free_evolve(b, -tau);
    b *= cplx(0.0, -1.0);
    out.set_level(k, std::move(b));
  }
  return out;
}

HierarchyState to_interaction(const HierarchyState& s, double t) {
  HierarchyState out(s.lattice_ptr(), s.k_max());
  for (int k = 1; k <= s.k_max(); ++k)
    if (const auto* g = s.level(k)) out.set_level(k, free_evolve(*g, -t));
  return out;
}

}  // namespace

DensityMatrix free_evolve(const DensityMatrix& gamma, double t) {
  if (t == 0.0) return gamma;
  const auto& lat = gamma.lattice();
  const int k = gamma.order();
  std::int32_t offset = 0;
  const auto phases = phase_table(lat, k, t, offset);
  DensityMatrix out = gamma;
  if (gamma.is_dense()) {
    const auto& energy = lat.energy_table(k);
    kernels::phase_apply(out.dense_data(), gamma.dense_data(), energy, phases.data(), offset);
    return out;
  }
  std::vector<SparseEntry> entries;
  entries.reserve(gamma.sparse_entries().size());
  std::array<LatticeIndex, kMaxSlots> digits{};
  for (const auto& e : gamma.sparse_entries()) {
    decode_key(e.key, lat.size(), 2 * k, digits);
    entries.push_back({e.key, e.value * phases[slot_energy(lat, k, digits) + offset]});
  }
  return DensityMatrix::from_entries(gamma.lattice_ptr(), k, std::move(entries));
}

DensityMatrix dispersion_apply(const DensityMatrix& gamma) {
  const auto& lat = gamma.lattice();
  const int k = gamma.order();
  DensityMatrix out = gamma;
  if (gamma.is_dense()) {
    const auto& energy = lat.energy_table(k);
    auto data = out.dense_data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= static_cast<double>(energy[i]);
    return out;
  }
  std::vector<SparseEntry> entries;
  std::array<LatticeIndex, kMaxSlots> digits{};
  for (const auto& e : gamma.sparse_entries()) {
    decode_key(e.key, lat.size(), 2 * k, digits);
    entries.push_back({e.key, e.value * static_cast<double>(slot_energy(lat, k, digits))});
  }
  return DensityMatrix::from_entries(gamma.lattice_ptr(), k, std::move(entries));
}

DensityMatrix collision(const DensityMatrix& gamma, int l, int n, CollisionSign sign, const SignField* field) {
  if (!(1 <= l && l < n && n <= gamma.order())) {
    throw std::invalid_argument("collision positions need 1 <= l < n <= order (got l=" + std::to_string(l) +
                                ", n=" + std::to_string(n) + ", order=" + std::to_string(gamma.order()) + ")");
  }
  const CollisionTerm term{l - 1, n - 1, sign, 1.0};
  return scatter_collision(gamma, std::span<const CollisionTerm>(&term, 1), field);
}

DensityMatrix full_collision(const DensityMatrix& gamma, const SignField* field) {
  const int m = gamma.order();
  if (m < 2) throw std::invalid_argument("full collision needs an input of order >= 2");
  std::vector<CollisionTerm> terms;
  for (int j = 0; j < m - 1; ++j) {
    terms.push_back({j, m - 1, CollisionSign::plus, 1.0});
    terms.push_back({j, m - 1, CollisionSign::minus, -1.0});
  }
  return scatter_collision(gamma, terms, field);
}

HierarchyMode HierarchyMode::dependent(SignField field) {
  HierarchyMode m(Kind::dependent);
  m.fields_.emplace(0, std::move(field));
  return m;
}

HierarchyMode HierarchyMode::independent(std::map<int, SignField> fields) {
  HierarchyMode m(Kind::independent);
  m.fields_ = std::move(fields);
  return m;
}

const SignField* HierarchyMode::field_for(int order) const {
  switch (kind_) {
    case Kind::deterministic:
      return nullptr;
    case Kind::dependent:
      return &fields_.at(0);
    case Kind::independent: {
      auto it = fields_.find(order);
      if (it == fields_.end()) {
        throw std::invalid_argument("independent mode has no sign field for level " + std::to_string(order));
      }
      return &it->second;
    }
  }
  return nullptr;
}

std::string_view mode_name(HierarchyMode::Kind kind) {
  switch (kind) {
    case HierarchyMode::Kind::deterministic:
      return "deterministic";
    case HierarchyMode::Kind::dependent:
      return "dependent";
    case HierarchyMode::Kind::independent:
      return "independent";
  }
  return "?";
}

HierarchyState hierarchy_rhs(const HierarchyState& state, int N, const HierarchyMode& mode) {
  if (N < 1) throw std::invalid_argument("truncation level N must be >= 1");
  HierarchyState out(state.lattice_ptr(), state.k_max());
  const cplx minus_i(0.0, -1.0);
  for (int k = 1; k <= std::min(N, state.k_max()); ++k) {
    const auto* g = state.level(k);
    const auto* next = k < N ? state.level(k + 1) : nullptr;
    if (!g && !next) continue;
    DensityMatrix d = g ? dispersion_apply(*g) : DensityMatrix::zeros(state.lattice_ptr(), k);
    if (next) d += full_collision(*next, mode.field_for(k + 1));
    d *= minus_i;
    out.set_level(k, std::move(d));
  }
  return out;
}

Picture resolve_picture(Picture requested, double horizon, const FrequencyLattice& lattice) {
  if (requested != Picture::automatic) return requested;
  return (horizon >= 0.1 || lattice.cutoff() >= 4) ? Picture::interaction : Picture::plain;
}

std::vector<HierarchyState> evolve_truncated(const HierarchyState& initial, int N, const TimeGrid& grid,
                                             const HierarchyMode& mode, const EvolveOptions& options) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (N < 1) throw std::invalid_argument("truncation level N must be >= 1");
  grid.validate();
  const Picture picture = resolve_picture(options.picture, grid.horizon, initial.lattice());

  HierarchyState state = project(initial, N, ProjectionSide::leq);
  std::vector<HierarchyState> out;
  out.reserve(grid.points.size());
  out.push_back(state);
  double t = 0.0;

  for (std::size_t g = 1; g < grid.points.size(); ++g) {
    const double target = grid.points[g];
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / options.dt - 1e-9)));
      const double h = span / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) {
        const double t0 = t + h * static_cast<double>(s);
        if (picture == Picture::plain) {
          const HierarchyState k1 = hierarchy_rhs(state, N, mode);
          const HierarchyState k2 = hierarchy_rhs(combine(state, h / 2, k1), N, mode);
          const HierarchyState k3 = hierarchy_rhs(combine(state, h / 2, k2), N, mode);
          const HierarchyState k4 = hierarchy_rhs(combine(state, h, k3), N, mode);
          state.axpy(h / 6, k1).axpy(h / 3, k2).axpy(h / 3, k3).axpy(h / 6, k4);
        } else {
          // V = U(-t) Gamma; only the collision coupling is stepped.
          HierarchyState v = to_interaction(state, t0);
          const HierarchyState k1 = interaction_rhs(v, N, mode, t0);
          const HierarchyState k2 = interaction_rhs(combine(v, h / 2, k1), N, mode, t0 + h / 2);
          const HierarchyState k3 = interaction_rhs(combine(v, h / 2, k2), N, mode, t0 + h / 2);
          const HierarchyState k4 = interaction_rhs(combine(v, h, k3), N, mode, t0 + h);
          v.axpy(h / 6, k1).axpy(h / 3, k2).axpy(h / 3, k3).axpy(h / 6, k4);
          state = to_interaction(v, -(t0 + h));
        }
        require_finite(state, t0 + h);
      }
      t = target;
    }
    out.push_back(state);
  }
  return out;
}

double continuity_exponent(double beta, double beta0) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(beta0 > beta)) throw std::invalid_argument("beta0 must exceed beta");
  return std::min(1.0, (beta0 - beta) / 2.0);
}

ContinuityDefect continuity_defect(const DensityMatrix& sigma, double t, double delta, double beta, double beta0) {
  const double r = continuity_exponent(beta, beta0);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  DensityMatrix diff = free_evolve(sigma, t + delta);
  diff -= free_evolve(sigma, t);
  ContinuityDefect out;
  out.r = r;
  out.lhs = h_alpha_norm(diff, beta);
  out.rhs = std::pow(2.0, 1.0 - r) * std::pow(delta, r) * h_alpha_norm(sigma, beta0);
  return out;
}

namespace {

struct SlotCheck {
  double lhs;
  double rhs;
};

SlotCheck check_slot(std::int64_t energy, double w, double r, double delta) {
  const double lhs = std::abs(std::exp(cplx(0.0, -delta * static_cast<double>(energy))) - 1.0);
  const double rhs = std::pow(2.0, 1.0 - r) * std::pow(delta, r) * std::pow(w, r);
  return {lhs, rhs};
}

void record(ContinuityScan& scan, const SlotCheck& c, std::uint64_t multiplicity) {
  scan.slots += multiplicity;
  if (c.lhs > c.rhs) scan.violations += multiplicity;
  if (c.rhs > 0.0) scan.worst_ratio = std::max(scan.worst_ratio, c.lhs / c.rhs);
}

}  // namespace

ContinuityScan scan_continuity(const FrequencyLattice& lattice, int order, double beta, double beta0, double delta) {
  const double r = continuity_exponent(beta, beta0);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  std::map<int, std::uint64_t> shell_count;
  for (LatticeIndex i = 0; i < lattice.size(); ++i) ++shell_count[lattice.energy(i)];
  std::vector<std::pair<int, std::uint64_t>> shells(shell_count.begin(), shell_count.end());

  const int slots = 2 * order;
  ContinuityScan scan;
  std::vector<std::size_t> pos(static_cast<std::size_t>(slots), 0);
  while (true) {
    std::int64_t energy = 0;
    double w = 1.0;
    std::uint64_t mult = 1;
    for (int s = 0; s < slots; ++s) {
      const auto& [shell, count] = shells[pos[s]];
      energy += s < order ? shell : -shell;
      w *= (1.0 + shell) * (1.0 + shell);
      mult *= count;
    }
    record(scan, check_slot(energy, w, r, delta), mult);
    int s = slots - 1;
    while (s >= 0 && ++pos[s] == shells.size()) pos[s--] = 0;
    if (s < 0) break;
  }
  return scan;
}

ContinuityScan scan_continuity_bruteforce(const FrequencyLattice& lattice, int order, double beta, double beta0,
                                          double delta) {
  const double r = continuity_exponent(beta, beta0);
  const std::uint64_t n = dense_size(lattice.size(), order);
  ContinuityScan scan;
  std::array<LatticeIndex, kMaxSlots> digits{};
  for (std::uint64_t key = 0; key < n; ++key) {
    decode_key(key, lattice.size(), 2 * order, digits);
    double w = 1.0;
    for (int s = 0; s < 2 * order; ++s) {
      const double b = 1.0 + lattice.energy(digits[s]);
      w *= b * b;
    }
    record(scan, check_slot(slot_energy(lattice, order, digits), w, r, delta), 1);
  }
  return scan;
}

}  // namespace gph
