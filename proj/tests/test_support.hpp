#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "gph/lattice.hpp"
#include "gph/random.hpp"
#include "gph/tensor.hpp"

namespace gph::test {

inline std::vector<cplx> random_vector(std::size_t n, std::uint64_t seed) {
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = {CounterRng::normal(seed, 11, 2 * i), CounterRng::normal(seed, 11, 2 * i + 1)};
  }
  return v;
}

inline Frequency add(const Frequency& a, const Frequency& b, int sign = 1) {
  return {a[0] + sign * b[0], a[1] + sign * b[1], a[2] + sign * b[2]};
}

/// Scatter form of B^{+/-}_{l,n}, written with frequency arithmetic and lattice membership only.
inline DensityMatrix collision_oracle(const DensityMatrix& gamma, int l, int n, bool plus, const SignField* field) {
  const auto& lat = gamma.lattice();
  const int m = gamma.order();
  const int s = 2 * m;
  DensityMatrix out(gamma.lattice_ptr(), m - 1, Storage::dense);
  std::vector<LatticeIndex> digits(static_cast<std::size_t>(s));
  std::vector<LatticeIndex> od(static_cast<std::size_t>(2 * (m - 1)));
  gamma.for_each_nonzero([&](TensorKey key, cplx v) {
    decode_key(key, lat.size(), s, digits);
    const auto u = [&](int pos) { return digits[static_cast<std::size_t>(pos - 1)]; };
    const auto p = [&](int pos) { return digits[static_cast<std::size_t>(m + pos - 1)]; };
    const LatticeIndex lside = plus ? u(l) : p(l);
    // Output slot l carries in_l + x_n - x'_n (plus) or in'_l - x_n + x'_n (minus).
    const Frequency moved =
        plus ? add(add(lat.freq_of(u(l)), lat.freq_of(u(n))), lat.freq_of(p(n)), -1)
             : add(add(lat.freq_of(p(l)), lat.freq_of(p(n))), lat.freq_of(u(n)), -1);
    const auto moved_idx = lat.find(moved);
    if (!moved_idx) return;
    double w = 1.0;
    if (field) w = field->h(lside) * field->h(*moved_idx) * field->h(u(n)) * field->h(p(n));
    std::size_t o = 0;
    for (int r = 1; r <= m; ++r)
      if (r != n) od[o++] = (plus && r == l) ? *moved_idx : u(r);
    for (int r = 1; r <= m; ++r)
      if (r != n) od[o++] = (!plus && r == l) ? *moved_idx : p(r);
    const TensorKey ok = encode_key(od, lat.size());
    out.set(ok, out.at(ok) + w * v);
  });
  return out;
}

}  // namespace gph::test
