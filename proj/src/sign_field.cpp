#include "gph/sign_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gph {

double CounterRng::normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform(seed, stream, 2 * counter);
  const double u2 = uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SignField SignField::all_plus(const FrequencyLattice& lattice) {
  SignField f;
  f.values_.assign(static_cast<std::size_t>(lattice.size()), 1);
  return f;
}

SignField SignField::from_bits(const FrequencyLattice& lattice, std::uint64_t bits) {
  if (lattice.size() > 64) throw std::invalid_argument("bit-pattern sign fields need F <= 64");
  SignField f;
  f.values_.resize(static_cast<std::size_t>(lattice.size()));
  for (LatticeIndex i = 0; i < lattice.size(); ++i) f.values_[i] = ((bits >> i) & 1U) ? -1 : 1;
  return f;
}

SignField SignField::from_values(std::vector<std::int8_t> values) {
  for (auto v : values)
    if (v != 1 && v != -1) throw std::invalid_argument("sign field values must be +1 or -1");
  SignField f;
  f.values_ = std::move(values);
  return f;
}

SignField sample_field(const FrequencyLattice& lattice, std::uint64_t seed, std::uint64_t stream) {
  SignField f;
  f.values_.resize(static_cast<std::size_t>(lattice.size()));
  for (LatticeIndex i = 0; i < lattice.size(); ++i) {
    const std::uint64_t b = CounterRng::bits(seed, streams::field ^ stream, static_cast<std::uint64_t>(i));
    f.values_[i] = (b >> 63) ? -1 : 1;
  }
  f.seed_ = seed;
  f.stream_ = stream;
  f.seeded_ = true;
  return f;
}

std::vector<std::complex<double>> randomize_function(std::span<const std::complex<double>> f, const SignField& field) {
  if (f.size() != field.size()) throw std::invalid_argument("function and sign field live on different lattices");
  std::vector<std::complex<double>> out(f.begin(), f.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= field.h(static_cast<LatticeIndex>(i));
  return out;
}

}  // namespace gph
