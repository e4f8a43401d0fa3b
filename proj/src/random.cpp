#include "gph/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "gph/parallel.hpp"

namespace gph {

std::optional<std::uint64_t> assignment_count(const FrequencyLattice& lattice, std::size_t levels) {
  const auto bits = static_cast<std::uint64_t>(lattice.size()) * levels;
  if (bits >= 63) return std::nullopt;
  return std::uint64_t{1} << bits;
}

SignField mc_field(const FrequencyLattice& lattice, std::uint64_t seed, std::uint64_t sample, int level) {
  const std::uint64_t stream = streams::mc ^ CounterRng::mix((sample << 8) ^ static_cast<std::uint64_t>(level));
  return sample_field(lattice, seed, stream);
}

FieldAssignment enumerated_assignment(const FrequencyLattice& lattice, const std::vector<int>& levels,
                                      std::uint64_t index) {
  const auto f = static_cast<unsigned>(lattice.size());
  const std::uint64_t mask = (std::uint64_t{1} << f) - 1;
  FieldAssignment out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.emplace(levels[i], SignField::from_bits(lattice, (index >> (i * f)) & mask));
  }
  return out;
}

OmegaMean omega_mean(const FrequencyLattice& lattice, const std::vector<int>& levels, const OmegaSpec& spec,
                     const std::function<std::vector<double>(const FieldAssignment&)>& statistic) {
  std::uint64_t count = 0;
  if (levels.empty()) {
    count = 1;
  } else if (spec.method == OmegaMethod::exact) {
    const auto n = assignment_count(lattice, levels.size());
    if (!n || *n > spec.enumeration_cap) {
      throw std::invalid_argument("exact enumeration over " + std::to_string(levels.size()) + " level(s) of 2^" +
                                  std::to_string(lattice.size()) + " fields exceeds the cap of " +
                                  std::to_string(spec.enumeration_cap) + " assignments");
    }
    count = *n;
  } else {
    if (spec.samples < 2) throw std::invalid_argument("Monte-Carlo estimates need at least two samples");
    count = spec.samples;
  }

  std::vector<std::vector<double>> results(count);
  parallel_for(count, [&](std::size_t i) {
    FieldAssignment fields;
    if (!levels.empty()) {
      if (spec.method == OmegaMethod::exact) {
        fields = enumerated_assignment(lattice, levels, i);
      } else {
        for (int level : levels) fields.emplace(level, mc_field(lattice, spec.seed, i, level));
      }
    }
    results[i] = statistic(fields);
  });

  const std::size_t width = results.front().size();
  OmegaMean out;
  out.count = count;
  out.method = levels.empty() ? OmegaMethod::exact : spec.method;
  out.mean.assign(width, 0.0);
  out.stderr_mean.assign(width, 0.0);
  for (const auto& r : results) {
    if (r.size() != width) throw std::logic_error("statistic returned vectors of varying length");
    for (std::size_t c = 0; c < width; ++c) out.mean[c] += r[c];
  }
  for (auto& m : out.mean) m /= static_cast<double>(count);
  if (out.method == OmegaMethod::mc) {
    for (std::size_t c = 0; c < width; ++c) {
      double ss = 0.0;
      for (const auto& r : results) ss += (r[c] - out.mean[c]) * (r[c] - out.mean[c]);
      const double var = ss / static_cast<double>(count - 1);
      out.stderr_mean[c] = std::sqrt(var / static_cast<double>(count));
    }
  }
  return out;
}

OmegaNormEstimate make_norm_estimate(double mean_square, double stderr_square, const OmegaSpec& spec,
                                     std::uint64_t count) {
  OmegaNormEstimate est;
  est.method = spec.method;
  est.mean_square = mean_square;
  est.value = std::sqrt(std::max(0.0, mean_square));
  if (spec.method == OmegaMethod::mc) {
    est.samples = count;
    est.stderr_square = stderr_square;
    est.stderr_value = est.value > 0.0 ? stderr_square / (2.0 * est.value) : 0.0;
  }
  return est;
}

OmegaNormEstimate omega_l2_h_alpha(const LatticePtr& lattice,
                                   const std::function<DensityMatrix(const FieldAssignment&)>& evaluator,
                                   const std::vector<int>& levels, double alpha, const OmegaSpec& spec) {
  const OmegaMean m = omega_mean(*lattice, levels, spec, [&](const FieldAssignment& fields) {
    return std::vector<double>{h_alpha_sqnorm(evaluator(fields), alpha)};
  });
  OmegaSpec effective = spec;
  effective.method = m.method;
  return make_norm_estimate(m.mean[0], m.stderr_mean[0], effective, m.count);
}

DensityMatrix random_density(const LatticePtr& lattice, int order, std::uint64_t seed, std::size_t nnz) {
  const std::uint64_t space = dense_size(lattice->size(), order);
  const std::uint64_t stream = streams::tensor ^ static_cast<std::uint64_t>(order);
  auto value = [&](std::uint64_t c) {
    return cplx(CounterRng::normal(seed, stream, 2 * c), CounterRng::normal(seed, stream, 2 * c + 1));
  };
  if (nnz == 0 || nnz >= space) {
    DensityMatrix out(lattice, order, Storage::dense);
    auto data = out.dense_data();
    for (std::uint64_t k = 0; k < space; ++k) data[k] = value(k);
    return out.to_storage(DensityMatrix::preferred_storage(*lattice, order));
  }
  std::unordered_set<TensorKey> seen;
  std::vector<SparseEntry> entries;
  for (std::uint64_t c = 0; entries.size() < nnz; ++c) {
    const TensorKey key = CounterRng::bits(seed, stream ^ streams::sampler, c) % space;
    if (!seen.insert(key).second) continue;
    entries.push_back({key, value(entries.size())});
  }
  return DensityMatrix::from_entries(lattice, order, std::move(entries));
}

HierarchyState random_hierarchy(const LatticePtr& lattice, const std::vector<double>& norms, double alpha,
                                std::uint64_t seed, const std::function<std::size_t(int)>& nnz_for_level) {
  HierarchyState state(lattice, static_cast<int>(norms.size()));
  for (int k = 1; k <= static_cast<int>(norms.size()); ++k) {
    if (norms[k - 1] == 0.0) continue;
    DensityMatrix g = random_density(lattice, k, CounterRng::mix(seed + static_cast<std::uint64_t>(k)),
                                     nnz_for_level ? nnz_for_level(k) : 0);
    g *= norms[k - 1] / h_alpha_norm(g, alpha);
    state.set_level(k, std::move(g));
  }
  return state;
}

namespace {

DensityMatrix b_ln(const DensityMatrix& gamma, int l, int n, const SignField* field) {
  DensityMatrix out = collision(gamma, l, n, CollisionSign::plus, field);
  out -= collision(gamma, l, n, CollisionSign::minus, field);
  return out;
}

}  // namespace

Eigen::MatrixXd materialize_collision(const LatticePtr& lattice, int order, int l, int n, double alpha,
                                      bool randomized) {
  const std::uint64_t cols = dense_size(lattice->size(), order);
  if (cols > 4096) throw std::invalid_argument("operator materialization is limited to domains of 4096 slots");
  const std::uint64_t out_size = dense_size(lattice->size(), order - 1);
  std::uint64_t blocks = 1;
  if (randomized) {
    const auto count = assignment_count(*lattice, 1);
    if (!count || *count > 4096) throw std::invalid_argument("too many sign fields to materialize");
    blocks = *count;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(blocks * out_size), static_cast<Eigen::Index>(cols));
  const double block_weight = 1.0 / std::sqrt(static_cast<double>(blocks));
  for (std::uint64_t b = 0; b < blocks; ++b) {
    std::optional<SignField> field;
    if (randomized) field = SignField::from_bits(*lattice, b);
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double w_in = sobolev_weight(*lattice, order, c, alpha);
      const DensityMatrix unit = DensityMatrix::from_entries(lattice, order, {{c, cplx(1.0)}});
      const DensityMatrix image = b_ln(unit, l, n, field ? &*field : nullptr);
      image.for_each_nonzero([&](TensorKey o, cplx v) {
        const double w_out = sobolev_weight(*lattice, order - 1, o, alpha);
        a(static_cast<Eigen::Index>(b * out_size + o), static_cast<Eigen::Index>(c)) =
            block_weight * w_out * v.real() / w_in;
      });
    }
  }
  return a;
}

OperatorNorm exact_collision_norm(const LatticePtr& lattice, int order, int l, int n, double alpha, bool randomized) {
  const Eigen::MatrixXd a = materialize_collision(lattice, order, l, n, alpha, randomized);
  OperatorNorm out;
  out.rows = static_cast<std::size_t>(a.rows());
  out.cols = static_cast<std::size_t>(a.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  out.value = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return out;
}

OperatorNorm level_collision_norm(const LatticePtr& lattice, double alpha, bool randomized) {
  return exact_collision_norm(lattice, 2, 1, 2, alpha, randomized);
}

C0Estimate estimate_c0(const LatticePtr& lattice, int k, int j, double alpha, int trials, std::uint64_t seed,
                       const OmegaSpec& spec) {
  if (k < 1 || j < 1 || j > k) throw std::invalid_argument("estimate_c0 needs 1 <= j <= k");
  C0Estimate out;
  const int order = k + 1;
  const bool dense_ok = dense_size(lattice->size(), order) <= storage_policy().memory_guard / 16;
  for (int trial = 0; trial < trials; ++trial) {
    const DensityMatrix gamma =
        random_density(lattice, order, CounterRng::mix(seed ^ static_cast<std::uint64_t>(trial)), dense_ok ? 0 : 256);
    const auto est = omega_l2_h_alpha(
        lattice, [&](const FieldAssignment& f) { return b_ln(gamma, j, order, &f.at(order)); }, {order}, alpha, spec);
    const double ratio = est.value / h_alpha_norm(gamma, alpha);
    out.ratios.push_back(ratio);
    out.empirical = std::max(out.empirical, ratio);
  }
  if (dense_size(lattice->size(), order) <= 4096) out.exact = exact_collision_norm(lattice, order, j, order, alpha, true);
  return out;
}

}  // namespace gph
