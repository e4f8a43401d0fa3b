#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gph/dynamics.hpp"
#include "gph/sign_field.hpp"
#include "gph/tensor.hpp"

namespace gph {

/// Sign field per level, as handed to an evaluator.
using FieldAssignment = std::map<int, SignField>;

enum class OmegaMethod { exact, mc };

struct OmegaSpec {
  OmegaMethod method = OmegaMethod::exact;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  /// Largest number of joint sign assignments exact enumeration may visit.
  std::uint64_t enumeration_cap = std::uint64_t{1} << 20;
};

struct OmegaMean {
  std::vector<double> mean;
  /// Standard error of each mean; zeros for exact enumeration.
  std::vector<double> stderr_mean;
  std::uint64_t count = 0;
  OmegaMethod method = OmegaMethod::exact;
};

/// Joint assignments exact enumeration would visit, or nullopt past 2^63.
std::optional<std::uint64_t> assignment_count(const FrequencyLattice& lattice, std::size_t levels);

/// Field used by Monte-Carlo sample s at a level; streams are disjoint per (sample, level).
SignField mc_field(const FrequencyLattice& lattice, std::uint64_t seed, std::uint64_t sample, int level);

/// The exact-enumeration assignment with joint index `index` (F bits per level, lowest level first).
FieldAssignment enumerated_assignment(const FrequencyLattice& lattice, const std::vector<int>& levels,
                                      std::uint64_t index);

/**
 * Averages a vector-valued statistic over sign assignments on `levels`.
 *
 * Exact: uniform mean over all 2^(F |levels|) assignments. MC: sample mean
 * over `samples` independent draws. Per-assignment work runs in parallel and
 * is reduced in assignment order, so results do not depend on the thread count.
 */
OmegaMean omega_mean(const FrequencyLattice& lattice, const std::vector<int>& levels, const OmegaSpec& spec,
                     const std::function<std::vector<double>(const FieldAssignment&)>& statistic);

struct OmegaNormEstimate {
  double value = 0.0;
  OmegaMethod method = OmegaMethod::exact;
  std::uint64_t samples = 0;
  /// Mean of the squared norm.
  double mean_square = 0.0;
  /// Standard error of the squared-norm mean (mc only).
  std::optional<double> stderr_square;
  /// Delta-method standard error of value (mc only).
  std::optional<double> stderr_value;
};

OmegaNormEstimate make_norm_estimate(double mean_square, double stderr_square, const OmegaSpec& spec,
                                     std::uint64_t count);

/// sqrt(E ||evaluator(fields)||_{H^alpha}^2) over sign fields on `levels`.
OmegaNormEstimate omega_l2_h_alpha(const LatticePtr& lattice,
                                   const std::function<DensityMatrix(const FieldAssignment&)>& evaluator,
                                   const std::vector<int>& levels, double alpha, const OmegaSpec& spec);

/// Complex Gaussian coefficients; nnz == 0 fills every slot, otherwise nnz distinct random slots.
DensityMatrix random_density(const LatticePtr& lattice, int order, std::uint64_t seed, std::size_t nnz = 0);

/// Random levels 1..K with ||gamma^(k)||_{H^alpha} = norms[k-1].
HierarchyState random_hierarchy(const LatticePtr& lattice, const std::vector<double>& norms, double alpha,
                                std::uint64_t seed, const std::function<std::size_t(int)>& nnz_for_level);

/**
 * Matrix of gamma -> [B_{l,n}]^omega gamma from H^alpha(order m) into the
 * stacked space L^2(Omega) H^alpha(order m-1), in weighted coordinates.
 * Rows are (field, output slot) with weight 2^{-F/2}; columns are input slots.
 * Without randomization there is one block and no field signs.
 */
Eigen::MatrixXd materialize_collision(const LatticePtr& lattice, int order, int l, int n, double alpha,
                                      bool randomized);

struct OperatorNorm {
  double value = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Largest singular value of materialize_collision; domain limited to 4096 slots.
OperatorNorm exact_collision_norm(const LatticePtr& lattice, int order, int l, int n, double alpha, bool randomized);

/// Norm of [B_{l,n}]^omega on any order: spectator weights cancel, so it equals the order-2 kernel's norm.
OperatorNorm level_collision_norm(const LatticePtr& lattice, double alpha, bool randomized);

struct C0Estimate {
  /// Largest measured ratio ||[B]^omega gamma||_{L^2 H^alpha} / ||gamma||_{H^alpha}.
  double empirical = 0.0;
  std::vector<double> ratios;
  std::optional<OperatorNorm> exact;
};

/// Ratios for `trials` random order-(k+1) tensors under [B_{j,k+1}]^omega.
C0Estimate estimate_c0(const LatticePtr& lattice, int k, int j, double alpha, int trials, std::uint64_t seed,
                       const OmegaSpec& spec);

}  // namespace gph
