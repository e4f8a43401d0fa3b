#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gph/duhamel.hpp"
#include "gph/expansion.hpp"
#include "gph/report.hpp"

namespace gph {

// Verification suites. Defaults reproduce the acceptance configuration; the
// CLI fills the same structs from an ExperimentConfig.

/// Random levels with H^alpha norm ratio^k, dense where the storage policy allows.
HierarchyState make_initial(const LatticePtr& lattice, int k_max, double ratio, double alpha, std::uint64_t seed,
                            int sparse_nnz);

/// Fields for a mode: one shared field (dependent) or one per level 2..k_max (independent).
HierarchyMode make_mode(HierarchyMode::Kind kind, const FrequencyLattice& lattice, int k_max, std::uint64_t seed);

struct OracleParams {
  int d = 1;
  int M = 2;
  int N = 4;
  double T = 0.1;
  int grid_points = 11;
  int q = 16;
  double dt = 1e-4;
  double alpha = 1.0;
  double level_ratio = 1.0;
  int sparse_nnz = 48;
  std::uint64_t seed = 1;
  std::vector<HierarchyMode::Kind> modes{HierarchyMode::Kind::deterministic, HierarchyMode::Kind::dependent,
                                         HierarchyMode::Kind::independent};
  double tolerance = 1e-5;
  double residual_tolerance = 1e-6;
  std::optional<HierarchyState> initial;
};

/// Duhamel series against the RK4 solution of the truncated hierarchy.
CheckRecord check_duhamel_oracle(const OracleParams& p);
/// Integral-equation residual of the truncated solution for k <= N-1.
CheckRecord check_integral_residual(const OracleParams& p);

struct RandomizedParams {
  int d = 1;
  int M = 1;
  int k = 1;
  double alpha = 1.0;
  int trials = 20;
  std::uint64_t mc_samples = 10000;
  double sigmas = 4.0;
  std::uint64_t seed = 1;
};

/// Exact enumeration vs Monte Carlo, and the exact operator norm against every ratio.
CheckRecord check_randomized_estimate(const RandomizedParams& p);

struct DecayParams {
  int d = 1;
  int M = 1;
  std::vector<int> ks{1, 2};
  int j_max = 3;
  std::vector<double> times{0.5, 1.0};
  int seeds = 2;
  int q = 8;
  double alpha = 1.0;
  double level_ratio = 1.0;
  int sparse_nnz = 64;
  double slack = 1e-8;
  HierarchyMode::Kind kind = HierarchyMode::Kind::independent;
  OmegaSpec omega{OmegaMethod::exact};
  std::uint64_t seed = 1;
  std::optional<HierarchyState> initial;
};

/// ||Duh_j||_{L^2(Omega) H^alpha} against the factorial chain bound built from exact level norms.
CheckRecord check_factorial_decay(const DecayParams& p);

struct CauchyParams {
  int d = 1;
  int M = 1;
  std::vector<int> levels{2, 3, 4, 5};
  double level_ratio = 0.5;
  double T = 1.0;
  int grid_points = 5;
  int q = 8;
  double alpha = 1.0;
  double xi = 0.5;
  int sparse_nnz = 64;
  HierarchyMode::Kind kind = HierarchyMode::Kind::dependent;
  OmegaSpec omega{OmegaMethod::exact};
  std::uint64_t seed = 1;
  std::optional<HierarchyState> initial;
};

/// D(N) strictly decreasing; every later ratio at most the one measured at the first N.
CheckRecord check_cauchy(const CauchyParams& p);

struct ContinuityParams {
  std::vector<int> dims{1, 2, 3};
  int M_max = 2;
  int k_max = 2;
  std::vector<double> betas{0.5, 1.0};
  std::vector<double> beta0_offsets{0.5, 3.0};
  std::vector<double> deltas{1e-1, 1e-2, 1e-3};
};

/// Per-coefficient inequality |e^{-i delta E} - 1| <= 2^{1-r} delta^r W^r on every slot.
CheckRecord check_continuity_lemma(const ContinuityParams& p);

struct ModulusParams {
  int d = 1;
  int M = 1;
  int N = 3;
  double T = 0.5;
  int grid_points = 6;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  double alpha = 1.0;
  double alpha0 = 2.0;
  double xi = 0.5;
  int q = 12;
  int sparse_nnz = 64;
  HierarchyMode::Kind kind = HierarchyMode::Kind::dependent;
  OmegaSpec omega{OmegaMethod::exact};
  std::uint64_t seed = 1;
  std::optional<HierarchyState> initial;
};

/// sup_t ||Gamma_N(t+delta) - Gamma_N(t)||_{L^2 H^alpha_xi} / delta^r bounded by its value at the largest delta.
CheckRecord check_modulus_scaling(const ModulusParams& p);

struct ExpansionCheckParams {
  std::vector<double> deltas{0.0, 0.1};
  double t = 0.7;
  std::vector<double> t_inner{0.4, 0.1};
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
};

/// Example 1 structure plus expansion vs direct composition over all 8 fields of d=1, M=1.
CheckRecord check_expansion_example1(const ExpansionCheckParams& p);

/// One chain against direct composition on d=1, M=1, every field, plain and difference forms.
CheckRecord check_chain_soundness(const OperatorChainSpec& spec, std::uint64_t seed, double tolerance = 1e-10);

/// Exhaustive soundness over short chains (j <= 2, k <= 2) on d=1, M=1, sparse sigma.
CheckRecord check_expansion_battery(std::uint64_t seed, double tolerance = 1e-10);

struct IdentityParams {
  int d = 1;
  int M = 2;
  std::uint64_t seed = 1;
};

/// All-plus recovery, norm preservation of f^omega, dependent == independent with equal fields.
CheckRecord check_randomization_identities(const IdentityParams& p);

struct NlsCheckParams {
  int d = 1;
  int M = 8;
  std::vector<int> ks{1, 2};
  double dt = 1e-3;
  double T = 0.5;
  int grid_points = 11;
  double alpha = 1.0;
  double mass = 1.0;
  double decay = 2.0;
  double coupling = 1.0;
  double order_dt = 0.01;
  double algebraic_tolerance = 1e-10;
  double integrator_tolerance = 1e-6;
  double ratio_lo = 12.0;
  double ratio_hi = 20.0;
  std::uint64_t seed = 1;
  std::optional<std::vector<cplx>> phi0;
};

CheckRecord check_nls(const NlsCheckParams& p);

struct SimplexParams {
  int j_max = 4;
  std::vector<double> times{0.3, 0.7, 1.0};
  int q = 12;
  double tolerance = 1e-10;
};

CheckRecord check_simplex(const SimplexParams& p);

struct NonresonantParams {
  int d = 1;
  int M = 10;
  int m_max = 3;
  int draws = 100;
  double target_c1 = 0.5;
  double alpha = 1.0;
  std::uint64_t seed = 1;
};

/// Sampler -> checker round trip and a hand-built resonant state with a known witness.
CheckRecord check_nonresonant(const NonresonantParams& p);

struct C0Params {
  int d = 1;
  int M = 1;
  int k_max = 2;
  double alpha = 1.0;
  int trials = 20;
  OmegaSpec omega{OmegaMethod::exact};
  std::uint64_t seed = 1;
};

/// Measured C_0 for every k <= k_max and j <= k (empirical ratios and, where small enough, the exact norm).
CheckRecord estimate_c0_table(const C0Params& p);

}  // namespace gph
